#include "conelab/barrier_kaplan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "conelab/csv.hpp"
#include "conelab/error.hpp"
#include "quadrature.hpp"

namespace conelab {

Phi0Value phi0(double r, double m, double k) {
  const double g = std::exp(-k * r * r);
  const double rm = std::pow(r, m);
  const double rm1 = std::pow(r, m - 1.0);
  const double rm2 = std::pow(r, m - 2.0);
  Phi0Value out;
  out.value = rm * g;
  out.d_r = (m * rm1 - 2.0 * k * rm * r) * g;
  out.d_rr = (m * (m - 1.0) * rm2 - 2.0 * k * (2.0 * m + 1.0) * rm + 4.0 * k * k * rm * r * r) * g;
  return out;
}

namespace {

void require_alpha(double alpha, int n) {
  if (!(alpha > lambda1(n))) {
    throw Error(ErrorKind::InvalidAlpha, "alpha must exceed lambda1(H^n) = " +
                                             format_real(lambda1(n)) + ", got " +
                                             format_real(alpha));
  }
}

double coth(double r) { return r > 40.0 ? 1.0 : std::cosh(r) / std::sinh(r); }

}  // namespace

double find_R0(double alpha, int n) {
  require_alpha(alpha, n);
  constexpr double margin = 1e-6;
  const double d = n - 1;
  const double crossing = std::asinh(std::sqrt(d * d / (2.0 * (alpha - lambda1(n)))));
  return std::max(1.0 + margin, crossing + margin);
}

LemmaConstants lemma1_constants(int n, double m, double alpha, double omega1, double safety) {
  require_alpha(alpha, n);
  if (!(m >= 2.0) || !(m * (m - 1.0) > omega1)) {
    throw Error(ErrorKind::InvalidM, "need m >= 2 and m(m-1) > omega1; got m = " +
                                         format_real(m) + ", omega1 = " + format_real(omega1));
  }
  if (!(safety > 0.0 && safety < 1.0)) {
    throw Error(ErrorKind::Domain, "safety factor must lie in (0, 1)");
  }
  LemmaConstants c;
  c.R0 = find_R0(alpha, n);
  const double two_m1 = 2.0 * m + 1.0;
  c.bound3 = (alpha - lambda1(n)) / (4.0 * two_m1);
  const double R0 = c.R0;
  c.bound4 = (m * (m - 1.0) - omega1) /
             (2.0 * two_m1 * R0 * R0 + 2.0 * (n - 1) * R0 * R0 * R0 * coth(R0));
  c.k0 = safety * std::min(c.bound3, c.bound4);
  return c;
}

double find_k0(int n, double m, double alpha, double omega1, double safety) {
  return lemma1_constants(n, m, alpha, omega1, safety).k0;
}

double lemma1_residual(double r, int n, double m, double k, double alpha, double omega1) {
  const double rc = r_coth_r(r);
  const double r2 = r * r;
  const double bracket =
      4.0 * k * k * r2 - 2.0 * (n - 1) * k * rc - (2.0 * k * (2.0 * m + 1.0) - alpha);
  return m * (m - 1.0) + m * (n - 1) * rc - omega1 * r_over_sinh_sq(r) + r2 * bracket;
}

double BarrierParams::integral() const { return std::exp(log_integral); }

double BarrierParams::weight(double r) const {
  if (r <= 0.0) return 0.0;
  return std::exp(std::log(C) + m * std::log(r) - k * r * r);
}

Lemma1Check verify_lemma1(const BarrierParams& params, double r_max, std::size_t grid_points) {
  if (grid_points == 0 || !(r_max > 0.0)) {
    throw Error(ErrorKind::InvalidGrid, "verify_lemma1 needs r_max > 0 and grid points");
  }
  Lemma1Check check;
  check.min_residual = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j <= grid_points; ++j) {
    const double r = r_max * static_cast<double>(j) / static_cast<double>(grid_points);
    const double v =
        lemma1_residual(r, params.n, params.m, params.k, params.alpha, params.omega1);
    check.min_residual = std::min(check.min_residual, v);
  }
  check.pass = check.min_residual >= -1e-12;
  return check;
}

double barrier_log_integral(double m, double k, int n) {
  if (!(k > 0.0)) throw Error(ErrorKind::Domain, "barrier width k must be positive");
  if (!(m >= 0.0)) throw Error(ErrorKind::InvalidM, "barrier exponent m must be nonnegative");
  if (n < 2) throw Error(ErrorKind::DimensionTooSmall, "barrier needs n >= 2");

  const auto g = [=](double r) { return m * std::log(r) - k * r * r + (n - 1) * log_sinh(r); };
  const auto dg = [=](double r) { return m / r - 2.0 * k * r + (n - 1) * coth(r); };

  // g is strictly concave; locate its maximum
  double lo = 1e-12;
  double hi = 1.0;
  while (dg(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dg(mid) > 0.0 ? lo : hi) = mid;
  }
  const double peak = 0.5 * (lo + hi);
  const double g_peak = g(peak);
  const double curvature = m / (peak * peak) + 2.0 * k +
                           (n - 1) / std::pow(std::sinh(std::max(peak, 1e-300)), 2);
  const double width = 1.0 / std::sqrt(curvature);

  const auto f = [&](double r) { return r <= 0.0 ? 0.0 : std::exp(g(r) - g_peak); };
  double total = 0.0;

  // left of the peak in chunks of one width
  for (double b = peak; b > 0.0; b -= width) {
    total += detail::adaptive_integral(f, std::max(0.0, b - width), b, 1e-13);
  }
  // right of the peak until the concavity tail bound e^{g(R)}/|g'(R)| is negligible
  double R = peak;
  for (int chunk = 0; chunk < 100000; ++chunk) {
    total += detail::adaptive_integral(f, R, R + width, 1e-13);
    R += width;
    const double slope = dg(R);
    if (slope < 0.0 && std::exp(g(R) - g_peak) / -slope < 1e-15 * total) break;
  }
  return g_peak + std::log(total);
}

double normalize_barrier(double m, double k, int n) {
  return std::exp(-barrier_log_integral(m, k, n));
}

BarrierParams make_barrier(int n, double m, double k, double alpha, double omega1) {
  BarrierParams b;
  b.n = n;
  b.m = m;
  b.k = k;
  b.alpha = alpha;
  b.omega1 = omega1;
  b.log_integral = barrier_log_integral(m, k, n);
  b.C = std::exp(-b.log_integral);
  return b;
}

double default_barrier_m(double omega1) {
  const double target = omega1 + 0.5;
  return std::max(2.0, 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * target)));
}

namespace {

std::vector<double> radial_cell_integrals(const Grid& grid, double log_scale, double m, double k) {
  const int n = grid.cone.n;
  std::vector<double> w(grid.nr);
  for (std::size_t i = 0; i < grid.nr; ++i) {
    const double a = grid.r_face(i);
    w[i] = detail::gauss_cell(
        [=](double r) {
          return std::exp(log_scale + m * std::log(r) - k * r * r + (n - 1) * log_sinh(r));
        },
        a, a + grid.dr);
  }
  return w;
}

}  // namespace

KaplanFunctional::KaplanFunctional(const Grid& grid, const EigenPair& pair,
                                   const BarrierParams& barrier)
    : radial_(radial_cell_integrals(grid, std::log(barrier.C), barrier.m, barrier.k)),
      angular_(angular_projection_weights(grid, pair)),
      alpha_(barrier.alpha) {
  if (barrier.n != grid.cone.n) {
    throw Error(ErrorKind::GridMismatch, "barrier dimension differs from the grid's");
  }
}

double KaplanFunctional::operator()(std::span<const double> u, double t) const {
  const std::size_t nphi = angular_.size();
  if (u.size() != radial_.size() * nphi) {
    throw Error(ErrorKind::GridMismatch, "field size does not match the Kaplan weights");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < radial_.size(); ++i) {
    double ring = 0.0;
    const double* row = u.data() + i * nphi;
    for (std::size_t j = 0; j < nphi; ++j) ring += angular_[j] * row[j];
    total += radial_[i] * ring;
  }
  return std::exp(alpha_ * t) * total;
}

double kaplan_G(const Grid& grid, std::span<const double> u, const EigenPair& pair,
                const BarrierParams& barrier, double t) {
  check_on_grid(grid, u.size());
  return KaplanFunctional(grid, pair, barrier)(u, t);
}

double bound_T_thm1(double G0, double p) {
  if (!(G0 > 0.0)) throw Error(ErrorKind::NonpositiveG0, "G(0) must be positive");
  if (!(p > 1.0)) throw Error(ErrorKind::Validation, "p must exceed 1");
  return std::pow(G0, 1.0 - p) / (p - 1.0);
}

std::optional<double> bound_Tstar_thm2(double G0, double p, double mu, double alpha) {
  if (!(p > 1.0)) throw Error(ErrorKind::Validation, "p must exceed 1");
  const double rate = (p - 1.0) * alpha - mu;
  if (!(rate > 0.0)) {
    throw Error(ErrorKind::InvalidRegime, "need (p-1) alpha - mu > 0, got " + format_real(rate));
  }
  if (!(G0 > 0.0)) return std::nullopt;
  const double a = (alpha - mu / (p - 1.0)) * std::pow(G0, 1.0 - p);
  if (!(a < 1.0)) return std::nullopt;
  return -std::log1p(-a) / rate;
}

namespace {

// expm1(x)/x with its limit 1 at x = 0
double expm1_ratio(double x) {
  if (std::abs(x) < 1e-8) return 1.0 + 0.5 * x;
  return std::expm1(x) / x;
}

}  // namespace

double ode_lower_bound(double t, double G0, double p, double mu, double alpha) {
  if (!(G0 > 0.0)) throw Error(ErrorKind::NonpositiveG0, "G(0) must be positive");
  if (!(p > 1.0)) throw Error(ErrorKind::Validation, "p must exceed 1");
  if (t == 0.0) return G0;
  const double rate = (p - 1.0) * alpha - mu;
  const double bracket = std::pow(G0, 1.0 - p) - (p - 1.0) * t * expm1_ratio(-rate * t);
  if (!(bracket > 0.0)) {
    throw Error(ErrorKind::PastBlowup,
                "t = " + format_real(t) + " is past the blow-up time of the comparison ODE");
  }
  return std::pow(bracket, -1.0 / (p - 1.0));
}

double H_integral(double t, double q, double p, double alpha) {
  if (!(q > -1.0)) throw Error(ErrorKind::InvalidQ, "q must exceed -1");
  if (!(p > 1.0)) throw Error(ErrorKind::Validation, "p must exceed 1");
  const double c = (p - 1.0) * alpha;
  if (!(c > 0.0)) throw Error(ErrorKind::Domain, "H needs (p-1) alpha > 0");
  if (!(t > 0.0)) return 0.0;
  const double total = std::tgamma(q + 1.0) / std::pow(c, q + 1.0);
  if (std::isinf(t)) return total;

  // Beyond s_max the integrand carries less than 1e-17 of the total.
  const double s_max = (std::max(q, 0.0) + 45.0) / c;
  const double end = std::min(t, s_max);
  const double chunk = 2.0 / c;
  const double e = 1.0 + q;

  double sum = 0.0;
  double a = 0.0;
  if (q < 0.0) {
    // s = tau^{1/(1+q)} removes the s^q singularity: s^q ds = dtau / (1+q)
    const double b = std::min(end, chunk);
    sum += detail::adaptive_integral(
               [=](double tau) { return std::exp(-c * std::pow(tau, 1.0 / e)); }, 0.0,
               std::pow(b, e), 1e-12) /
           e;
    a = b;
  }
  while (a < end) {
    const double b = std::min(end, a + chunk);
    sum += detail::adaptive_integral(
        [=](double s) { return (q == 0.0 ? 1.0 : std::pow(s, q)) * std::exp(-c * s); }, a, b,
        1e-12);
    a = b;
  }
  return sum;
}

std::optional<double> bound_Tstar_thm2bis(double G0, double p, double q, double alpha) {
  const double total = H_integral(std::numeric_limits<double>::infinity(), q, p, alpha);
  if (!(G0 > 0.0)) return std::nullopt;
  const double target = std::pow(G0, 1.0 - p) / (p - 1.0);
  if (!(target < total)) return std::nullopt;

  double lo = 0.0;
  double hi = 1.0;
  while (H_integral(hi, q, p, alpha) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw Error(ErrorKind::ConvergenceFailure, "H^{-1} bracket not found");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (H_integral(mid, q, p, alpha) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

LargenessCheck largeness_condition_14(const Grid& grid, std::span<const double> u0,
                                      const EigenPair& pair, double m, double k,
                                      double alpha, double mu, double p) {
  check_on_grid(grid, u0.size());
  const auto radial = radial_cell_integrals(grid, 0.0, m, k);
  const auto angular = angular_projection_weights(grid, pair);
  const std::size_t nphi = angular.size();
  LargenessCheck out;
  for (std::size_t i = 0; i < grid.nr; ++i) {
    double ring = 0.0;
    for (std::size_t j = 0; j < nphi; ++j) ring += angular[j] * u0[i * nphi + j];
    out.lhs += radial[i] * ring;
  }
  const double base = alpha - mu / (p - 1.0);
  const double level = base > 0.0 ? std::pow(base, 1.0 / (p - 1.0)) : 0.0;
  out.rhs = level * std::exp(barrier_log_integral(m, k, grid.cone.n));
  out.holds = out.lhs > out.rhs;
  return out;
}

void write_bound_csv_header(std::ostream& out) {
  write_csv_row(out, {"n", "theta0", "omega1", "p", "forcing", "m", "k", "alpha", "G0",
                      "T_bound", "which_theorem"});
}

void write_bound_csv_row(std::ostream& out, const BoundRow& row) {
  write_csv_row(out, std::vector<std::string>{
                         std::to_string(row.n), format_real(row.theta0), format_real(row.omega1),
                         format_real(row.p), row.forcing, format_real(row.m), format_real(row.k),
                         format_real(row.alpha), format_real(row.G0),
                         row.T_bound ? format_real(*row.T_bound) : std::string{},
                         row.which_theorem});
}

}  // namespace conelab
