#include "conelab/cap_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "conelab/csv.hpp"
#include "conelab/error.hpp"

namespace conelab {

CapOperator CapOperator::build(const ConeSpec& cone, std::size_t cells) {
  cone.validate();
  if (cells == 0) throw Error(ErrorKind::InvalidGrid, "cap operator needs at least one cell");
  CapOperator op;
  op.cone = cone;
  op.dphi = cone.theta0 / static_cast<double>(cells);
  op.measure = cap_cell_measures(cone, cells);
  op.dirichlet = !cone.full_sphere();
  op.coupling.resize(cells);
  const double factor = cap_sphere_factor(cone.n);
  for (std::size_t j = 0; j < cells; ++j) {
    const double face = op.dphi * static_cast<double>(j + 1);
    const double s = cone.n == 2 ? 1.0 : std::pow(std::sin(face), cone.n - 2);
    op.coupling[j] = factor * s / op.dphi;
  }
  if (!op.dirichlet) op.coupling.back() = 0.0;
  return op;
}

void CapOperator::apply(std::span<const double> u, std::span<double> out) const {
  const std::size_t n = size();
  for (std::size_t j = 0; j < n; ++j) {
    const double right = j + 1 < n ? coupling[j] * (u[j + 1] - u[j])
                                   : (dirichlet ? -2.0 * coupling[j] * u[j] : 0.0);
    const double left = j > 0 ? coupling[j - 1] * (u[j] - u[j - 1]) : 0.0;
    out[j] = (right - left) / measure[j];
  }
}

double CapOperator::diagonal(std::size_t j) const noexcept {
  const std::size_t n = size();
  const double right = j + 1 < n ? coupling[j] : (dirichlet ? 2.0 * coupling[j] : 0.0);
  const double left = j > 0 ? coupling[j - 1] : 0.0;
  return -(right + left) / measure[j];
}

double EigenPair::boundary_value() const noexcept {
  if (psi1.empty()) return 0.0;
  if (cone.full_sphere()) return psi1.back();
  // odd ghost across the Dirichlet face
  return 0.0;
}

double EigenPair::l1_norm() const noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < psi1.size(); ++j) s += psi1[j] * weights[j];
  return s;
}

double EigenPair::max_value() const noexcept {
  return psi1.empty() ? 0.0 : *std::max_element(psi1.begin(), psi1.end());
}

namespace {

// Shoots the discrete equation L psi + omega psi = 0 from the axis with
// psi_0 = 1. Returns true as soon as the solution (or its interpolated value
// on the theta0 face) reaches zero, which for this Jacobi-type recurrence
// happens exactly when omega exceeds the first eigenvalue.
bool shoot_has_node(const CapOperator& op, double omega, std::vector<double>* profile) {
  const std::size_t n = op.size();
  const auto& c = op.coupling;
  const auto& m = op.measure;
  if (profile) profile->assign(n, 0.0);
  double prev = 1.0;
  double cur = 1.0;
  if (profile) (*profile)[0] = cur;
  for (std::size_t j = 0; j < n; ++j) {
    const double left = j > 0 ? c[j - 1] * (cur - prev) : 0.0;
    const double next = cur + (left - omega * m[j] * cur) / c[j];
    if (j + 1 < n) {
      if (!(next > 0.0)) return true;
      prev = cur;
      cur = next;
      if (profile) (*profile)[j + 1] = cur;
    } else if (!(0.5 * (cur + next) > 0.0)) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<double> cap_l1_normalize(std::span<const double> psi_raw, const ConeSpec& cone) {
  cone.validate();
  if (psi_raw.empty()) throw Error(ErrorKind::ZeroFunction, "empty eigenfunction table");
  const auto weights = cap_cell_measures(cone, psi_raw.size());
  double integral = 0.0;
  for (std::size_t j = 0; j < psi_raw.size(); ++j) {
    if (psi_raw[j] < 0.0) {
      throw Error(ErrorKind::Domain, "eigenfunction table must be nonnegative");
    }
    integral += psi_raw[j] * weights[j];
  }
  if (!(integral > 1e-300) || !std::isfinite(integral)) {
    throw Error(ErrorKind::ZeroFunction, "L1 norm of the eigenfunction underflows");
  }
  std::vector<double> psi(psi_raw.begin(), psi_raw.end());
  for (double& v : psi) v /= integral;
  return psi;
}

EigenPair solve_cap_eigenpair(const ConeSpec& cone, std::size_t grid_points) {
  cone.validate();
  if (grid_points < 64) {
    throw Error(ErrorKind::InvalidGrid,
                "solve_cap_eigenpair needs at least 64 grid points, got " +
                    std::to_string(grid_points));
  }
  return solve_discrete_cap_eigenpair(cone, grid_points);
}

EigenPair solve_discrete_cap_eigenpair(const ConeSpec& cone, std::size_t grid_points) {
  cone.validate();
  if (grid_points == 0) throw Error(ErrorKind::InvalidGrid, "eigenpair needs at least one cell");
  const CapOperator op = CapOperator::build(cone, grid_points);

  EigenPair pair;
  pair.cone = cone;
  pair.dphi = op.dphi;
  pair.weights = op.measure;
  pair.sphere_factor = cap_sphere_factor(cone.n);

  if (cone.full_sphere()) {
    pair.omega1 = 0.0;
    pair.psi1.assign(grid_points, 1.0);
    pair.psi1 = cap_l1_normalize(pair.psi1, cone);
    return pair;
  }

  double lo = 0.0;
  double hi = 1.0;
  while (!shoot_has_node(op, hi, nullptr)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) {
      throw Error(ErrorKind::ConvergenceFailure, "no eigenvalue bracket found");
    }
  }
  constexpr double tol = 1e-10;
  int iterations = 0;
  while (hi - lo > 0.1 * tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (shoot_has_node(op, mid, nullptr)) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (++iterations > 400) {
      throw Error(ErrorKind::ConvergenceFailure, "eigenvalue bisection did not converge");
    }
  }
  pair.omega1 = 0.5 * (lo + hi);

  std::vector<double> profile;
  shoot_has_node(op, lo, &profile);
  pair.psi1 = cap_l1_normalize(profile, cone);
  return pair;
}

std::vector<double> angular_projection_weights(const Grid& grid, const EigenPair& pair) {
  if (pair.cone.n != grid.cone.n || pair.cone.theta0 != grid.cone.theta0) {
    throw Error(ErrorKind::GridMismatch, "eigenpair was solved on a different cone");
  }
  if (grid.radial_only()) {
    // whole sphere: psi1 is constant and integrates to one against dsigma
    return {pair.l1_norm()};
  }
  if (pair.size() != grid.nphi()) {
    throw Error(ErrorKind::GridMismatch,
                "eigenpair has " + std::to_string(pair.size()) +
                    " angular cells but the grid has " + std::to_string(grid.nphi()));
  }
  std::vector<double> w(pair.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = pair.psi1[j] * pair.weights[j];
  return w;
}

std::vector<double> angular_average(const Grid& grid, std::span<const double> u,
                                    const EigenPair& pair, double alpha, double t) {
  check_on_grid(grid, u.size());
  const auto w = angular_projection_weights(grid, pair);
  const double scale = std::exp(alpha * t);
  const std::size_t nphi = grid.nphi();
  std::vector<double> out(grid.nr, 0.0);
  for (std::size_t i = 0; i < grid.nr; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < nphi; ++j) s += w[j] * u[i * nphi + j];
    out[i] = scale * s;
  }
  return out;
}

void write_eigenpair_csv(std::ostream& out, const EigenPair& pair) {
  out << "# n=" << pair.cone.n << '\n';
  out << "# theta0=" << format_real(pair.cone.theta0) << '\n';
  out << "# omega1=" << format_real(pair.omega1) << '\n';
  write_csv_row(out, {"phi", "psi1"});
  for (std::size_t j = 0; j < pair.size(); ++j) {
    write_csv_row(out, {format_real(pair.phi(j)), format_real(pair.psi1[j])});
  }
}

}  // namespace conelab
