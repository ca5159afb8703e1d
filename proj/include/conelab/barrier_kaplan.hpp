#pragma once

// Radial barrier r^m e^{-k r^2}, its admissible (R0, k0) constants, the
// weighted Kaplan functional G(t) and the closed-form blow-up time bounds.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conelab/cap_spectrum.hpp"
#include "conelab/grid.hpp"
#include "conelab/hyperbolic_core.hpp"

namespace conelab {

struct Phi0Value {
  double value = 0.0;
  double d_r = 0.0;
  double d_rr = 0.0;
};

/// r^m e^{-k r^2} and its first two radial derivatives.
Phi0Value phi0(double r, double m, double k);

/// Smallest radius (> 1) beyond which (n-1)^2/4 coth^2 r - alpha stays below
/// half of lambda1 - alpha, plus a 1e-6 margin. Requires alpha > lambda1.
double find_R0(double alpha, int n);

struct LemmaConstants {
  double R0 = 0.0;
  double bound3 = 0.0;  // largest k keeping the discriminant negative beyond R0
  double bound4 = 0.0;  // largest k keeping the residual positive on [0, R0]
  double k0 = 0.0;      // safety * min(bound3, bound4)
};

LemmaConstants lemma1_constants(int n, double m, double alpha, double omega1,
                                double safety = 0.9);

/// Largest admissible barrier width k0 (scaled by `safety`).
double find_k0(int n, double m, double alpha, double omega1, double safety = 0.9);

/// Left side of the pointwise sub-eigenfunction inequality after dividing
/// by r^{m-2} e^{-k r^2}:
///   m(m-1) + m(n-1) r coth r - omega1 r^2/sinh^2 r
///     + r^2 [4k^2 r^2 - 2(n-1)k r coth r - (2k(2m+1) - alpha)].
/// Finite at r = 0 through the series of r coth r and r^2/sinh^2 r.
double lemma1_residual(double r, int n, double m, double k, double alpha, double omega1);

/// Phi(r) = C r^m e^{-k r^2} with C normalizing int_0^inf Phi sinh^{n-1} r dr to 1.
struct BarrierParams {
  double m = 2.0;
  double k = 1.0;
  double C = 1.0;
  double alpha = 0.0;
  int n = 2;
  double omega1 = 0.0;
  double log_integral = 0.0;  // log of int_0^inf r^m e^{-k r^2} sinh^{n-1} r dr

  double integral() const;
  double weight(double r) const;  // Phi(r)
};

struct Lemma1Check {
  double min_residual = 0.0;
  bool pass = false;
};

/// Evaluates lemma1_residual on r = j r_max / grid_points, j = 0..grid_points.
Lemma1Check verify_lemma1(const BarrierParams& params, double r_max, std::size_t grid_points);

/// log of int_0^inf r^m e^{-k r^2} sinh^{n-1} r dr. The integrand is handled in
/// log space and the range is cut where a concavity tail bound drops below
/// 1e-14 of the integral.
double barrier_log_integral(double m, double k, int n);

/// C = 1 / int_0^inf r^m e^{-k r^2} sinh^{n-1} r dr.
double normalize_barrier(double m, double k, int n);

BarrierParams make_barrier(int n, double m, double k, double alpha, double omega1);

/// max(2, root of m(m-1) = omega1 + 1/2).
double default_barrier_m(double omega1);

/// Tensor-product quadrature of e^{alpha t} u psi1 Phi sinh^{n-1} r over the
/// grid: u is piecewise constant per cell, the radial weight of each cell is
/// the exact cell integral of Phi sinh^{n-1} r.
class KaplanFunctional {
 public:
  KaplanFunctional(const Grid& grid, const EigenPair& pair, const BarrierParams& barrier);

  double operator()(std::span<const double> u, double t) const;
  double alpha() const noexcept { return alpha_; }
  std::span<const double> radial_weights() const noexcept { return radial_; }
  std::span<const double> angular_weights() const noexcept { return angular_; }

 private:
  std::vector<double> radial_;
  std::vector<double> angular_;
  double alpha_ = 0.0;
};

double kaplan_G(const Grid& grid, std::span<const double> u, const EigenPair& pair,
                const BarrierParams& barrier, double t);

struct KaplanTrace {
  std::vector<double> times;
  std::vector<double> G;
  double alpha = 0.0;

  void push(double t, double g) {
    times.push_back(t);
    G.push_back(g);
  }
  std::size_t size() const noexcept { return times.size(); }
};

/// T <= G0^{1-p} / (p-1) when G' >= G^p.
double bound_T_thm1(double G0, double p);

/// Blow-up time bound when G' >= e^{-((p-1)alpha - mu) t} G^p. Empty when
/// G0 does not exceed (alpha - mu/(p-1))^{1/(p-1)}: no conclusion then.
std::optional<double> bound_Tstar_thm2(double G0, double p, double mu, double alpha);

/// Explicit solution of G' = e^{-((p-1)alpha - mu) t} G^p with G(0) = G0,
/// including the limit (p-1)alpha = mu. Throws past-blowup beyond its pole.
double ode_lower_bound(double t, double G0, double p, double mu, double alpha);

/// H(t) = int_0^t s^q e^{-(p-1) alpha s} ds; t may be +inf.
double H_integral(double t, double q, double p, double alpha);

/// H^{-1}(G0^{1-p}/(p-1)) when G0 > ((p-1) H(inf))^{-1/(p-1)}, else empty.
std::optional<double> bound_Tstar_thm2bis(double G0, double p, double q, double alpha);

struct LargenessCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Compares int int u0 psi1 r^m e^{-k r^2} sinh^{n-1} r with
/// (alpha - mu/(p-1))^{1/(p-1)} int r^m e^{-k r^2} sinh^{n-1} r.
LargenessCheck largeness_condition_14(const Grid& grid, std::span<const double> u0,
                                      const EigenPair& pair, double m, double k,
                                      double alpha, double mu, double p);

/// One row of the bound report.
struct BoundRow {
  int n = 2;
  double theta0 = 0.0;
  double omega1 = 0.0;
  double p = 2.0;
  std::string forcing;  // "mu=<value>" or "q=<value>"
  double m = 2.0;
  double k = 0.0;
  double alpha = 0.0;
  double G0 = 0.0;
  std::optional<double> T_bound;
  std::string which_theorem;
};

void write_bound_csv_header(std::ostream& out);
void write_bound_csv_row(std::ostream& out, const BoundRow& row);

}  // namespace conelab
