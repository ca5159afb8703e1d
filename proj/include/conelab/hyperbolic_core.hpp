#pragma once

// Geometry of H^n in geodesic polar coordinates, the bottom of the spectrum,
// and the closed-form regime classifiers.

#include <numbers>
#include <string_view>
#include <variant>

namespace conelab {

/// Cone (0, inf) x Omega in H^n where Omega is the geodesic cap of half-angle
/// theta0 around the north pole of S^{n-1}. theta0 == pi is the whole space.
struct ConeSpec {
  int n = 2;
  double theta0 = std::numbers::pi;

  bool full_sphere() const noexcept { return theta0 == std::numbers::pi; }
  void validate() const;
};

/// Builds a validated cone. Half-angles within 1e-6 of pi are snapped to pi so
/// that truncated decimal input like 3.14159265 selects the whole space.
ConeSpec make_cone(int n, double theta0);

struct Exponential {
  double mu = 0.0;
};

struct Power {
  double q = 0.0;
};

using Forcing = std::variant<Exponential, Power>;

/// Reaction term F(t) u^p with F(t) = exp(mu t) or t^q.
struct ModelParams {
  double p = 2.0;
  Forcing forcing = Exponential{};

  void validate() const;
  bool is_exponential() const noexcept {
    return std::holds_alternative<Exponential>(forcing);
  }
  double forcing_value() const noexcept;
  std::string_view forcing_kind() const noexcept;
  double forcing_at(double t) const noexcept;
};

enum class RegimeTag { BlowUpAlways, Conditional };

std::string_view to_string(RegimeTag tag);

struct Regime {
  RegimeTag tag = RegimeTag::Conditional;
  double threshold = 0.0;  // (p-1) lambda1(H^n)
};

/// (n-1)^2 / 4.
double lambda1(int n);

struct RadialCoefficients {
  double a_rr = 1.0;
  double a_r = 0.0;
  double a_ang = 0.0;
};

/// Coefficients of u_rr, u_r and Delta_theta u in the polar Laplacian of H^n.
RadialCoefficients radial_coefficients(double r, int n);

/// (sinh r)^(n-1).
double volume_weight(double r, int n);

/// log sinh r, stable for large r.
double log_sinh(double r);

/// r coth r and (r / sinh r)^2, with series branches near r = 0.
double r_coth_r(double r);
double r_over_sinh_sq(double r);

Regime classify_regime(const ModelParams& params, int n);

enum class EuclideanRegime { BlowsUp, GlobalPossible, Unresolved };

std::string_view to_string(EuclideanRegime regime);

struct EuclideanComparison {
  double lambda = 0.0;
  EuclideanRegime regime = EuclideanRegime::Unresolved;
  double blowup_upper = 0.0;   // 1 + 2/(2+lambda)
  double global_lower = 0.0;   // 1 + 2/lambda (inf when lambda == 0)
  double global_upper = 0.0;   // (n+1)/(n-3) for n > 3, inf otherwise
};

/// Classifies p for the Euclidean cone with the same cross-section, using the
/// comparison exponent lambda = -gamma_- from gamma (gamma + n - 2) = omega1.
EuclideanComparison euclidean_comparison(double omega1, int n, double p);

}  // namespace conelab
