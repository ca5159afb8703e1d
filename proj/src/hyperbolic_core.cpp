#include "conelab/hyperbolic_core.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "conelab/error.hpp"

namespace conelab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionTooSmall: return "dimension-too-small";
    case ErrorKind::Domain: return "domain-error";
    case ErrorKind::ConvergenceFailure: return "convergence-failure";
    case ErrorKind::InvalidGrid: return "invalid-grid";
    case ErrorKind::ZeroFunction: return "zero-function";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::InvalidAlpha: return "invalid-alpha";
    case ErrorKind::InvalidM: return "invalid-m";
    case ErrorKind::NonpositiveG0: return "nonpositive-G0";
    case ErrorKind::InvalidRegime: return "invalid-regime";
    case ErrorKind::PastBlowup: return "past-blowup";
    case ErrorKind::InvalidQ: return "invalid-q";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::NonfiniteState: return "nonfinite-state";
    case ErrorKind::ShortTrace: return "short-trace";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Validation: return "validation-error";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

void ConeSpec::validate() const {
  if (n < 2) {
    throw Error(ErrorKind::DimensionTooSmall,
                "dimension n must be at least 2, got " + std::to_string(n));
  }
  if (!(theta0 > 0.0) || theta0 > std::numbers::pi) {
    throw Error(ErrorKind::Validation,
                "theta0 must lie in (0, pi], got " + std::to_string(theta0));
  }
}

ConeSpec make_cone(int n, double theta0) {
  if (std::abs(theta0 - std::numbers::pi) <= 1e-6) theta0 = std::numbers::pi;
  ConeSpec cone{n, theta0};
  cone.validate();
  return cone;
}

void ModelParams::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::Validation, "p must exceed 1");
  }
  if (const auto* power = std::get_if<Power>(&forcing)) {
    if (!(power->q > -1.0) || !std::isfinite(power->q)) {
      throw Error(ErrorKind::InvalidQ, "q must exceed -1");
    }
  } else if (!std::isfinite(std::get<Exponential>(forcing).mu)) {
    throw Error(ErrorKind::Validation, "mu must be finite");
  }
}

double ModelParams::forcing_value() const noexcept {
  if (const auto* e = std::get_if<Exponential>(&forcing)) return e->mu;
  return std::get<Power>(forcing).q;
}

std::string_view ModelParams::forcing_kind() const noexcept {
  return is_exponential() ? "exp" : "power";
}

double ModelParams::forcing_at(double t) const noexcept {
  if (const auto* e = std::get_if<Exponential>(&forcing)) {
    return std::exp(e->mu * t);
  }
  const double q = std::get<Power>(forcing).q;
  if (q == 0.0) return 1.0;
  return std::pow(t, q);
}

std::string_view to_string(RegimeTag tag) {
  return tag == RegimeTag::BlowUpAlways ? "BlowUpAlways" : "Conditional";
}

double lambda1(int n) {
  if (n < 2) {
    throw Error(ErrorKind::DimensionTooSmall,
                "lambda1 needs n >= 2, got " + std::to_string(n));
  }
  const double d = n - 1;
  return d * d / 4.0;
}

namespace {

double coth(double r) {
  if (r > 40.0) return 1.0;  // coth r - 1 < 2e-35
  return std::cosh(r) / std::sinh(r);
}

}  // namespace

RadialCoefficients radial_coefficients(double r, int n) {
  if (n < 2) {
    throw Error(ErrorKind::DimensionTooSmall, "radial_coefficients needs n >= 2");
  }
  if (!(r > 0.0)) {
    throw Error(ErrorKind::Domain,
                "radial_coefficients is singular at r <= 0, got r = " + std::to_string(r));
  }
  const double s = std::sinh(r);
  return {1.0, (n - 1) * coth(r), 1.0 / (s * s)};
}

double volume_weight(double r, int n) {
  if (r <= 0.0) return 0.0;
  return std::pow(std::sinh(r), n - 1);
}

double log_sinh(double r) {
  if (r > 20.0) return r - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * r));
  return std::log(std::sinh(r));
}

double r_coth_r(double r) {
  const double r2 = r * r;
  if (std::abs(r) < 1e-2) {
    return 1.0 + r2 * (1.0 / 3.0 + r2 * (-1.0 / 45.0 + r2 * (2.0 / 945.0)));
  }
  return r * coth(r);
}

double r_over_sinh_sq(double r) {
  const double r2 = r * r;
  if (std::abs(r) < 1e-2) {
    return 1.0 + r2 * (-1.0 / 3.0 + r2 * (1.0 / 15.0 + r2 * (-2.0 / 189.0)));
  }
  if (r > 350.0) return 0.0;
  const double q = r / std::sinh(r);
  return q * q;
}

Regime classify_regime(const ModelParams& params, int n) {
  params.validate();
  const double threshold = (params.p - 1.0) * lambda1(n);
  Regime regime{RegimeTag::Conditional, threshold};
  if (const auto* e = std::get_if<Exponential>(&params.forcing)) {
    if (e->mu > threshold) regime.tag = RegimeTag::BlowUpAlways;
  }
  return regime;
}

std::string_view to_string(EuclideanRegime regime) {
  switch (regime) {
    case EuclideanRegime::BlowsUp: return "BlowsUp";
    case EuclideanRegime::GlobalPossible: return "GlobalPossible";
    case EuclideanRegime::Unresolved: return "Unresolved";
  }
  return "Unresolved";
}

EuclideanComparison euclidean_comparison(double omega1, int n, double p) {
  if (n < 2) {
    throw Error(ErrorKind::DimensionTooSmall, "euclidean_comparison needs n >= 2");
  }
  if (!(omega1 >= 0.0)) {
    throw Error(ErrorKind::Domain, "omega1 must be nonnegative");
  }
  const double b = n - 2;
  const double gamma_minus = (-b - std::sqrt(b * b + 4.0 * omega1)) / 2.0;
  const double inf = std::numeric_limits<double>::infinity();

  EuclideanComparison out;
  out.lambda = -gamma_minus;
  out.blowup_upper = 1.0 + 2.0 / (2.0 + out.lambda);
  out.global_lower = out.lambda > 0.0 ? 1.0 + 2.0 / out.lambda : inf;
  out.global_upper = n > 3 ? (n + 1.0) / (n - 3.0) : inf;

  if (p > 1.0 && p < out.blowup_upper) {
    out.regime = EuclideanRegime::BlowsUp;
  } else if (out.lambda > 0.0 && p > out.global_lower && p < out.global_upper) {
    out.regime = EuclideanRegime::GlobalPossible;
  } else {
    out.regime = EuclideanRegime::Unresolved;
  }
  return out;
}

}  // namespace conelab
