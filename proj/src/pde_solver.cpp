#include "conelab/pde_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "conelab/csv.hpp"
#include "conelab/error.hpp"

namespace conelab {

void SolverConfig::validate() const {
  cone.validate();
  model.validate();
  const auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
  if (!(R_max > 0.0) || !std::isfinite(R_max)) bad("R_max must be positive");
  if (nr == 0) bad("Nr must be at least 1");
  if (!cone.full_sphere() && nphi == 0) bad("Nphi must be at least 1");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) bad("t_end must be positive");
  if (!(U_max > 0.0)) bad("U_max must be positive");
  if (!(dt_min > 0.0)) bad("dt_min must be positive");
  if (!(dt_initial > 0.0)) bad("dt_initial must be positive");
  if (!(rtol > 0.0) || !(atol >= 0.0)) bad("rtol must be positive and atol nonnegative");
  if (!(cfl > 0.0 && cfl <= 1.0)) bad("cfl must lie in (0, 1]");
  if (max_steps == 0) bad("max_steps must be positive");
  if (fixed_dt && !(*fixed_dt > 0.0)) bad("fixed_dt must be positive");
  if (monitor && monitor->barrier.n != cone.n) bad("monitor barrier dimension differs from the cone");
}

Grid build_grid(const SolverConfig& config) {
  return build_grid(config.cone, config.R_max, config.nr, config.nphi);
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Radial flux coefficients divided by the cell measure: lower[i] couples to
// cell i-1, upper[i] to cell i+1 (or to the odd ghost past R_max).
struct RadialStencil {
  std::vector<double> lower;
  std::vector<double> upper;

  explicit RadialStencil(const Grid& grid) : lower(grid.nr), upper(grid.nr) {
    const int n = grid.cone.n;
    const auto face = [&](std::size_t i) {
      return i == 0 ? 0.0 : volume_weight(grid.r_face(i), n) / grid.dr;
    };
    for (std::size_t i = 0; i < grid.nr; ++i) {
      lower[i] = face(i) / grid.r_measure[i];
      upper[i] = face(i + 1) / grid.r_measure[i];
    }
  }

  double diagonal(std::size_t i) const {
    return i + 1 == lower.size() ? -(lower[i] + 2.0 * upper[i]) : -(lower[i] + upper[i]);
  }

  // out = L_r y, ring-major storage with `nphi` values per ring
  void apply(const double* y, double* out, std::size_t nphi) const {
    const std::size_t nr = lower.size();
    for (std::size_t i = 0; i < nr; ++i) {
      const double* row = y + i * nphi;
      const double* below = i > 0 ? row - nphi : row;  // lower[0] == 0
      double* o = out + i * nphi;
      const double lo = lower[i];
      const double up = upper[i];
      if (i + 1 < nr) {
        const double* above = row + nphi;
        for (std::size_t j = 0; j < nphi; ++j) {
          o[j] = lo * (below[j] - row[j]) + up * (above[j] - row[j]);
        }
      } else {
        for (std::size_t j = 0; j < nphi; ++j) {
          o[j] = lo * (below[j] - row[j]) - 2.0 * up * row[j];
        }
      }
    }
  }
};

// Cap operator D = M^{-1} K on every ring, scaled by 1/sinh^2 r_i. The
// innermost `exact_rings` rings, where this scaling makes D stiff, are
// advanced with exp(tau / sinh^2 r_i * D); the rest are applied explicitly.
// With S = M^{1/2} D M^{-1/2} = V diag(lambda) V^T, a ring stored as a row
// vector x^T maps to x^T M^{1/2} V e^{tau_i lambda} V^T M^{-1/2}.
class AngularPart {
 public:
  AngularPart(const Grid& grid, const RadialStencil& radial, double cfl)
      : op_(CapOperator::build(grid.cone, grid.nphi())), nr_(grid.nr), nphi_(grid.nphi()) {
    inv_sinh2_.resize(nr_);
    for (std::size_t i = 0; i < nr_; ++i) {
      const double s = std::sinh(grid.r_centers[i]);
      inv_sinh2_[i] = 1.0 / (s * s);
    }
    double ang = 0.0;
    for (std::size_t j = 0; j < nphi_; ++j) ang = std::max(ang, -op_.diagonal(j));

    // Treat a ring explicitly only if that costs at most 10% of the
    // radial step limit.
    double rad = 0.0;
    for (std::size_t i = 0; i < nr_; ++i) rad = std::max(rad, -radial.diagonal(i));
    exact_rings_ = 0;
    while (exact_rings_ < nr_ &&
           -radial.diagonal(exact_rings_) + ang * inv_sinh2_[exact_rings_] > 1.1 * rad) {
      ++exact_rings_;
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < nr_; ++i) {
      worst = std::max(worst, -radial.diagonal(i) + (i < exact_rings_ ? 0.0 : ang * inv_sinh2_[i]));
    }
    stable_dt_ = cfl / worst;

    right_.assign(nphi_, 0.0);
    left_.assign(nphi_, 0.0);
    for (std::size_t j = 0; j < nphi_; ++j) {
      if (j + 1 < nphi_) right_[j] = op_.coupling[j] / op_.measure[j];
      if (j > 0) left_[j] = op_.coupling[j - 1] / op_.measure[j];
    }
    ghost_ = op_.dirichlet ? 2.0 * op_.coupling[last_cell()] / op_.measure[last_cell()] : 0.0;

    if (exact_rings_ == 0) return;
    Eigen::MatrixXd D(nphi_, nphi_);
    std::vector<double> e(nphi_, 0.0), col(nphi_);
    for (std::size_t j = 0; j < nphi_; ++j) {
      e[j] = 1.0;
      op_.apply(e, col);
      for (std::size_t i = 0; i < nphi_; ++i) D(i, j) = col[i];
      e[j] = 0.0;
    }
    Eigen::VectorXd sq(nphi_);
    for (std::size_t j = 0; j < nphi_; ++j) sq(j) = std::sqrt(op_.measure[j]);
    Eigen::MatrixXd S = sq.asDiagonal() * D * sq.cwiseInverse().asDiagonal();
    S = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    if (eig.info() != Eigen::Success) {
      throw Error(ErrorKind::ConvergenceFailure, "cap operator eigendecomposition failed");
    }
    lambda_ = eig.eigenvalues();
    P_ = sq.asDiagonal() * eig.eigenvectors();
    Q_ = eig.eigenvectors().transpose() * sq.cwiseInverse().asDiagonal();
    work_.resize(exact_rings_, nphi_);
  }

  double stable_dt() const noexcept { return stable_dt_; }
  std::size_t exact_rings() const noexcept { return exact_rings_; }

  void propagate(double tau, double* u) {
    if (exact_rings_ == 0) return;
    if (tau != cached_tau_) {
      factors_.resize(exact_rings_, nphi_);
      for (std::size_t i = 0; i < exact_rings_; ++i) {
        for (std::size_t k = 0; k < nphi_; ++k) {
          factors_(i, k) = std::exp(tau * inv_sinh2_[i] * lambda_(k));
        }
      }
      cached_tau_ = tau;
    }
    Eigen::Map<RowMatrix> U(u, exact_rings_, nphi_);
    work_.noalias() = U * P_;
    work_.array() *= factors_.array();
    U.noalias() = work_ * Q_;
  }

  // out += D u / sinh^2 r_i on the explicit rings
  void apply_explicit(const double* y, double* out) const {
    const std::size_t last = nphi_ - 1;
    for (std::size_t i = exact_rings_; i < nr_; ++i) {
      const double* u = y + i * nphi_;
      double* o = out + i * nphi_;
      const double s = inv_sinh2_[i];
      if (nphi_ == 1) {
        o[0] -= s * ghost_ * u[0];
        continue;
      }
      o[0] += s * right_[0] * (u[1] - u[0]);
      for (std::size_t j = 1; j < last; ++j) {
        o[j] += s * (right_[j] * (u[j + 1] - u[j]) - left_[j] * (u[j] - u[j - 1]));
      }
      o[last] -= s * (ghost_ * u[last] + left_[last] * (u[last] - u[last - 1]));
    }
  }

 private:
  CapOperator op_;
  std::size_t nr_;
  std::size_t nphi_;
  std::vector<double> inv_sinh2_;
  std::size_t last_cell() const noexcept { return nphi_ - 1; }

  std::vector<double> right_;
  std::vector<double> left_;
  double ghost_ = 0.0;
  std::size_t exact_rings_ = 0;
  double stable_dt_ = 0.0;
  Eigen::VectorXd lambda_;
  RowMatrix P_;
  RowMatrix Q_;
  RowMatrix factors_;
  RowMatrix work_;
  double cached_tau_ = -1.0;
};

double sup_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

std::vector<double> apply_operator(const Grid& grid, std::span<const double> u) {
  check_on_grid(grid, u.size());
  const std::size_t nphi = grid.nphi();
  std::vector<double> out(u.size(), 0.0);
  RadialStencil(grid).apply(u.data(), out.data(), nphi);
  if (!grid.radial_only()) {
    const CapOperator op = CapOperator::build(grid.cone, nphi);
    std::vector<double> ring(nphi);
    for (std::size_t i = 0; i < grid.nr; ++i) {
      op.apply(u.subspan(i * nphi, nphi), ring);
      const double s = std::sinh(grid.r_centers[i]);
      for (std::size_t j = 0; j < nphi; ++j) out[i * nphi + j] += ring[j] / (s * s);
    }
  }
  return out;
}

std::string_view outcome_name(const OutcomeTag& tag) {
  switch (tag.index()) {
    case 0: return "BlewUp";
    case 1: return "Survived";
    default: return "Inconclusive";
  }
}

struct Solver::Impl {
  SolverConfig config;
  Grid grid;
  RadialStencil radial;
  std::optional<AngularPart> angular;
  std::optional<KaplanFunctional> kaplan;
  double stable_dt = 0.0;
  std::vector<double> f0, f1, y1, z, yh;

  explicit Impl(SolverConfig c)
      : config(std::move(c)), grid(build_grid(config)), radial(grid) {
    if (config.monitor) kaplan.emplace(grid, config.monitor->pair, config.monitor->barrier);
    if (grid.radial_only()) {
      double worst = 0.0;
      for (std::size_t i = 0; i < grid.nr; ++i) worst = std::max(worst, -radial.diagonal(i));
      stable_dt = config.cfl / worst;
    } else {
      angular.emplace(grid, radial, config.cfl);
      stable_dt = angular->stable_dt();
    }
  }

  // F(t), with the singular t^q (q < 0) at t = 0 replaced by its mean over
  // the step, dt^q / (q+1).
  double forcing(double t, double dt) const {
    const auto& model = config.model;
    if (!model.is_exponential() && t <= 0.0) {
      const double q = model.forcing_value();
      if (q < 0.0) return std::pow(dt, q) / (q + 1.0);
      if (q == 0.0) return 1.0;
      return 0.0;
    }
    return model.forcing_at(t);
  }

  void rhs(double t, double dt, const std::vector<double>& y, std::vector<double>& out) {
    radial.apply(y.data(), out.data(), grid.nphi());
    if (angular) angular->apply_explicit(y.data(), out.data());
    const double F = config.pure_heat ? 0.0 : forcing(t, dt);
    if (F == 0.0) return;
    const double p = config.model.p;
    if (p == 2.0) {
      for (std::size_t k = 0; k < y.size(); ++k) out[k] += F * y[k] * y[k];
    } else {
      for (std::size_t k = 0; k < y.size(); ++k) {
        out[k] += y[k] > 0.0 ? F * std::pow(y[k], p) : 0.0;
      }
    }
  }

  StepResult step(const StateField& u, double dt) {
    const std::size_t size = u.values.size();
    check_on_grid(grid, size);
    f0.resize(size);
    f1.resize(size);
    y1.resize(size);
    z.resize(size);
    yh.resize(size);
    const double t = u.t;

    StepResult res;
    std::vector<double> y = u.values;
    if (angular) angular->propagate(0.5 * dt, y.data());

    // Shu-Osher SSPRK3 with the embedded SSP Heun solution yh
    rhs(t, dt, y, f0);
    for (std::size_t k = 0; k < size; ++k) y1[k] = y[k] + dt * f0[k];
    rhs(t + dt, dt, y1, f1);
    for (std::size_t k = 0; k < size; ++k) {
      z[k] = y1[k] + dt * f1[k];
      yh[k] = 0.5 * (y[k] + z[k]);
      y1[k] = 0.75 * y[k] + 0.25 * z[k];
    }
    rhs(t + 0.5 * dt, dt, y1, f1);
    // Error in the max norm relative to the solution's sup norm, so cells
    // where u is tiny (near the axis, the lateral face or R_max) do not
    // throttle the step.
    double err_abs = 0.0;
    double sup_y = 0.0;
    double sup_y3 = 0.0;
    double total = 0.0;
    constexpr double third = 1.0 / 3.0;
    for (std::size_t k = 0; k < size; ++k) {
      const double y3 = third * y[k] + 2.0 * third * (y1[k] + dt * f1[k]);
      err_abs = std::max(err_abs, std::abs(y3 - yh[k]));
      sup_y = std::max(sup_y, std::abs(y[k]));
      sup_y3 = std::max(sup_y3, std::abs(y3));
      total += y3;
      y[k] = y3;
    }
    res.finite = std::isfinite(total);
    const double scale = config.atol + config.rtol * std::max(sup_y, sup_y3);
    const double err = err_abs == 0.0 ? 0.0 : (scale > 0.0 ? err_abs / scale : HUGE_VAL);
    if (!res.finite) {
      res.error = HUGE_VAL;
      return res;
    }
    if (angular) angular->propagate(0.5 * dt, y.data());

    const double floor = -1e-12 * sup_of(y);
    for (double& v : y) {
      if (v < 0.0) {
        if (v < floor) ++res.clipped;
        v = 0.0;
      }
    }
    res.state.values = std::move(y);
    res.state.t = t + dt;
    res.error = err;
    return res;
  }

  RunOutcome run(std::span<const double> u0) {
    check_on_grid(grid, u0.size());
    for (double v : u0) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::Validation, "initial data must be finite and nonnegative");
      }
    }
    RunOutcome out;
    StateField u{std::vector<double>(u0.begin(), u0.end()), 0.0};
    double sup = u.sup_norm();
    if (!(sup < config.U_max)) {
      throw Error(ErrorKind::InvalidConfig, "U_max must exceed the sup norm of u0");
    }
    const auto record = [&](const StateField& s, double norm) {
      out.times.push_back(s.t);
      out.sup_norm.push_back(norm);
      if (kaplan) out.trace.push(s.t, (*kaplan)(s.values, s.t));
    };
    if (kaplan) out.trace.alpha = kaplan->alpha();
    record(u, sup);

    const auto increasing_tail = [&] {
      const auto& h = out.sup_norm;
      if (h.size() < 11) return false;
      for (std::size_t k = h.size() - 10; k < h.size(); ++k) {
        if (!(h[k] > h[k - 1])) return false;
      }
      return true;
    };

    const double t_end = config.t_end;
    // step size fell below dt_min: blow-up if the sup norm is still rising
    const auto collapse = [&](double h) {
      if (increasing_tail()) {
        out.tag = BlewUp{u.t + 0.5 * h, 0.5 * h};
      } else {
        out.tag = Inconclusive{u.t, "step-size-collapse"};
      }
    };
    double dt = config.fixed_dt ? *config.fixed_dt : std::min(config.dt_initial, stable_dt);
    double err_prev = 1.0;
    std::size_t steps = 0;
    out.tag = Survived{t_end};

    while (true) {
      if (t_end - u.t <= 1e-12 * t_end) {
        out.tag = Survived{t_end};
        break;
      }
      if (steps++ >= config.max_steps) {
        out.tag = Inconclusive{u.t, "max-steps"};
        break;
      }
      const double h = std::min({dt, stable_dt, t_end - u.t});
      StepResult res = step(u, h);
      const bool accept = res.finite && (config.fixed_dt || res.error <= 1.0);
      if (accept) {
        const double t_prev = u.t;
        u = std::move(res.state);
        if (t_end - u.t <= 1e-12 * t_end) u.t = t_end;
        out.clip_count += res.clipped;
        ++out.accepted_steps;
        sup = u.sup_norm();
        record(u, sup);
        if (sup > config.U_max) {
          out.tag = BlewUp{0.5 * (t_prev + u.t), 0.5 * (u.t - t_prev)};
          break;
        }
        if (!config.fixed_dt) {
          const double e = std::max(res.error, 1e-10);
          double factor = 0.9 * std::pow(e, -0.7 / 3.0) * std::pow(err_prev, 0.4 / 3.0);
          factor = std::clamp(factor, 0.2, 5.0);
          err_prev = e;
          dt = h * factor;
          if (dt < config.dt_min && u.t < t_end) {
            collapse(h);
            break;
          }
        }
      } else {
        ++out.rejected_steps;
        const double factor =
            res.finite ? std::max(0.2, 0.9 * std::pow(res.error, -1.0 / 3.0)) : 0.25;
        dt = h * factor;
        if (dt < config.dt_min) {
          collapse(h);
          break;
        }
      }
    }
    if (out.clip_count > 0 && !std::holds_alternative<Inconclusive>(out.tag)) {
      out.tag = Inconclusive{u.t, "clipping"};
    }
    out.final_state = std::move(u);
    return out;
  }
};

Solver::Solver(SolverConfig config) {
  config.validate();
  impl_ = std::make_unique<Impl>(std::move(config));
}
Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

const Grid& Solver::grid() const noexcept { return impl_->grid; }
const SolverConfig& Solver::config() const noexcept { return impl_->config; }
double Solver::max_stable_dt() const noexcept { return impl_->stable_dt; }
StepResult Solver::step(const StateField& u, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "dt must be positive");
  return impl_->step(u, dt);
}
RunOutcome Solver::run(std::span<const double> u0) { return impl_->run(u0); }

RunOutcome run(std::span<const double> u0, const SolverConfig& config) {
  return Solver(config).run(u0);
}

MonitorCheck monitor_kaplan_inequality(const KaplanTrace& trace, const ModelParams& model) {
  if (trace.size() < 3) {
    throw Error(ErrorKind::ShortTrace, "Kaplan monitor needs at least 3 trace points");
  }
  const double p = model.p;
  const double a = trace.alpha;
  const auto rhs = [&](double t, double g) {
    const double decay = model.is_exponential()
                             ? std::exp((model.forcing_value() - (p - 1.0) * a) * t)
                             : std::pow(t, model.forcing_value()) * std::exp(-(p - 1.0) * a * t);
    return decay * std::pow(g, p);
  };
  MonitorCheck check;
  check.min_slack = HUGE_VAL;
  const auto& t = trace.times;
  const auto& G = trace.G;
  for (std::size_t k = 1; k + 1 < trace.size(); ++k) {
    const double h1 = t[k] - t[k - 1];
    const double h2 = t[k + 1] - t[k];
    const double d = -h2 / (h1 * (h1 + h2)) * G[k - 1] + (h2 - h1) / (h1 * h2) * G[k] +
                     h1 / (h2 * (h1 + h2)) * G[k + 1];
    const double r = rhs(t[k], G[k]);
    check.max_rhs = std::max(check.max_rhs, r);
    check.min_slack = std::min(check.min_slack, d - r);
  }
  check.tol = 0.05 * check.max_rhs;
  check.pass = check.min_slack >= -check.tol;
  return check;
}

void write_run_trace_csv(std::ostream& out, const RunOutcome& outcome) {
  write_csv_row(out, {"t", "sup_norm", "G"});
  const bool traced = outcome.trace.size() == outcome.times.size();
  for (std::size_t k = 0; k < outcome.times.size(); ++k) {
    write_csv_row(out, std::vector<std::string>{
                           format_real(outcome.times[k]), format_real(outcome.sup_norm[k]),
                           traced ? format_real(outcome.trace.G[k]) : std::string{}});
  }
}

void write_run_summary_csv(std::ostream& out, const RunOutcome& outcome) {
  write_csv_row(out, {"outcome", "T_est", "T_est_halfwidth", "t_stop", "reason", "clip_count",
                      "accepted_steps", "rejected_steps", "final_sup_norm"});
  std::string T_est, halfwidth, t_stop, reason;
  if (const auto* b = std::get_if<BlewUp>(&outcome.tag)) {
    T_est = format_real(b->T_est);
    halfwidth = format_real(b->halfwidth);
  } else if (const auto* s = std::get_if<Survived>(&outcome.tag)) {
    t_stop = format_real(s->t_end);
  } else {
    const auto& i = std::get<Inconclusive>(outcome.tag);
    t_stop = format_real(i.t_stop);
    reason = i.reason;
  }
  write_csv_row(out, std::vector<std::string>{
                         std::string(outcome_name(outcome.tag)), T_est, halfwidth, t_stop, reason,
                         std::to_string(outcome.clip_count),
                         std::to_string(outcome.accepted_steps),
                         std::to_string(outcome.rejected_steps),
                         format_real(outcome.final_state.sup_norm())});
}

}  // namespace conelab
