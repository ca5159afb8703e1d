#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "conelab/error.hpp"
#include "conelab/experiments.hpp"

namespace conelab {

std::vector<double> make_initial_data(const Grid& grid, const InitialData& data,
                                      const EigenPair& grid_pair, const BarrierParams& barrier) {
  const std::size_t nphi = grid.nphi();
  std::vector<double> psi(nphi);
  if (grid.radial_only()) {
    psi[0] = 1.0 / grid.phi_measure[0];
  } else {
    if (grid_pair.size() != nphi) {
      throw Error(ErrorKind::GridMismatch, "eigenpair does not match the grid's angular cells");
    }
    psi = grid_pair.psi1;
  }
  const double psi_max = *std::max_element(psi.begin(), psi.end());

  std::vector<double> u(grid.size());
  for (std::size_t i = 0; i < grid.nr; ++i) {
    const double r = grid.r_centers[i];
    double radial = 0.0;
    double angular_scale = 1.0;
    bool use_psi = true;
    if (const auto* b = std::get_if<BarrierShaped>(&data)) {
      radial = b->A * barrier.weight(r);
    } else if (const auto* b = std::get_if<Bump>(&data)) {
      const double x = (r - b->r_c) / b->w;
      radial = b->A * std::exp(-x * x);
      angular_scale = 1.0 / psi_max;
    } else {
      radial = std::get<Constant>(data).A;
      use_psi = false;
    }
    for (std::size_t j = 0; j < nphi; ++j) {
      u[i * nphi + j] = use_psi ? radial * psi[j] * angular_scale : radial;
    }
  }
  return u;
}

BarrierParams resolve_barrier(const SweepSpec& spec, const ModelParams& model, double omega1) {
  const int n = spec.cone.n;
  const BarrierPolicy& policy = spec.barrier;
  double alpha = lambda1(n) + 1.0;
  if (policy.alpha) {
    alpha = *policy.alpha;
  } else if (classify_regime(model, n).tag == RegimeTag::BlowUpAlways) {
    alpha = model.forcing_value() / (model.p - 1.0);
  }
  const double m = policy.m.value_or(default_barrier_m(omega1));
  const double k = policy.k ? *policy.k : find_k0(n, m, alpha, omega1, policy.safety);
  return make_barrier(n, m, k, alpha, omega1);
}

PointSetup prepare_point(const SweepSpec& spec, const ModelParams& model, const EigenPair& fine,
                         const EigenPair& grid_pair) {
  model.validate();
  const int n = spec.cone.n;
  PointSetup s;
  s.model = model;
  s.regime = classify_regime(model, n);
  s.omega1 = fine.omega1;
  s.grid_pair = grid_pair;

  const double p = model.p;
  s.barrier = resolve_barrier(spec, model, s.omega1);
  const double m = s.barrier.m;
  const double k = s.barrier.k;
  const double alpha = s.barrier.alpha;

  s.solver = spec.solver;
  s.solver.cone = spec.cone;
  s.solver.model = model;
  s.solver.monitor = Monitor{s.barrier, grid_pair};
  const Grid grid = build_grid(s.solver);
  s.u0 = make_initial_data(grid, spec.u0, grid_pair, s.barrier);
  s.G0 = KaplanFunctional(grid, grid_pair, s.barrier)(s.u0, 0.0);

  if (model.is_exponential()) {
    const double mu = model.forcing_value();
    if ((p - 1.0) * alpha - mu <= 0.0) {
      // G' >= e^{(mu - (p-1) alpha) t} G^p >= G^p
      s.which_theorem = "thm1";
      if (s.G0 > 0.0) s.T_bound = bound_T_thm1(s.G0, p);
    } else {
      s.which_theorem = "thm2";
      s.T_bound = bound_Tstar_thm2(s.G0, p, mu, alpha);
      s.largeness_holds =
          largeness_condition_14(grid, s.u0, grid_pair, m, k, alpha, mu, p).holds;
    }
  } else {
    const double q = model.forcing_value();
    s.which_theorem = "thm2bis";
    s.T_bound = bound_Tstar_thm2bis(s.G0, p, q, alpha);
    const double threshold =
        std::pow((p - 1.0) * H_integral(HUGE_VAL, q, p, alpha), -1.0 / (p - 1.0));
    s.largeness_holds = s.G0 > threshold;
  }
  return s;
}

PointSetup prepare_point(const SweepSpec& spec, const ModelParams& model) {
  const EigenPair fine = solve_cap_eigenpair(spec.cone, spec.barrier.eig_points);
  const EigenPair grid_pair = solve_discrete_cap_eigenpair(
      spec.cone, spec.cone.full_sphere() ? 64 : spec.solver.nphi);
  return prepare_point(spec, model, fine, grid_pair);
}

namespace {

SweepRow run_point(const SweepSpec& spec, const ModelParams& model, const EigenPair& fine,
                   const EigenPair& grid_pair) {
  SweepRow row;
  row.n = spec.cone.n;
  row.theta0 = spec.cone.theta0;
  row.omega1 = fine.omega1;
  row.p = model.p;
  row.forcing_kind = std::string(model.forcing_kind());
  row.forcing_value = model.forcing_value();
  row.regime = classify_regime(model, spec.cone.n).tag;
  try {
    const PointSetup s = prepare_point(spec, model, fine, grid_pair);
    row.T_bound = s.T_bound;
    row.which_theorem = s.which_theorem;
    row.G0 = s.G0;
    row.largeness_holds = s.largeness_holds;
    const RunOutcome out = run(s.u0, s.solver);
    row.outcome = std::string(outcome_name(out.tag));
    row.clip_count = out.clip_count;
    if (const auto* b = std::get_if<BlewUp>(&out.tag)) {
      row.T_est = b->T_est;
      row.T_est_halfwidth = b->halfwidth;
    } else if (const auto* i = std::get_if<Inconclusive>(&out.tag)) {
      row.reason = i->reason;
    }
  } catch (const Error& e) {
    row.outcome = "Inconclusive";
    row.reason = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return row;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) { return run_sweep(spec, spec.workers); }

SweepResult run_sweep(const SweepSpec& spec, std::size_t workers) {
  spec.validate();
  const EigenPair fine = solve_cap_eigenpair(spec.cone, spec.barrier.eig_points);
  const EigenPair grid_pair = solve_discrete_cap_eigenpair(
      spec.cone, spec.cone.full_sphere() ? 64 : spec.solver.nphi);

  const std::size_t nf = spec.forcing_values.size();
  const std::size_t total = spec.p_values.size() * nf;
  SweepResult result;
  result.rows.resize(total);

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      result.rows[k] = run_point(spec, spec.model(k / nf, k % nf), fine, grid_pair);
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, total);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return result;
}

}  // namespace conelab
