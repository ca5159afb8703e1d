// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "conelab/barrier_kaplan.hpp"
#include "conelab/cap_spectrum.hpp"
#include "conelab/error.hpp"
#include "conelab/experiments.hpp"
#include "conelab/hyperbolic_core.hpp"
#include "conelab/pde_solver.hpp"

using namespace conelab;
using std::numbers::pi;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string outcome_text(const RunOutcome& out) {
  std::string s(outcome_name(out.tag));
  if (const auto* i = std::get_if<Inconclusive>(&out.tag)) s += "(" + i->reason + ")";
  return s;
}

// Desk-scale sweep spec on the reference cone n = 2.
SweepSpec desk_spec(double theta0, const ModelParams& model) {
  SweepSpec spec;
  spec.cone = make_cone(2, theta0);
  spec.p_values = {model.p};
  spec.exponential = model.is_exponential();
  spec.forcing_values = {model.forcing_value()};
  spec.solver.R_max = 15.0;
  spec.solver.nr = 400;
  spec.solver.nphi = 64;
  return spec;
}

Verdict criterion1() {
  Verdict v;
  v.require(lambda1(2) == 0.25, "lambda1(2) == 0.25");
  v.require(lambda1(3) == 1.0, "lambda1(3) == 1");
  double worst = 0.0;
  for (int n = 3; n <= 8; ++n) {
    worst = std::max(worst, std::abs(euclidean_comparison(0.0, n, 2.0).blowup_upper - (1.0 + 2.0 / n)));
  }
  v.require(worst <= 1e-12, "Fujita exponent 1 + 2/n");
  v.note("max Fujita error " + fmt("%.1e", worst));
  return v;
}

Verdict criterion2() {
  Verdict v;
  const double w3 = solve_cap_eigenpair(make_cone(3, pi / 2), 4096).omega1;
  const double w2 = solve_cap_eigenpair(make_cone(2, pi / 2), 4096).omega1;
  v.require(std::abs(w3 - 2.0) <= 1e-6, "omega1(n=3, pi/2) = 2");
  v.require(std::abs(w2 - 1.0) <= 1e-6, "omega1(n=2, pi/2) = 1");
  double lo = HUGE_VAL, hi = 0.0;
  for (int n : {2, 3, 4}) {
    const auto cone = make_cone(n, pi / 3);
    const double a = solve_cap_eigenpair(cone, 256).omega1;
    const double b = solve_cap_eigenpair(cone, 512).omega1;
    const double c = solve_cap_eigenpair(cone, 1024).omega1;
    const double ratio = (a - b) / (b - c);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  v.require(lo >= 3.5 && hi <= 4.5, "Richardson ratio in [3.5, 4.5]");
  double prev = HUGE_VAL;
  bool monotone = true;
  for (double t : {pi / 4, pi / 2, 3 * pi / 4, pi}) {
    const double w = solve_cap_eigenpair(make_cone(3, t), 4096).omega1;
    monotone = monotone && w <= prev;
    prev = w;
  }
  v.require(monotone, "omega1 nonincreasing in theta0");
  v.require(prev == 0.0, "omega1 = 0 on the whole sphere");
  v.note("|omega1-2| " + fmt("%.1e", std::abs(w3 - 2.0)) + ", |omega1-1| " +
         fmt("%.1e", std::abs(w2 - 1.0)) + ", ratios [" + fmt("%.3f", lo) + ", " +
         fmt("%.3f", hi) + "]");
  return v;
}

Verdict criterion3() {
  Verdict v;
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> un(2, 4);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = HUGE_VAL;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = un(rng);
    const double m = 2.0 + 3.0 * u01(rng);
    const double omega1 = m * (m - 1.0) * u01(rng) * 0.999;
    const double alpha = lambda1(n) + 5.0 * (1.0 - u01(rng)) + 1e-9;
    const double k = find_k0(n, m, alpha, omega1, 0.9);
    const auto check = verify_lemma1(make_barrier(n, m, k, alpha, omega1), 50.0, 2000);
    worst = std::min(worst, check.min_residual);
  }
  v.require(worst >= -1e-12, "min residual >= -1e-12");
  v.note("smallest residual over 200 tuples " + fmt("%.4g", worst));
  return v;
}

Verdict criterion4() {
  Verdict v;
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  bool bracket = true;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    const double p = 1.0 + 3.0 * (1.0 - u01(rng));
    const double alpha = lambda1(n) + 3.0 * (1.0 - u01(rng));
    const double G0 = std::pow(alpha, 1.0 / (p - 1.0)) * (1.0 + 1e-3 + 4.0 * u01(rng));
    const auto a = bound_Tstar_thm2(G0, p, 0.0, alpha);
    const auto b = bound_Tstar_thm2bis(G0, p, 0.0, alpha);
    if (!a || !b) {
      v.require(false, "bound present above threshold");
      continue;
    }
    worst = std::max(worst, std::abs(*a - *b));
    bracket = bracket && std::isfinite(ode_lower_bound(*a * (1 - 1e-6), G0, p, 0.0, alpha));
    try {
      ode_lower_bound(*a * (1 + 1e-6), G0, p, 0.0, alpha);
      bracket = false;
    } catch (const Error& e) {
      bracket = bracket && e.kind() == ErrorKind::PastBlowup;
    }
  }
  v.require(worst <= 1e-9, "bounds agree within 1e-9");
  v.require(bracket, "ODE solution brackets T*");
  v.note("max |difference| " + fmt("%.1e", worst));
  return v;
}

Verdict criterion5() {
  Verdict v;
  const ModelParams model{2.0, Exponential{1.0}};
  for (double theta0 : {pi, pi / 2}) {
    auto spec = desk_spec(theta0, model);
    spec.u0 = BarrierShaped{1.0};
    PointSetup s = prepare_point(spec, model);
    // the horizon is the window the bound allows
    if (s.T_bound) s.solver.t_end = 1.05 * *s.T_bound;
    const RunOutcome out = run(s.u0, s.solver);
    const std::string tag = theta0 == pi ? "theta0=pi" : "theta0=pi/2";
    v.require(s.barrier.alpha == 1.0, tag + " alpha = 1");
    v.require(out.blew_up(), tag + " BlewUp (got " + outcome_text(out) + ")");
    if (!out.blew_up()) continue;
    const double T = std::get<BlewUp>(out.tag).T_est;
    v.require(T <= 1.05 * *s.T_bound, tag + " T_est <= 1.05 bound");
    const auto mon = monitor_kaplan_inequality(out.trace, model);
    v.require(mon.pass, tag + " Kaplan monitor");
    v.note(tag + ": T_est " + fmt("%.4f", T) + " vs bound " + fmt("%.4g", *s.T_bound) +
           ", slack " + fmt("%.2e", mon.min_slack) + " >= -" + fmt("%.2e", mon.tol));
  }
  return v;
}

// Scales BarrierShaped data so that G0 equals `target` times the level.
PointSetup scaled_point(SweepSpec spec, const ModelParams& model, double factor,
                        double level) {
  spec.u0 = BarrierShaped{1.0};
  const double G1 = prepare_point(spec, model).G0;
  spec.u0 = BarrierShaped{factor * level / G1};
  return prepare_point(spec, model);
}

Verdict criterion6() {
  Verdict v;
  const ModelParams model{2.0, Exponential{0.0}};
  auto spec = desk_spec(pi / 2, model);
  spec.barrier.alpha = 1.25;
  // largeness with a 2x margin: lhs = 2 rhs
  spec.u0 = BarrierShaped{1.0};
  const PointSetup unit = prepare_point(spec, model);
  const Grid grid = build_grid(unit.solver);
  const auto chk1 = largeness_condition_14(grid, unit.u0, unit.grid_pair, unit.barrier.m,
                                           unit.barrier.k, 1.25, 0.0, 2.0);
  spec.u0 = BarrierShaped{2.0 * chk1.rhs / chk1.lhs};
  const PointSetup s = prepare_point(spec, model);
  const auto chk = largeness_condition_14(grid, s.u0, s.grid_pair, s.barrier.m, s.barrier.k,
                                          1.25, 0.0, 2.0);
  v.require(chk.holds && std::abs(chk.lhs / chk.rhs - 2.0) < 1e-9, "largeness with 2x margin");
  v.require(s.T_bound.has_value(), "T* defined");
  if (!s.T_bound) return v;
  const RunOutcome out = run(s.u0, s.solver);
  v.require(out.blew_up(), "BlewUp (got " + outcome_text(out) + ")");
  if (out.blew_up()) {
    const double T = std::get<BlewUp>(out.tag).T_est;
    v.require(T <= 1.05 * *s.T_bound, "T_est <= 1.05 T*");
    v.note("A " + fmt("%.4g", amplitude(spec.u0)) + ", T_est " + fmt("%.4f", T) + " vs T* " +
           fmt("%.4f", *s.T_bound));
  }
  return v;
}

Verdict criterion7() {
  Verdict v;
  const ModelParams model{2.0, Exponential{0.0}};
  auto spec = desk_spec(pi / 2, model);
  spec.barrier.alpha = 1.25;
  spec.u0 = BarrierShaped{1.0};
  const PointSetup unit = prepare_point(spec, model);
  const auto chk = largeness_condition_14(build_grid(unit.solver), unit.u0, unit.grid_pair,
                                          unit.barrier.m, unit.barrier.k, 1.25, 0.0, 2.0);
  spec.u0 = BarrierShaped{2.0 * chk.rhs / chk.lhs / 1e3};
  const PointSetup s = prepare_point(spec, model);
  const RunOutcome out = run(s.u0, s.solver);
  v.require(out.survived(), "Survived (got " + outcome_text(out) + ")");
  const double ratio = out.sup_norm.back() / out.sup_norm.front();
  v.require(ratio < 0.5, "final sup < 0.5 initial");
  v.require(out.clip_count == 0, "no clipping");
  v.note("t_end " + fmt("%.3g", out.final_state.t) + ", sup ratio " + fmt("%.3e", ratio) +
         ", clips " + std::to_string(out.clip_count));
  return v;
}

Verdict criterion8() {
  Verdict v;
  const ModelParams model{2.0, Power{1.0}};
  auto spec = desk_spec(pi / 2, model);
  const double alpha = lambda1(2) + 1.0;
  const double level = std::pow((2.0 - 1.0) * H_integral(HUGE_VAL, 1.0, 2.0, alpha), -1.0);

  const PointSetup big = scaled_point(spec, model, 2.0, level);
  v.require(big.largeness_holds.value_or(false), "largeness for large data");
  const RunOutcome out = run(big.u0, big.solver);
  v.require(out.blew_up(), "large data BlewUp (got " + outcome_text(out) + ")");
  if (out.blew_up() && big.T_bound) {
    const double T = std::get<BlewUp>(out.tag).T_est;
    v.require(T <= 1.05 * *big.T_bound, "T_est <= 1.05 T*");
    v.note("large: T_est " + fmt("%.4f", T) + " vs T* " + fmt("%.4f", *big.T_bound));
  }

  const PointSetup small = scaled_point(spec, model, 2.0e-4, level);
  const RunOutcome quiet = run(small.u0, small.solver);
  v.require(quiet.survived(), "small data Survived (got " + outcome_text(quiet) + ")");
  v.note("small: " + outcome_text(quiet) + ", final sup " + fmt("%.3e", quiet.sup_norm.back()));
  return v;
}

SweepSpec cap_sweep(double theta0) {
  SweepSpec spec;
  spec.cone = make_cone(2, theta0);
  spec.p_values = {2.0, 3.0};
  spec.forcing_values = {0.1, 1.0, 2.0};
  spec.u0 = Bump{0.05, 2.0, 1.0};
  spec.solver.R_max = 15.0;
  spec.solver.nr = 200;
  spec.solver.nphi = 32;
  spec.solver.t_end = 10.0;
  return spec;
}

Verdict criterion9() {
  Verdict v;
  std::vector<SweepResult> results;
  for (double t : {pi / 3, pi / 2, 2 * pi / 3, pi}) results.push_back(run_sweep(cap_sweep(t)));
  const auto& ref = results.front();
  std::size_t compared = 0;
  bool regimes = true, outcomes = true;
  for (const auto& r : results) {
    for (std::size_t k = 0; k < ref.rows.size(); ++k) {
      regimes = regimes && r.rows[k].regime == ref.rows[k].regime;
      for (const auto& other : results) {
        const auto& a = r.rows[k];
        const auto& b = other.rows[k];
        if (a.outcome == "Inconclusive" || b.outcome == "Inconclusive") continue;
        ++compared;
        outcomes = outcomes && a.outcome == b.outcome;
      }
    }
  }
  v.require(regimes, "predicted regimes identical across caps");
  v.require(outcomes, "conclusive outcomes agree across caps");
  std::string summary;
  for (const auto& row : ref.rows) summary += row.outcome.substr(0, 1);
  for (std::size_t c = 1; c < results.size(); ++c) {
    summary += "|";
    for (const auto& row : results[c].rows) summary += row.outcome.substr(0, 1);
  }
  v.note("outcomes by cap " + summary + ", " + std::to_string(compared) + " pairs compared");
  return v;
}

Verdict criterion10() {
  Verdict v;
  // maximum principle without reaction on every cap
  bool monotone = true;
  for (double theta0 : {pi / 3, pi / 2, 2 * pi / 3, pi}) {
    SolverConfig c;
    c.cone = make_cone(3, theta0);
    c.model = ModelParams{2.0, Exponential{1.0}};
    c.R_max = 10.0;
    c.nr = 100;
    c.nphi = 32;
    c.t_end = 2.0;
    c.pure_heat = true;
    Solver solver(c);
    const Grid& g = solver.grid();
    std::vector<double> u0(g.size());
    for (std::size_t i = 0; i < g.nr; ++i) {
      for (std::size_t j = 0; j < g.nphi(); ++j) {
        u0[g.index(i, j)] = std::exp(-std::pow(g.r_centers[i] - 1.5, 2)) * (1.0 + 0.5 * (j % 3));
      }
    }
    const auto out = solver.run(u0);
    monotone = monotone && out.survived() && out.clip_count == 0;
    for (std::size_t k = 1; k < out.sup_norm.size(); ++k) {
      monotone = monotone && out.sup_norm[k] <= out.sup_norm[k - 1] * (1 + 1e-14);
    }
  }
  v.require(monotone, "maximum principle");

  // second-order radial and angular operators
  double rlo = HUGE_VAL, rhi = 0.0;
  for (int n : {2, 3}) {
    double e[3];
    for (int level = 0; level < 3; ++level) {
      const Grid g = build_grid(make_cone(n, pi), 8.0, 100u << level, 1);
      std::vector<double> u(g.size());
      for (std::size_t i = 0; i < g.nr; ++i) u[i] = std::exp(-g.r_centers[i] * g.r_centers[i]);
      const auto Lu = apply_operator(g, u);
      e[level] = 0.0;
      for (std::size_t i = 0; i < g.nr; ++i) {
        const double r = g.r_centers[i], f = std::exp(-r * r);
        const double exact = (4 * r * r - 2) * f - (n - 1) / std::tanh(r) * 2 * r * f;
        e[level] = std::max(e[level], std::abs(Lu[i] - exact));
      }
    }
    for (int l = 0; l < 2; ++l) {
      rlo = std::min(rlo, e[l] / e[l + 1]);
      rhi = std::max(rhi, e[l] / e[l + 1]);
    }
  }
  double alo = HUGE_VAL, ahi = 0.0;
  for (int n : {2, 3}) {
    const double theta0 = 1.0, a = pi / (2 * theta0);
    double e[3];
    for (int level = 0; level < 3; ++level) {
      const Grid g = build_grid(make_cone(n, theta0), 10.0, 4, 32u << level);
      std::vector<double> u(g.size());
      for (std::size_t i = 0; i < g.nr; ++i) {
        for (std::size_t j = 0; j < g.nphi(); ++j) u[g.index(i, j)] = std::cos(a * g.phi_centers[j]);
      }
      const auto Lu = apply_operator(g, u);
      const double s2 = std::pow(std::sinh(g.r_centers[0]), 2);
      e[level] = 0.0;
      for (std::size_t j = 0; j < g.nphi(); ++j) {
        const double phi = g.phi_centers[j];
        const double exact =
            (-a * a * std::cos(a * phi) - (n - 2) / std::tan(phi) * a * std::sin(a * phi)) / s2;
        e[level] = std::max(e[level], std::abs(Lu[g.index(0, j)] - exact));
      }
    }
    for (int l = 0; l < 2; ++l) {
      alo = std::min(alo, e[l] / e[l + 1]);
      ahi = std::max(ahi, e[l] / e[l + 1]);
    }
  }
  v.require(rlo >= 3.5 && rhi <= 4.5, "radial operator second order");
  v.require(alo >= 3.5 && ahi <= 4.5, "angular operator second order");

  // worker-count independence of the sweep CSV
  auto spec = cap_sweep(pi / 2);
  spec.solver.nr = 100;
  spec.solver.nphi = 16;
  spec.solver.t_end = 2.0;
  std::ostringstream one, eight;
  write_sweep_csv(one, run_sweep(spec, 1));
  write_sweep_csv(eight, run_sweep(spec, 8));
  v.require(one.str() == eight.str(), "sweep CSV identical for 1 and 8 workers");
  v.note("radial ratios [" + fmt("%.3f", rlo) + ", " + fmt("%.3f", rhi) + "], angular [" +
         fmt("%.3f", alo) + ", " + fmt("%.3f", ahi) + "]");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"closed-form exactness", criterion1},
      {"eigenvalue oracles", criterion2},
      {"barrier residual suite", criterion3},
      {"bound cross-consistency", criterion4},
      {"supercritical blow-up within the bound", criterion5},
      {"subcritical blow-up for large data", criterion6},
      {"small data survive", criterion7},
      {"power forcing", criterion8},
      {"cap independence", criterion9},
      {"numerical hygiene", criterion10},
  };
  // optional argument: run a single criterion by number
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    if (only != 0 && only != static_cast<int>(c + 1)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[c].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("criterion %2zu %s  %s (%.1f s): %s\n", c + 1, v.pass ? "PASS" : "FAIL",
                criteria[c].first, secs, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
