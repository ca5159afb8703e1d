#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "conelab/barrier_kaplan.hpp"
#include "conelab/error.hpp"
#include "conelab/pde_solver.hpp"

using namespace conelab;
using std::numbers::pi;

namespace {

SolverConfig small_config(int n, double theta0, double p, double mu) {
  SolverConfig c;
  c.cone = make_cone(n, theta0);
  c.model = ModelParams{p, Exponential{mu}};
  c.R_max = 10.0;
  c.nr = 100;
  c.nphi = 16;
  c.t_end = 1.0;
  return c;
}

std::vector<double> bump_field(const Grid& g, double A, double rc, double w) {
  std::vector<double> u(g.size());
  for (std::size_t i = 0; i < g.nr; ++i) {
    const double r = g.r_centers[i];
    for (std::size_t j = 0; j < g.nphi(); ++j) {
      const double ang = g.radial_only() ? 1.0 : std::cos(pi / 2 * g.phi_centers[j] / g.cone.theta0);
      u[g.index(i, j)] = A * std::exp(-(r - rc) * (r - rc) / (w * w)) * ang;
    }
  }
  return u;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("solver grid") {
  auto c = small_config(2, pi / 2, 2.0, 0.0);
  c.nr = 4;
  c.nphi = 2;
  const Grid g = build_grid(c);
  CHECK(g.r_centers == std::vector<double>{1.25, 3.75, 6.25, 8.75});
  CHECK(g.phi_centers[0] == doctest::Approx(pi / 8));
  CHECK(g.phi_centers[1] == doctest::Approx(3 * pi / 8));
  c.nr = 0;
  CHECK_THROWS_AS(Solver{c}, Error);
  c.nr = 10;
  c.R_max = -1.0;
  CHECK_THROWS_AS(Solver{c}, Error);
}

TEST_CASE("operator annihilates constants away from Dirichlet faces") {
  const Grid g = build_grid(make_cone(3, pi / 2), 10.0, 50, 16);
  std::vector<double> u(g.size(), 4.0);
  const auto Lu = apply_operator(g, u);
  for (std::size_t i = 0; i + 1 < g.nr; ++i) {
    for (std::size_t j = 0; j + 1 < 16; ++j) CHECK(std::abs(Lu[g.index(i, j)]) < 1e-12);
  }
  CHECK(Lu[g.index(g.nr - 1, 0)] < 0.0);
  CHECK(Lu[g.index(0, 15)] < 0.0);
  std::vector<double> bad(3, 0.0);
  CHECK_THROWS_AS(apply_operator(g, bad), Error);
}

TEST_CASE("radial part is second order") {
  for (int n : {2, 3, 5}) {
    double errs[3];
    for (int level = 0; level < 3; ++level) {
      const Grid g = build_grid(make_cone(n, pi), 8.0, 100u << level, 1);
      std::vector<double> u(g.size());
      for (std::size_t i = 0; i < g.nr; ++i) u[i] = std::exp(-g.r_centers[i] * g.r_centers[i]);
      const auto Lu = apply_operator(g, u);
      double e = 0.0;
      for (std::size_t i = 0; i < g.nr; ++i) {
        const double r = g.r_centers[i];
        const double f = std::exp(-r * r);
        const double exact = (4 * r * r - 2) * f + (n - 1) / std::tanh(r) * (-2 * r * f);
        e = std::max(e, std::abs(Lu[i] - exact));
      }
      errs[level] = e;
    }
    const double ratio1 = errs[0] / errs[1];
    const double ratio2 = errs[1] / errs[2];
    CHECK(ratio1 > 3.5);
    CHECK(ratio1 < 4.5);
    CHECK(ratio2 > 3.5);
    CHECK(ratio2 < 4.5);
  }
}

TEST_CASE("angular part is second order") {
  for (int n : {2, 3, 4}) {
    const double theta0 = 1.0;
    const double a = pi / (2 * theta0);
    double errs[3];
    for (int level = 0; level < 3; ++level) {
      const Grid g = build_grid(make_cone(n, theta0), 10.0, 4, 32u << level);
      std::vector<double> u(g.size());
      for (std::size_t i = 0; i < g.nr; ++i) {
        for (std::size_t j = 0; j < g.nphi(); ++j) u[g.index(i, j)] = std::cos(a * g.phi_centers[j]);
      }
      const auto Lu = apply_operator(g, u);
      const double s = std::sinh(g.r_centers[0]);
      double e = 0.0;
      for (std::size_t j = 0; j < g.nphi(); ++j) {
        const double phi = g.phi_centers[j];
        const double exact =
            (-a * a * std::cos(a * phi) - (n - 2) / std::tan(phi) * a * std::sin(a * phi)) / (s * s);
        e = std::max(e, std::abs(Lu[g.index(0, j)] - exact));
      }
      errs[level] = e;
    }
    CHECK(errs[0] / errs[1] > 3.5);
    CHECK(errs[0] / errs[1] < 4.5);
    CHECK(errs[1] / errs[2] > 3.5);
    CHECK(errs[1] / errs[2] < 4.5);
  }
}

TEST_CASE("zero data stays zero") {
  auto c = small_config(2, pi / 2, 2.0, 0.5);
  Solver solver(c);
  StateField zero{std::vector<double>(solver.grid().size(), 0.0), 0.0};
  const auto res = solver.step(zero, solver.max_stable_dt());
  CHECK(max_abs(res.state.values) == 0.0);
  CHECK(res.clipped == 0);

  const auto out = solver.run(zero.values);
  CHECK(out.survived());
  CHECK(max_abs(out.final_state.values) == 0.0);
  CHECK(*std::max_element(out.sup_norm.begin(), out.sup_norm.end()) == 0.0);
  CHECK(out.final_state.t == 1.0);
  CHECK_THROWS_AS(solver.step(zero, 0.0), Error);
}

TEST_CASE("initial data checks") {
  auto c = small_config(2, pi / 2, 2.0, 0.0);
  Solver solver(c);
  std::vector<double> u(solver.grid().size(), 1.0);
  u[5] = -1.0;
  CHECK_THROWS_AS(solver.run(u), Error);
  u[5] = 1.0;
  c.U_max = 0.5;
  CHECK_THROWS_AS(run(u, c), Error);
  std::vector<double> short_u(3, 1.0);
  CHECK_THROWS_AS(solver.run(short_u), Error);
}

TEST_CASE("maximum principle without reaction") {
  for (double theta0 : {pi / 3, pi / 2, pi}) {
    auto c = small_config(3, theta0, 3.0, 2.0);
    c.pure_heat = true;
    c.t_end = 2.0;
    Solver solver(c);
    const auto u0 = bump_field(solver.grid(), 5.0, 1.0, 1.0);
    const auto out = solver.run(u0);
    CHECK(out.survived());
    CHECK(out.clip_count == 0);
    for (std::size_t k = 1; k < out.sup_norm.size(); ++k) {
      CHECK(out.sup_norm[k] <= out.sup_norm[k - 1] * (1 + 1e-14));
    }
    CHECK(out.sup_norm.back() < out.sup_norm.front());
  }
}

TEST_CASE("uniform data follows the scalar ODE") {
  SolverConfig c;
  c.cone = make_cone(2, pi);
  c.model = ModelParams{2.0, Exponential{0.0}};
  c.R_max = 20.0;
  c.nr = 100;
  c.t_end = 0.9;
  c.U_max = 1e3;
  c.rtol = 1e-8;
  c.atol = 1e-14;
  std::vector<double> u0(c.nr, 1.0);
  const auto out = run(u0, c);
  REQUIRE(out.survived());
  const double exact = 1.0 / (1.0 - 0.9);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(std::abs(out.final_state.values[i] - exact) < 1e-6 * exact);
  }
}

TEST_CASE("supercritical forcing blows up before the closed-form bound") {
  auto c = small_config(2, pi, 2.0, 1.0);
  c.R_max = 15.0;
  c.nr = 150;
  c.t_end = 10.0;
  const double alpha = 1.0;
  const double k = find_k0(2, 2.0, alpha, 0.0);
  c.monitor = Monitor{make_barrier(2, 2.0, k, alpha, 0.0), solve_cap_eigenpair(c.cone, 64)};
  Solver solver(c);
  const auto u0 = bump_field(solver.grid(), 20.0, 2.0, 1.0);
  const double G0 = kaplan_G(solver.grid(), u0, c.monitor->pair, c.monitor->barrier, 0.0);
  const auto out = solver.run(u0);
  REQUIRE(out.blew_up());
  const auto b = std::get<BlewUp>(out.tag);
  CHECK(b.T_est <= 1.05 * bound_T_thm1(G0, 2.0));
  CHECK(b.halfwidth > 0.0);
  CHECK(out.clip_count == 0);
  CHECK(out.sup_norm.back() > c.U_max);
  CHECK(out.trace.size() == out.times.size());
  CHECK(monitor_kaplan_inequality(out.trace, c.model).pass);
}

TEST_CASE("late blow-up keeps time advancing") {
  // the forcing e^t is large by the time the solution blows up, so the step
  // size collapses before the sup norm reaches U_max
  auto c = small_config(2, pi, 2.0, 1.0);
  c.R_max = 15.0;
  c.nr = 150;
  c.t_end = 60.0;
  Solver solver(c);
  const auto u0 = bump_field(solver.grid(), 1e-5, 2.0, 1.0);
  const auto out = solver.run(u0);
  REQUIRE(out.blew_up());
  const auto b = std::get<BlewUp>(out.tag);
  CHECK(b.halfwidth > 0.0);
  CHECK(b.T_est > 1.0);
  for (std::size_t k = 1; k < out.times.size(); ++k) REQUIRE(out.times[k] > out.times[k - 1]);
}

TEST_CASE("small data on a half-plane cone survives") {
  auto c = small_config(2, pi / 2, 2.0, 0.0);
  c.t_end = 10.0;
  Solver solver(c);
  const auto u0 = bump_field(solver.grid(), 1e-3, 2.0, 1.0);
  const auto out = solver.run(u0);
  CHECK(out.survived());
  CHECK(out.clip_count == 0);
  CHECK(out.sup_norm.back() < out.sup_norm.front());
}

TEST_CASE("step-count cap gives an inconclusive outcome") {
  auto c = small_config(2, pi / 2, 2.0, 0.0);
  c.max_steps = 3;
  Solver solver(c);
  const auto out = solver.run(bump_field(solver.grid(), 1.0, 2.0, 1.0));
  REQUIRE(std::holds_alternative<Inconclusive>(out.tag));
  CHECK(std::get<Inconclusive>(out.tag).reason == "max-steps");
  CHECK(outcome_name(out.tag) == "Inconclusive");
}

TEST_CASE("ordered data stay ordered") {
  const double scales[3][2] = {{0.5, 1.0}, {1.0, 1.5}, {0.1, 3.0}};
  for (const auto& s : scales) {
    auto c = small_config(2, pi / 2, 2.0, 0.5);
    c.t_end = 0.5;
    Solver probe(c);
    c.fixed_dt = 0.5 * probe.max_stable_dt();
    const auto ua = bump_field(probe.grid(), s[0], 2.0, 1.0);
    const auto ub = bump_field(probe.grid(), s[1], 2.0, 1.5);
    for (std::size_t q = 0; q < ua.size(); ++q) REQUIRE(ua[q] <= ub[q]);
    const auto a = run(ua, c);
    const auto b = run(ub, c);
    const std::size_t common = std::min(a.times.size(), b.times.size());
    CHECK(common > 10);
    for (std::size_t k = 0; k < common; ++k) {
      CHECK(a.times[k] == b.times[k]);
      CHECK(a.sup_norm[k] <= b.sup_norm[k]);
    }
  }
}

TEST_CASE("Kaplan functional is insensitive to the truncation radius") {
  const auto cone = make_cone(2, pi / 2);
  const auto pair = solve_discrete_cap_eigenpair(cone, 16);
  const double alpha = lambda1(2) + 5.0;
  const double m = 4.0;
  const auto barrier = make_barrier(2, m, find_k0(2, m, alpha, pair.omega1), alpha, pair.omega1);
  std::vector<double> G;
  for (double R : {10.0, 20.0}) {
    auto c = small_config(2, pi / 2, 2.0, 0.0);
    c.R_max = R;
    c.nr = static_cast<std::size_t>(10 * R);
    c.t_end = 2.0;
    c.monitor = Monitor{barrier, pair};
    Solver solver(c);
    const auto out = solver.run(bump_field(solver.grid(), 0.1, 2.0, 1.0));
    REQUIRE(out.survived());
    G.push_back(out.trace.G.back());
  }
  CHECK(std::abs(G[0] - G[1]) < 1e-4 * G[1]);
}

TEST_CASE("Kaplan monitor") {
  KaplanTrace zero;
  for (int k = 0; k < 5; ++k) zero.push(0.1 * k, 0.0);
  const auto z = monitor_kaplan_inequality(zero, ModelParams{2.0, Exponential{0.0}});
  CHECK(z.min_slack == 0.0);
  CHECK(z.pass);

  // G = 1/(1 - t) solves G' = G^2, the case mu = (p-1) alpha
  KaplanTrace exact;
  exact.alpha = 1.0;
  for (int k = 0; k <= 400; ++k) {
    const double t = 0.9 * std::pow(k / 400.0, 1.5);
    exact.push(t, 1.0 / (1.0 - t));
  }
  const auto e = monitor_kaplan_inequality(exact, ModelParams{2.0, Exponential{1.0}});
  CHECK(e.pass);
  CHECK(std::abs(e.min_slack) < 1e-2 * e.max_rhs);

  KaplanTrace power;
  power.alpha = 1.0;
  for (int k = 0; k <= 100; ++k) power.push(0.01 * k, 1.0);
  const auto pw = monitor_kaplan_inequality(power, ModelParams{2.0, Power{1.0}});
  CHECK(!pw.pass);

  KaplanTrace tiny;
  tiny.push(0.0, 1.0);
  tiny.push(1.0, 2.0);
  CHECK_THROWS_AS(monitor_kaplan_inequality(tiny, ModelParams{}), Error);
}

TEST_CASE("run CSV output") {
  auto c = small_config(2, pi / 2, 2.0, 0.0);
  c.t_end = 0.05;
  Solver solver(c);
  const auto out = solver.run(bump_field(solver.grid(), 0.5, 2.0, 1.0));
  std::ostringstream trace, summary;
  write_run_trace_csv(trace, out);
  write_run_summary_csv(summary, out);
  const std::string text = trace.str();
  CHECK(text.rfind("t,sup_norm,G\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') ==
        static_cast<long>(out.times.size() + 1));
  CHECK(summary.str().rfind(
            "outcome,T_est,T_est_halfwidth,t_stop,reason,clip_count,accepted_steps,"
            "rejected_steps,final_sup_norm\nSurvived,",
            0) == 0);
}
