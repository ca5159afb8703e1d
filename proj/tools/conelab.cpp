// conelab command-line front end: eig, lemma1, bounds, simulate, sweep.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "conelab/barrier_kaplan.hpp"
#include "conelab/cap_spectrum.hpp"
#include "conelab/csv.hpp"
#include "conelab/error.hpp"
#include "conelab/experiments.hpp"
#include "conelab/pde_solver.hpp"

namespace fs = std::filesystem;
using namespace conelab;

namespace {

constexpr int kValidation = 1;
constexpr int kRuntime = 2;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConvergenceFailure:
    case ErrorKind::NonfiniteState:
    case ErrorKind::PastBlowup:
    case ErrorKind::ShortTrace:
    case ErrorKind::Io:
      return kRuntime;
    default:
      return kValidation;
  }
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + (dir / name).string());
  return f;
}

struct CommonOptions {
  std::string config;
  std::string out;
  std::size_t workers = 0;
  std::int64_t seed = 0;
};

// Cone from --config, or from --n/--theta0 when no config is given.
struct ConeOptions {
  int n = 0;
  double theta0 = std::numbers::pi;
};

ConeSpec resolve_cone(const CommonOptions& common, const ConeOptions& cone) {
  if (!common.config.empty()) return parse_config(common.config).cone;
  if (cone.n == 0) throw Error(ErrorKind::Validation, "give --config or --n");
  return make_cone(cone.n, cone.theta0);
}

int cmd_eig(const CommonOptions& common, const ConeOptions& cone_opt, std::size_t points) {
  const ConeSpec cone = resolve_cone(common, cone_opt);
  const EigenPair pair = solve_cap_eigenpair(cone, points);
  std::printf("omega1 = %s\n", format_real(pair.omega1).c_str());
  if (!common.out.empty()) {
    auto f = open_out(common.out, "psi1.csv");
    write_eigenpair_csv(f, pair);
  }
  return 0;
}

struct Lemma1Options {
  std::optional<double> omega1;
  std::optional<double> m;
  std::optional<double> alpha;
  std::optional<double> k;
  double safety = 0.9;
  double r_max = 50.0;
  std::size_t points = 2000;
};

int cmd_lemma1(const CommonOptions& common, const ConeOptions& cone_opt, const Lemma1Options& o) {
  int n = 0;
  double omega1 = 0.0;
  double m = 0.0;
  double alpha = 0.0;
  double safety = o.safety;
  std::optional<double> k = o.k;
  if (!common.config.empty()) {
    const SweepSpec spec = parse_config(common.config);
    n = spec.cone.n;
    omega1 = o.omega1 ? *o.omega1 : solve_cap_eigenpair(spec.cone, spec.barrier.eig_points).omega1;
    const BarrierParams b = resolve_barrier(spec, spec.model(0, 0), omega1);
    m = o.m.value_or(b.m);
    alpha = o.alpha.value_or(b.alpha);
    safety = spec.barrier.safety;
    if (!k && spec.barrier.k) k = spec.barrier.k;
  } else {
    if (cone_opt.n == 0) throw Error(ErrorKind::Validation, "give --config or --n");
    n = cone_opt.n;
    omega1 = o.omega1 ? *o.omega1
                      : solve_cap_eigenpair(make_cone(n, cone_opt.theta0), 4096).omega1;
    m = o.m.value_or(default_barrier_m(omega1));
    alpha = o.alpha.value_or(lambda1(n) + 1.0);
  }
  const LemmaConstants c = lemma1_constants(n, m, alpha, omega1, safety);
  const BarrierParams b = make_barrier(n, m, k.value_or(c.k0), alpha, omega1);
  const Lemma1Check check = verify_lemma1(b, o.r_max, o.points);
  std::printf("n = %d\nomega1 = %s\nm = %s\nalpha = %s\n", n, format_real(omega1).c_str(),
              format_real(m).c_str(), format_real(alpha).c_str());
  std::printf("R0 = %s\nbound3 = %s\nbound4 = %s\nk0 = %s\nk = %s\n", format_real(c.R0).c_str(),
              format_real(c.bound3).c_str(), format_real(c.bound4).c_str(),
              format_real(c.k0).c_str(), format_real(b.k).c_str());
  std::printf("min_residual = %s\npass = %s\n", format_real(check.min_residual).c_str(),
              check.pass ? "true" : "false");
  return 0;
}

struct BoundsOptions {
  std::optional<double> G0;
  std::optional<double> p;
  std::optional<double> mu;
  std::optional<double> q;
  std::optional<double> alpha;
};

int cmd_bounds(const CommonOptions& common, const ConeOptions& cone_opt, const BoundsOptions& o) {
  BoundRow row;
  ModelParams model;
  double G0 = 0.0;
  if (!common.config.empty()) {
    SweepSpec spec = parse_config(common.config);
    model = spec.model(0, 0);
    if (o.p) model.p = *o.p;
    if (o.mu) model.forcing = Exponential{*o.mu};
    if (o.q) model.forcing = Power{*o.q};
    if (o.alpha) spec.barrier.alpha = o.alpha;
    const PointSetup s = prepare_point(spec, model);
    row.n = spec.cone.n;
    row.theta0 = spec.cone.theta0;
    row.omega1 = s.omega1;
    row.m = s.barrier.m;
    row.k = s.barrier.k;
    row.alpha = s.barrier.alpha;
    G0 = o.G0.value_or(s.G0);
  } else {
    if (!o.G0 || !o.p || !o.alpha || (!o.mu && !o.q)) {
      throw Error(ErrorKind::Validation,
                  "without --config, bounds needs --G0, --p, --alpha and --mu or --q");
    }
    model.p = *o.p;
    model.forcing = o.q ? Forcing{Power{*o.q}} : Forcing{Exponential{*o.mu}};
    G0 = *o.G0;
    row.n = cone_opt.n;
    row.theta0 = cone_opt.theta0;
    row.alpha = *o.alpha;
    row.m = 0.0;
  }
  model.validate();
  if (!(G0 > 0.0)) throw Error(ErrorKind::NonpositiveG0, "G0 must be positive");
  const double p = model.p;
  const double alpha = row.alpha;
  row.p = p;
  row.G0 = G0;
  row.forcing = (model.is_exponential() ? "mu=" : "q=") + format_real(model.forcing_value());
  if (model.is_exponential()) {
    const double mu = model.forcing_value();
    if ((p - 1.0) * alpha - mu <= 0.0) {
      row.which_theorem = "thm1";
      row.T_bound = bound_T_thm1(G0, p);
    } else {
      row.which_theorem = "thm2";
      row.T_bound = bound_Tstar_thm2(G0, p, mu, alpha);
    }
  } else {
    row.which_theorem = "thm2bis";
    row.T_bound = bound_Tstar_thm2bis(G0, p, model.forcing_value(), alpha);
  }
  std::printf("G0 = %s\nalpha = %s\n", format_real(G0).c_str(), format_real(alpha).c_str());
  std::printf("bound (%s) = %s\n", row.which_theorem.c_str(),
              row.T_bound ? format_real(*row.T_bound).c_str() : "none (G0 below threshold)");
  if (!common.out.empty()) {
    auto f = open_out(common.out, "bounds.csv");
    write_bound_csv_header(f);
    write_bound_csv_row(f, row);
  }
  return 0;
}

int cmd_simulate(const CommonOptions& common) {
  if (common.config.empty()) throw Error(ErrorKind::Validation, "simulate needs --config");
  const SweepSpec spec = parse_config(common.config);
  const PointSetup s = prepare_point(spec, spec.model(0, 0));
  const RunOutcome out = run(s.u0, s.solver);
  std::printf("regime = %s\n", std::string(to_string(s.regime.tag)).c_str());
  std::printf("G0 = %s\n", format_real(s.G0).c_str());
  std::printf("bound (%s) = %s\n", s.which_theorem.c_str(),
              s.T_bound ? format_real(*s.T_bound).c_str() : "none");
  std::printf("outcome = %s\n", std::string(outcome_name(out.tag)).c_str());
  if (const auto* b = std::get_if<BlewUp>(&out.tag)) {
    std::printf("T_est = %s +- %s\n", format_real(b->T_est).c_str(),
                format_real(b->halfwidth).c_str());
  } else if (const auto* i = std::get_if<Inconclusive>(&out.tag)) {
    std::printf("stopped at t = %s (%s)\n", format_real(i->t_stop).c_str(), i->reason.c_str());
  }
  if (out.trace.size() >= 3) {
    const MonitorCheck mc = monitor_kaplan_inequality(out.trace, s.model);
    std::printf("kaplan monitor: min slack %s, tol %s, %s\n", format_real(mc.min_slack).c_str(),
                format_real(mc.tol).c_str(), mc.pass ? "pass" : "FAIL");
  }
  const fs::path dir = common.out.empty() ? fs::path(".") : fs::path(common.out);
  {
    auto f = open_out(dir, "trace.csv");
    write_run_trace_csv(f, out);
  }
  {
    auto f = open_out(dir, "summary.csv");
    write_run_summary_csv(f, out);
  }
  return 0;
}

int cmd_sweep(const CommonOptions& common) {
  if (common.config.empty()) throw Error(ErrorKind::Validation, "sweep needs --config");
  const SweepSpec spec = parse_config(common.config);
  const std::size_t workers = common.workers > 0 ? common.workers : spec.workers;
  const SweepResult result = run_sweep(spec, workers);
  const fs::path dir = common.out.empty() ? fs::path(".") : fs::path(common.out);
  emit_report(result, dir);
  write_sweep_report(std::cout, result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blow-up laboratory for u_t - Delta u = F(t) u^p on cones of hyperbolic space"};
  app.require_subcommand(1);
  app.fallthrough();
  CommonOptions common;
  app.add_option("--config", common.config, "TOML configuration file");
  app.add_option("--out", common.out, "Output directory");
  app.add_option("--workers", common.workers, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", common.seed, "Seed for randomized checks (recorded, unused by runs)");

  ConeOptions cone;
  const auto add_cone = [&](CLI::App* sub) {
    sub->add_option("--n", cone.n, "Dimension of H^n")->check(CLI::Range(2, 1000));
    sub->add_option("--theta0", cone.theta0, "Cap half-angle in radians (pi = whole space)");
  };

  auto* eig = app.add_subcommand("eig", "First Dirichlet eigenpair of the cap");
  add_cone(eig);
  std::size_t points = 4096;
  eig->add_option("--points", points, "Angular cells");

  auto* lemma = app.add_subcommand("lemma1", "Barrier constants R0, k0 and the residual check");
  add_cone(lemma);
  Lemma1Options lo;
  lemma->add_option("--omega1", lo.omega1, "Eigenvalue (default: solved from the cone)");
  lemma->add_option("--m", lo.m, "Barrier exponent m");
  lemma->add_option("--alpha", lo.alpha, "Kaplan exponent alpha");
  lemma->add_option("--k", lo.k, "Barrier width k (default k0)");
  lemma->add_option("--safety", lo.safety, "Safety factor in (0, 1)");
  lemma->add_option("--r-max", lo.r_max, "Upper end of the residual grid");
  lemma->add_option("--points", lo.points, "Residual grid intervals");

  auto* bounds = app.add_subcommand("bounds", "Blow-up time bounds for a given G(0)");
  add_cone(bounds);
  BoundsOptions bo;
  bounds->add_option("--G0", bo.G0, "G(0) (default: computed from the config's u0)");
  bounds->add_option("--p", bo.p, "Exponent p");
  auto* mu_opt = bounds->add_option("--mu", bo.mu, "Exponential forcing rate");
  bounds->add_option("--q", bo.q, "Power forcing exponent")->excludes(mu_opt);
  bounds->add_option("--alpha", bo.alpha, "Kaplan exponent alpha");

  auto* simulate = app.add_subcommand("simulate", "Single run of the first (p, forcing) point");
  auto* sweep = app.add_subcommand("sweep", "Full (p, forcing) sweep with CSV, SVG and report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  try {
    if (*eig) return cmd_eig(common, cone, points);
    if (*lemma) return cmd_lemma1(common, cone, lo);
    if (*bounds) return cmd_bounds(common, cone, bo);
    if (*simulate) return cmd_simulate(common);
    if (*sweep) return cmd_sweep(common);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return 0;
}
