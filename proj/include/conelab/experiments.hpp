#pragma once

// Sweep configuration, the (p, forcing) sweep driver and its reports.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conelab/barrier_kaplan.hpp"
#include "conelab/cap_spectrum.hpp"
#include "conelab/hyperbolic_core.hpp"
#include "conelab/pde_solver.hpp"

namespace conelab {

/// u0 = A psi1(phi) C r^m e^{-k r^2}.
struct BarrierShaped {
  double A = 1.0;
};
/// u0 = A exp(-((r - r_c)/w)^2) psi1(phi) / max psi1.
struct Bump {
  double A = 1.0;
  double r_c = 2.0;
  double w = 1.0;
};
/// u0 = A.
struct Constant {
  double A = 1.0;
};
using InitialData = std::variant<BarrierShaped, Bump, Constant>;

double amplitude(const InitialData& data);
InitialData with_amplitude(InitialData data, double A);
std::string_view family_name(const InitialData& data);

/// Unset fields take the defaults: m from default_barrier_m(omega1),
/// alpha = mu/(p-1) when blow-up is unconditional and lambda1 + 1 otherwise,
/// k = find_k0(n, m, alpha, omega1, safety).
struct BarrierPolicy {
  std::optional<double> m;
  std::optional<double> k;
  std::optional<double> alpha;
  double safety = 0.9;
  std::size_t eig_points = 4096;
};

struct SweepSpec {
  ConeSpec cone;
  std::vector<double> p_values;
  bool exponential = true;
  std::vector<double> forcing_values;  // mu or q values
  InitialData u0 = BarrierShaped{};
  SolverConfig solver;  // cone, model and monitor are filled per point
  BarrierPolicy barrier;
  std::size_t workers = 1;

  void validate() const;
  ModelParams model(std::size_t p_index, std::size_t forcing_index) const;
};

/// Reads a TOML document with tables [cone], [model], [solver], [barrier],
/// [sweep] and [u0]. Unknown tables or keys are validation errors; syntax
/// errors are parse errors carrying the line number.
SweepSpec parse_config(const std::filesystem::path& path);
SweepSpec parse_config_string(std::string_view text, std::string_view source = "config");

/// Applies the barrier policy of `spec` for `model` given omega1.
BarrierParams resolve_barrier(const SweepSpec& spec, const ModelParams& model, double omega1);

/// Everything one sweep point needs before the PDE run.
struct PointSetup {
  ModelParams model;
  Regime regime;
  double omega1 = 0.0;       // from the fine eigen-solve
  EigenPair grid_pair;       // on the solver's angular cells
  BarrierParams barrier;
  SolverConfig solver;
  std::vector<double> u0;
  double G0 = 0.0;
  std::optional<double> T_bound;
  std::string which_theorem;  // "thm1", "thm2" or "thm2bis"
  std::optional<bool> largeness_holds;
};

/// Resolves the barrier policy, builds u0 and evaluates G(0) and the bound
/// that applies to `model`. `fine` supplies omega1, `grid_pair` psi1.
PointSetup prepare_point(const SweepSpec& spec, const ModelParams& model, const EigenPair& fine,
                         const EigenPair& grid_pair);

/// Convenience overload that solves both eigenproblems.
PointSetup prepare_point(const SweepSpec& spec, const ModelParams& model);

std::vector<double> make_initial_data(const Grid& grid, const InitialData& data,
                                      const EigenPair& grid_pair, const BarrierParams& barrier);

struct SweepRow {
  int n = 2;
  double theta0 = 0.0;
  double omega1 = 0.0;
  double p = 2.0;
  std::string forcing_kind;
  double forcing_value = 0.0;
  RegimeTag regime = RegimeTag::Conditional;
  std::string outcome;
  std::string reason;  // Inconclusive only
  std::optional<double> T_est;
  std::optional<double> T_est_halfwidth;
  std::optional<double> T_bound;
  std::string which_theorem;
  double G0 = 0.0;
  std::optional<bool> largeness_holds;
  std::size_t clip_count = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Rows come out in (p index, forcing index) order whatever the worker count.
SweepResult run_sweep(const SweepSpec& spec);
SweepResult run_sweep(const SweepSpec& spec, std::size_t workers);

void write_sweep_csv(std::ostream& out, const SweepResult& result);
/// Scatter of (p, forcing value) colored by outcome; for exponential forcing
/// the line mu = (p-1) lambda1 is drawn over it.
void write_phase_svg(std::ostream& out, const SweepResult& result);
void write_sweep_report(std::ostream& out, const SweepResult& result);

/// Writes sweep.csv, phase.svg and report.txt into `dir`.
void emit_report(const SweepResult& result, const std::filesystem::path& dir);

extern const std::string_view kSurvivedFooter;

}  // namespace conelab
