#pragma once

// Method-of-lines solver for u_t = Delta u + F(t) u^p on the truncated cone
// (0, R_max) x cap, with blow-up detection and Kaplan tracing.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conelab/barrier_kaplan.hpp"
#include "conelab/cap_spectrum.hpp"
#include "conelab/grid.hpp"
#include "conelab/hyperbolic_core.hpp"

namespace conelab {

/// Barrier and eigenpair used to record G(t) along a run. The eigenpair must
/// be solved on the solver's angular cells.
struct Monitor {
  BarrierParams barrier;
  EigenPair pair;
};

struct SolverConfig {
  ConeSpec cone;
  ModelParams model;
  double R_max = 15.0;
  std::size_t nr = 400;
  std::size_t nphi = 64;
  double t_end = 10.0;
  double U_max = 1e8;
  double dt_min = 1e-12;
  double dt_initial = 1e-4;
  double rtol = 1e-4;
  double atol = 1e-12;
  double cfl = 0.9;  // fraction of the positivity-preserving step
  std::size_t max_steps = 5'000'000;
  std::optional<double> fixed_dt;  // disables step control when set
  bool pure_heat = false;          // drop the reaction term
  std::optional<Monitor> monitor;

  void validate() const;
};

Grid build_grid(const SolverConfig& config);

/// Conservative finite-volume Laplacian on the cell grid: radial fluxes
/// sinh^{n-1}(r) u_r through the faces, plus 1/sinh^2(r_i) times the cap
/// operator on every ring. Zero flux through r = 0 and phi = 0, odd ghosts
/// (u = 0 on the face) at r = R_max and phi = theta0.
std::vector<double> apply_operator(const Grid& grid, std::span<const double> u);

struct BlewUp {
  double T_est = 0.0;
  double halfwidth = 0.0;
};
struct Survived {
  double t_end = 0.0;
};
struct Inconclusive {
  double t_stop = 0.0;
  std::string reason;
};
using OutcomeTag = std::variant<BlewUp, Survived, Inconclusive>;

std::string_view outcome_name(const OutcomeTag& tag);

struct RunOutcome {
  OutcomeTag tag;
  KaplanTrace trace;  // empty without a monitor
  std::vector<double> times;
  std::vector<double> sup_norm;
  std::size_t clip_count = 0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  StateField final_state;

  bool blew_up() const noexcept { return std::holds_alternative<BlewUp>(tag); }
  bool survived() const noexcept { return std::holds_alternative<Survived>(tag); }
};

struct StepResult {
  StateField state;
  double error = 0.0;  // weighted max norm of the embedded estimate, 1 = tolerance
  std::size_t clipped = 0;
  bool finite = true;
};

/// Strang splitting: half steps of the exact angular propagator
/// exp(tau / sinh^2 r_i * L_cap) around a third-order SSP Runge-Kutta step of
/// the radial diffusion and reaction, with an embedded second-order SSP
/// solution for the error estimate.
class Solver {
 public:
  explicit Solver(SolverConfig config);
  ~Solver();
  Solver(Solver&&) noexcept;
  Solver& operator=(Solver&&) noexcept;

  const Grid& grid() const noexcept;
  const SolverConfig& config() const noexcept;

  /// Largest step for which the radial update is a convex combination of
  /// forward Euler steps that keep u >= 0 and obey the maximum principle.
  double max_stable_dt() const noexcept;

  StepResult step(const StateField& u, double dt);
  RunOutcome run(std::span<const double> u0);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunOutcome run(std::span<const double> u0, const SolverConfig& config);

struct MonitorCheck {
  double min_slack = 0.0;
  double max_rhs = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Checks G'(t) >= e^{(mu - (p-1) alpha) t} G^p (exponential forcing) or
/// G'(t) >= t^q e^{-(p-1) alpha t} G^p (power forcing) at interior trace
/// points, with G' from three-point differences on the nonuniform times.
/// Passes when the smallest slack is at least -0.05 max RHS.
MonitorCheck monitor_kaplan_inequality(const KaplanTrace& trace, const ModelParams& model);

/// Columns t, sup_norm, G (G empty without a monitor).
void write_run_trace_csv(std::ostream& out, const RunOutcome& outcome);
/// Header plus one row: outcome, T_est, T_est_halfwidth, t_stop, reason,
/// clip_count, accepted_steps, rejected_steps, final_sup_norm.
void write_run_summary_csv(std::ostream& out, const RunOutcome& outcome);

}  // namespace conelab
