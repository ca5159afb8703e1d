#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "conelab/barrier_kaplan.hpp"
#include "conelab/cap_spectrum.hpp"
#include "conelab/error.hpp"
#include "conelab/experiments.hpp"
#include "conelab/hyperbolic_core.hpp"

namespace py = pybind11;
using namespace conelab;

namespace {

py::dict row_to_dict(const SweepRow& row) {
  py::dict d;
  d["n"] = row.n;
  d["theta0"] = row.theta0;
  d["omega1"] = row.omega1;
  d["p"] = row.p;
  d["forcing_kind"] = row.forcing_kind;
  d["forcing_value"] = row.forcing_value;
  d["regime_predicted"] = std::string(to_string(row.regime));
  d["outcome"] = row.outcome;
  d["reason"] = row.reason;
  d["T_est"] = row.T_est;
  d["T_est_halfwidth"] = row.T_est_halfwidth;
  d["T_bound"] = row.T_bound;
  d["which_theorem"] = row.which_theorem;
  d["G0"] = row.G0;
  d["largeness_holds"] = row.largeness_holds;
  d["clip_count"] = row.clip_count;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Semilinear heat equations on cones of hyperbolic space";

  static py::exception<Error> error(m, "ConelabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("lambda1", &lambda1, py::arg("n"));
  m.def(
      "classify_regime",
      [](int n, double p, std::optional<double> mu, std::optional<double> q) {
        ModelParams model{p, q ? Forcing{Power{*q}} : Forcing{Exponential{mu.value_or(0.0)}}};
        model.validate();
        const Regime r = classify_regime(model, n);
        return py::make_tuple(std::string(to_string(r.tag)), r.threshold);
      },
      py::arg("n"), py::arg("p"), py::arg("mu") = py::none(), py::arg("q") = py::none(),
      "Returns (tag, threshold) for exponential (mu) or power (q) forcing.");

  m.def(
      "cap_eigenpair",
      [](int n, double theta0, std::size_t points) {
        const EigenPair pair = solve_cap_eigenpair(make_cone(n, theta0), points);
        std::vector<double> phi(pair.size());
        for (std::size_t j = 0; j < phi.size(); ++j) phi[j] = pair.phi(j);
        return py::make_tuple(pair.omega1, phi, pair.psi1);
      },
      py::arg("n"), py::arg("theta0"), py::arg("points") = 4096,
      "Returns (omega1, phi, psi1) on cell centers.");

  m.def("find_R0", &find_R0, py::arg("alpha"), py::arg("n"));
  m.def("find_k0", &find_k0, py::arg("n"), py::arg("m"), py::arg("alpha"), py::arg("omega1"),
        py::arg("safety") = 0.9);
  m.def(
      "lemma1_min_residual",
      [](int n, double m, double k, double alpha, double omega1, double r_max,
         std::size_t points) {
        return verify_lemma1(make_barrier(n, m, k, alpha, omega1), r_max, points).min_residual;
      },
      py::arg("n"), py::arg("m"), py::arg("k"), py::arg("alpha"), py::arg("omega1"),
      py::arg("r_max") = 50.0, py::arg("points") = 2000);
  m.def("normalize_barrier", &normalize_barrier, py::arg("m"), py::arg("k"), py::arg("n"));

  m.def("bound_T_thm1", &bound_T_thm1, py::arg("G0"), py::arg("p"));
  m.def("bound_Tstar_thm2", &bound_Tstar_thm2, py::arg("G0"), py::arg("p"), py::arg("mu"),
        py::arg("alpha"));
  m.def("bound_Tstar_thm2bis", &bound_Tstar_thm2bis, py::arg("G0"), py::arg("p"), py::arg("q"),
        py::arg("alpha"));
  m.def("ode_lower_bound", &ode_lower_bound, py::arg("t"), py::arg("G0"), py::arg("p"),
        py::arg("mu"), py::arg("alpha"));
  m.def("H_integral", &H_integral, py::arg("t"), py::arg("q"), py::arg("p"), py::arg("alpha"));

  m.def(
      "run_sweep",
      [](const std::string& config_text, std::optional<std::size_t> workers) {
        const SweepSpec spec = parse_config_string(config_text, "config");
        SweepResult result;
        {
          py::gil_scoped_release release;
          result = run_sweep(spec, workers.value_or(spec.workers));
        }
        py::list rows;
        for (const auto& row : result.rows) rows.append(row_to_dict(row));
        std::ostringstream csv, svg;
        write_sweep_csv(csv, result);
        write_phase_svg(svg, result);
        py::dict out;
        out["rows"] = rows;
        out["csv"] = csv.str();
        out["svg"] = svg.str();
        return out;
      },
      py::arg("config"), py::arg("workers") = py::none(),
      "Runs a sweep from TOML text; returns rows, CSV text and SVG text.");
}
