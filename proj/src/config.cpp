#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <toml.hpp>

#include "conelab/error.hpp"
#include "conelab/experiments.hpp"

namespace conelab {

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::Validation, key + ": " + what);
}

void check_keys(const toml::table& table, const std::string& name,
                const std::set<std::string, std::less<>>& allowed) {
  for (const auto& [key, node] : table) {
    if (!allowed.contains(key.str())) {
      invalid(name.empty() ? std::string(key.str()) : name + "." + std::string(key.str()),
              "unknown key");
    }
  }
}

const toml::table* section(const toml::table& root, std::string_view name) {
  const toml::node* node = root.get(name);
  if (!node) return nullptr;
  if (!node->is_table()) invalid(std::string(name), "must be a table");
  return node->as_table();
}

std::optional<double> get_real(const toml::table* t, std::string_view table, std::string_view key) {
  if (!t) return std::nullopt;
  const toml::node* node = t->get(key);
  if (!node) return std::nullopt;
  if (auto v = node->value<double>()) return *v;
  invalid(std::string(table) + "." + std::string(key), "must be a number");
}

std::optional<std::int64_t> get_int(const toml::table* t, std::string_view table,
                                    std::string_view key) {
  if (!t) return std::nullopt;
  const toml::node* node = t->get(key);
  if (!node) return std::nullopt;
  if (node->is_integer()) return node->as_integer()->get();
  invalid(std::string(table) + "." + std::string(key), "must be an integer");
}

std::size_t get_count(const toml::table* t, std::string_view table, std::string_view key,
                      std::size_t fallback) {
  const auto v = get_int(t, table, key);
  if (!v) return fallback;
  if (*v < 0) invalid(std::string(table) + "." + std::string(key), "must be nonnegative");
  return static_cast<std::size_t>(*v);
}

// A number or an array of numbers.
std::optional<std::vector<double>> get_list(const toml::table* t, std::string_view table,
                                            std::string_view key) {
  if (!t) return std::nullopt;
  const toml::node* node = t->get(key);
  if (!node) return std::nullopt;
  const std::string name = std::string(table) + "." + std::string(key);
  if (auto v = node->value<double>()) return std::vector<double>{*v};
  const toml::array* arr = node->as_array();
  if (!arr) invalid(name, "must be a number or an array of numbers");
  std::vector<double> out;
  for (const auto& item : *arr) {
    auto v = item.value<double>();
    if (!v) invalid(name, "must contain only numbers");
    out.push_back(*v);
  }
  if (out.empty()) invalid(name, "must not be empty");
  return out;
}

}  // namespace

double amplitude(const InitialData& data) {
  return std::visit([](const auto& d) { return d.A; }, data);
}

InitialData with_amplitude(InitialData data, double A) {
  std::visit([A](auto& d) { d.A = A; }, data);
  return data;
}

std::string_view family_name(const InitialData& data) {
  switch (data.index()) {
    case 0: return "barrier";
    case 1: return "bump";
    default: return "constant";
  }
}

void SweepSpec::validate() const {
  cone.validate();
  if (p_values.empty()) invalid("model.p", "needs at least one value");
  if (forcing_values.empty()) invalid(exponential ? "model.mu" : "model.q", "needs at least one value");
  for (double p : p_values) {
    if (!(p > 1.0)) invalid("model.p", "p must exceed 1");
  }
  for (double v : forcing_values) {
    if (!std::isfinite(v)) invalid(exponential ? "model.mu" : "model.q", "must be finite");
    if (!exponential && !(v > -1.0)) invalid("model.q", "q must exceed -1");
  }
  const double A = amplitude(u0);
  if (!(A >= 0.0) || !std::isfinite(A)) invalid("u0.A", "must be finite and nonnegative");
  if (const auto* b = std::get_if<Bump>(&u0); b && !(b->w > 0.0)) invalid("u0.w", "must be positive");
  if (barrier.m && !(*barrier.m >= 2.0)) invalid("barrier.m", "must be at least 2");
  if (barrier.k && !(*barrier.k > 0.0)) invalid("barrier.k", "must be positive");
  if (barrier.alpha && !(*barrier.alpha > lambda1(cone.n))) {
    invalid("barrier.alpha", "must exceed lambda1 = (n-1)^2/4");
  }
  if (!(barrier.safety > 0.0 && barrier.safety < 1.0)) invalid("barrier.safety", "must lie in (0, 1)");
  if (barrier.eig_points < 64) invalid("barrier.eig_points", "must be at least 64");
  if (workers == 0) invalid("sweep.workers", "must be at least 1");
  SolverConfig probe = solver;
  probe.cone = cone;
  probe.model = model(0, 0);
  try {
    probe.validate();
  } catch (const Error& e) {
    invalid("solver", e.what());
  }
}

ModelParams SweepSpec::model(std::size_t p_index, std::size_t forcing_index) const {
  ModelParams m;
  m.p = p_values.at(p_index);
  const double v = forcing_values.at(forcing_index);
  if (exponential) {
    m.forcing = Exponential{v};
  } else {
    m.forcing = Power{v};
  }
  return m;
}

SweepSpec parse_config_string(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ": " << e.description();
    throw Error(ErrorKind::Parse, msg.str());
  }
  check_keys(root, "", {"cone", "model", "solver", "barrier", "sweep", "u0"});

  const toml::table* cone = section(root, "cone");
  const toml::table* model = section(root, "model");
  const toml::table* solver = section(root, "solver");
  const toml::table* barrier = section(root, "barrier");
  const toml::table* sweep = section(root, "sweep");
  const toml::table* u0 = section(root, "u0");
  if (cone) check_keys(*cone, "cone", {"n", "theta0"});
  if (model) check_keys(*model, "model", {"p", "mu", "q"});
  if (solver) {
    check_keys(*solver, "solver",
               {"R_max", "Nr", "Nphi", "t_end", "U_max", "dt_min", "dt_initial", "rtol", "atol",
                "cfl", "max_steps"});
  }
  if (barrier) check_keys(*barrier, "barrier", {"m", "k", "alpha", "safety", "eig_points"});
  if (sweep) check_keys(*sweep, "sweep", {"workers"});
  if (u0) check_keys(*u0, "u0", {"family", "A", "r_c", "w"});

  SweepSpec spec;
  const auto n = get_int(cone, "cone", "n");
  if (!n) invalid("cone.n", "is required");
  if (*n < 2) invalid("cone.n", "n must be at least 2");
  const double theta0 = get_real(cone, "cone", "theta0").value_or(std::numbers::pi);
  if (!(theta0 > 0.0) || theta0 > std::numbers::pi + 1e-6) {
    invalid("cone.theta0", "theta0 must lie in (0, pi]");
  }
  spec.cone = make_cone(static_cast<int>(*n), theta0);

  auto p = get_list(model, "model", "p");
  if (!p) invalid("model.p", "is required");
  spec.p_values = *p;
  auto mu = get_list(model, "model", "mu");
  auto q = get_list(model, "model", "q");
  if (mu && q) invalid("model", "give either mu or q, not both");
  if (!mu && !q) invalid("model.mu", "either mu or q is required");
  spec.exponential = mu.has_value();
  spec.forcing_values = mu ? *mu : *q;

  SolverConfig& s = spec.solver;
  s.R_max = get_real(solver, "solver", "R_max").value_or(s.R_max);
  s.nr = get_count(solver, "solver", "Nr", s.nr);
  s.nphi = get_count(solver, "solver", "Nphi", s.nphi);
  s.t_end = get_real(solver, "solver", "t_end").value_or(s.t_end);
  s.U_max = get_real(solver, "solver", "U_max").value_or(s.U_max);
  s.dt_min = get_real(solver, "solver", "dt_min").value_or(s.dt_min);
  s.dt_initial = get_real(solver, "solver", "dt_initial").value_or(s.dt_initial);
  s.rtol = get_real(solver, "solver", "rtol").value_or(s.rtol);
  s.atol = get_real(solver, "solver", "atol").value_or(s.atol);
  s.cfl = get_real(solver, "solver", "cfl").value_or(s.cfl);
  s.max_steps = get_count(solver, "solver", "max_steps", s.max_steps);

  BarrierPolicy& b = spec.barrier;
  b.m = get_real(barrier, "barrier", "m");
  b.k = get_real(barrier, "barrier", "k");
  b.alpha = get_real(barrier, "barrier", "alpha");
  b.safety = get_real(barrier, "barrier", "safety").value_or(b.safety);
  b.eig_points = get_count(barrier, "barrier", "eig_points", b.eig_points);

  spec.workers = get_count(sweep, "sweep", "workers", spec.workers);

  std::string family = "barrier";
  if (u0) {
    if (const toml::node* node = u0->get("family")) {
      auto v = node->value<std::string>();
      if (!v) invalid("u0.family", "must be a string");
      family = *v;
    }
  }
  const double A = get_real(u0, "u0", "A").value_or(1.0);
  if (family == "barrier") {
    if (u0 && (u0->contains("r_c") || u0->contains("w"))) {
      invalid("u0", "r_c and w apply only to the bump family");
    }
    spec.u0 = BarrierShaped{A};
  } else if (family == "bump") {
    Bump bump;
    bump.A = A;
    bump.r_c = get_real(u0, "u0", "r_c").value_or(bump.r_c);
    bump.w = get_real(u0, "u0", "w").value_or(bump.w);
    spec.u0 = bump;
  } else if (family == "constant") {
    if (u0 && (u0->contains("r_c") || u0->contains("w"))) {
      invalid("u0", "r_c and w apply only to the bump family");
    }
    spec.u0 = Constant{A};
  } else {
    invalid("u0.family", "must be one of barrier, bump, constant");
  }

  spec.validate();
  return spec;
}

SweepSpec parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_string(text.str(), path.string());
}

}  // namespace conelab
