#include "krlab/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace krlab {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& item : items) s += (s.empty() ? "" : ", ") + item;
  return s;
}

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& key, const std::string& what) const {
    const int line = node.Mark().is_null() ? 0 : node.Mark().line + 1;
    throw ConfigError(origin_, line, key, what);
  }

  void require_keys(const YAML::Node& map, const std::string& prefix, const std::vector<std::string>& valid) const {
    if (!map.IsMap()) fail(map, prefix, "expected a table");
    for (const auto& kv : map) {
      const std::string key = kv.first.as<std::string>();
      if (std::find(valid.begin(), valid.end(), key) == valid.end())
        fail(kv.first, prefix + key, "unknown key '" + prefix + key + "' (valid keys: " + join(valid) + ")");
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, key, "key '" + key + "' expects a single value");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, key, "key '" + key + "' has a malformed value '" + node.Scalar() + "'");
    }
  }

  template <class T>
  std::vector<T> list(const YAML::Node& node, const std::string& key) const {
    std::vector<T> out;
    if (node.IsScalar()) {
      out.push_back(scalar<T>(node, key));
    } else if (node.IsSequence()) {
      for (const auto& item : node) out.push_back(scalar<T>(item, key));
    } else {
      fail(node, key, "key '" + key + "' expects a value or a list");
    }
    if (out.empty()) fail(node, key, "key '" + key + "' must not be empty");
    return out;
  }

 private:
  std::string origin_;
};

double parse_exponent(const YAML::Node& node, const Reader& r, const std::string& key) {
  if (node.IsScalar() && (node.Scalar() == "inf" || node.Scalar() == ".inf" || node.Scalar() == "infinity"))
    return std::numeric_limits<double>::infinity();
  return r.scalar<double>(node, key);
}

double conjugate(double p) {
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

}  // namespace

ConfigError::ConfigError(const std::string& origin, int line, std::string key, const std::string& what)
    : std::runtime_error(origin + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line),
      key_(std::move(key)) {}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"transport-selftest", "e1-example",       "oscillatory-example",
                                              "prop1-sweep",        "lemma4-suite",     "uniqueness-drive",
                                              "stability-rate",     "pde-convergence"};
  return names;
}

bool is_experiment(const std::string& name) {
  const auto& n = experiment_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

RunConfig default_config(const std::string& experiment) {
  if (!is_experiment(experiment))
    throw ConfigError("<defaults>", 0, "experiment",
                      "unknown experiment '" + experiment + "' (valid: " + join(experiment_names()) + ")");
  RunConfig c;
  c.experiment = experiment;
  c.output = "out/" + experiment;
  if (experiment == "transport-selftest") {
    c.grids = {32, 64, 128};
    c.deltas = {0.1, 0.01, 0.001};
    c.radii = {0.5};
    c.instances = 50;
  } else if (experiment == "e1-example") {
    c.grids = {4096};
    c.deltas = {0.1, 0.01};
    c.radii = {0.5};
    c.field = "e1_step";
  } else if (experiment == "oscillatory-example") {
    c.grids = {1024};
    c.wavenumbers = {1, 4, 16};
    c.field = "oscillatory:1";
  } else if (experiment == "prop1-sweep") {
    c.grids = {256};
    c.deltas = {1e-1, 1e-2, 1e-3, 1e-4};
    c.radii = {0.5};
    c.perturbations = {1e-2, 1e-3, 1e-4};
    c.field = "power_cusp:0.9";
    c.horizon = 0.5;
  } else if (experiment == "lemma4-suite") {
    c.grids = {64};
    c.deltas = {1e-4, 1e-1};
    c.radii = {1.0};
    c.instances = 20;
  } else if (experiment == "uniqueness-drive") {
    c.grids = {128};
    c.deltas = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    c.radii = {0.5};
    c.field = "power_cusp:0.9";
    c.horizon = 0.5;
    c.ode_tolerance = 1e-11;
  } else if (experiment == "stability-rate") {
    c.grids = {256};
    c.perturbations = {1e-2, 1e-3, 1e-4};
    c.field = "oscillatory:1";
    c.max_frames = 16;
  } else if (experiment == "pde-convergence") {
    c.grids = {16, 32, 64};
    c.field = "shear2d";
    c.horizon = 0.5;
  }
  return c;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin, e.mark.line + 1, "", "parse error: " + e.msg);
  }
  const Reader r(origin);
  if (!root.IsMap()) throw ConfigError(origin, 0, "", "config must be a table of keys");
  r.require_keys(root, "",
                 {"experiment", "seed", "jobs", "output", "grid", "apriori_grid", "horizon", "field", "cost",
                  "instances", "exponents", "sweep", "solver"});
  if (!root["experiment"]) throw ConfigError(origin, 0, "experiment", "missing required key 'experiment'");
  const std::string name = r.scalar<std::string>(root["experiment"], "experiment");
  if (!is_experiment(name))
    r.fail(root["experiment"], "experiment",
           "unknown experiment '" + name + "' (valid: " + join(experiment_names()) + ")");

  RunConfig c = default_config(name);
  if (auto n = root["seed"]) c.seed = r.scalar<std::uint64_t>(n, "seed");
  if (auto n = root["jobs"]) c.jobs = r.scalar<int>(n, "jobs");
  if (auto n = root["output"]) c.output = r.scalar<std::string>(n, "output");
  if (auto n = root["grid"]) c.grids = r.list<int>(n, "grid");
  if (auto n = root["apriori_grid"]) c.apriori_grid = r.scalar<int>(n, "apriori_grid");
  if (auto n = root["horizon"]) c.horizon = r.scalar<double>(n, "horizon");
  if (auto n = root["field"]) c.field = r.scalar<std::string>(n, "field");
  if (auto n = root["cost"]) {
    c.cost = r.scalar<std::string>(n, "cost");
    if (c.cost != "bounded_log" && c.cost != "truncated_linear")
      r.fail(n, "cost", "key 'cost' must be bounded_log or truncated_linear");
  }
  if (auto n = root["instances"]) c.instances = r.scalar<int>(n, "instances");
  if (auto n = root["exponents"]) {
    r.require_keys(n, "exponents.", {"p", "q"});
    if (!n["p"]) r.fail(n, "exponents.p", "missing key 'exponents.p'");
    c.p = parse_exponent(n["p"], r, "exponents.p");
    c.q = n["q"] ? parse_exponent(n["q"], r, "exponents.q") : conjugate(c.p);
    const auto inv = [](double x) { return std::isinf(x) ? 0.0 : 1.0 / x; };
    if (!(c.p >= 1.0) || !(c.q >= 1.0) || std::abs(inv(c.p) + inv(c.q) - 1.0) > 1e-12)
      r.fail(n, "exponents", "exponents must satisfy p, q >= 1 and 1/p + 1/q = 1");
  }
  if (auto n = root["sweep"]) {
    r.require_keys(n, "sweep.", {"delta", "radius", "k", "r"});
    if (auto m = n["delta"]) c.deltas = r.list<double>(m, "sweep.delta");
    if (auto m = n["radius"]) c.radii = r.list<double>(m, "sweep.radius");
    if (auto m = n["k"]) c.wavenumbers = r.list<int>(m, "sweep.k");
    if (auto m = n["r"]) c.perturbations = r.list<double>(m, "sweep.r");
  }
  if (auto n = root["solver"]) {
    r.require_keys(n, "solver.", {"cfl", "ode_tolerance", "max_frames"});
    if (auto m = n["cfl"]) c.cfl = r.scalar<double>(m, "solver.cfl");
    if (auto m = n["ode_tolerance"]) c.ode_tolerance = r.scalar<double>(m, "solver.ode_tolerance");
    if (auto m = n["max_frames"]) c.max_frames = r.scalar<int>(m, "solver.max_frames");
  }
  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin, 0, "", e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "", "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

void validate(const RunConfig& c) {
  if (!is_experiment(c.experiment)) throw std::invalid_argument("unknown experiment '" + c.experiment + "'");
  const auto inv = [](double x) { return std::isinf(x) ? 0.0 : 1.0 / x; };
  if (!(c.p >= 1.0) || !(c.q >= 1.0) || std::abs(inv(c.p) + inv(c.q) - 1.0) > 1e-12)
    throw std::invalid_argument("exponents must satisfy 1/p + 1/q = 1");
  if (c.grids.empty()) throw std::invalid_argument("grid list must not be empty");
  for (int n : c.grids)
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("grid sizes must be powers of two >= 2");
  if (c.apriori_grid < 2 || (c.apriori_grid & (c.apriori_grid - 1)) != 0)
    throw std::invalid_argument("apriori_grid must be a power of two >= 2");
  auto positive = [](const std::vector<double>& v, const char* what) {
    for (double x : v)
      if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(what) + " values must be positive");
  };
  positive(c.deltas, "sweep.delta");
  positive(c.radii, "sweep.radius");
  positive(c.perturbations, "sweep.r");
  for (int k : c.wavenumbers)
    if (k < 1) throw std::invalid_argument("sweep.k values must be >= 1");
  if (!(c.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!(c.cfl > 0.0) || c.cfl > 1.0) throw std::invalid_argument("solver.cfl must lie in (0, 1]");
  if (!(c.ode_tolerance > 0.0)) throw std::invalid_argument("solver.ode_tolerance must be positive");
  if (c.max_frames < 1) throw std::invalid_argument("solver.max_frames must be >= 1");
  if (c.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (c.instances < 0) throw std::invalid_argument("instances must be >= 0");
}

}  // namespace krlab
