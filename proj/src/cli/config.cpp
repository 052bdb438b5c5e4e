#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "regret/cli.hpp"

namespace regret::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) { throw ConfigError(field + ": " + what); }

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) fail(path + key, "required");
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

Vec vector_of(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

Mat matrix_of(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) fail(field, "expected an array of rows");
  const std::size_t cols = j[0].size();
  Mat M(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string row = field + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != cols) fail(row, "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) M(i, c) = number(j[i][c], row + "[" + std::to_string(c) + "]");
  }
  return M;
}

// Constraint matrices may have no rows; then "cols" must be implied.
Mat rows_of(const json& j, const std::string& field, int cols) {
  if (j.is_array() && j.empty()) return Mat(0, cols);
  Mat M = matrix_of(j, field);
  if (M.cols() != cols) fail(field, "must have " + std::to_string(cols) + " columns");
  return M;
}

bool is_sequence(const json& j) { return j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array(); }

// A single matrix replicated `count` times, or an explicit list of `count`.
std::vector<Mat> per_step(const json& j, const std::string& field, int count) {
  if (!is_sequence(j)) return std::vector<Mat>(count, matrix_of(j, field));
  if (static_cast<int>(j.size()) != count) fail(field, "expected " + std::to_string(count) + " matrices");
  std::vector<Mat> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(matrix_of(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ScenarioSpec parse_scenario(const json& j, const std::string& path, int r, int T, const ExperimentConfig& cfg) {
  ScenarioSpec s;
  s.name = j.value("name", "");
  if (s.name.empty()) fail(path + "name", "required");
  const std::string kind = need(j, "kind", path).is_string() ? j.at("kind").get<std::string>() : "";
  auto ellipsoid = [&] {
    if (j.contains("P")) return matrix_of(j.at("P"), path + "P");
    if (cfg.disturbance.kind != DisturbanceKind::PointwiseEllipsoid) fail(path + "P", "required without an ellipsoid disturbance");
    return cfg.disturbance.P;
  };
  if (kind == "constant") {
    s.scenario = DisturbanceScenario::constant(vector_of(need(j, "value", path), path + "value"));
    if (s.scenario.value.size() != r) fail(path + "value", "must have r entries");
  } else if (kind == "random_in_ellipsoid" || kind == "boundary_ellipsoid") {
    const Mat P = ellipsoid();
    if (P.rows() != r || P.cols() != r) fail(path + "P", "must be r x r");
    const std::uint64_t seed = j.value("seed", cfg.seed);
    s.scenario = kind == "random_in_ellipsoid" ? DisturbanceScenario::random_in_ellipsoid(P, seed)
                                               : DisturbanceScenario::boundary_ellipsoid(P, seed);
    s.count = j.value("count", 1);
    if (s.count < 1) fail(path + "count", "must be positive");
  } else if (kind == "worst_case_energy") {
    s.scenario.kind = ScenarioKind::WorstCaseEnergy;
  } else if (kind == "custom") {
    Vec w;
    if (j.contains("value"))
      w = vector_of(j.at("value"), path + "value");
    else
      fail(path + "value", "required for custom scenarios");
    if (w.size() != r * T) fail(path + "value", "must have r*T entries");
    s.scenario = DisturbanceScenario::sequence(ScenarioKind::Custom, w);
  } else {
    fail(path + "kind", "unknown scenario kind '" + kind + "'");
  }
  return s;
}

}  // namespace

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::H2: return "h2";
    case Mode::Hinf: return "hinf";
    case Mode::EnergyRegret: return "energy_regret";
    case Mode::PointwiseRegret: return "pointwise_regret";
    case Mode::ConstrainedPointwise: return "constrained_pointwise_regret";
    case Mode::AdversarialX0: return "adversarial_x0";
    case Mode::NonCausal: return "noncausal";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::H2, Mode::Hinf, Mode::EnergyRegret, Mode::PointwiseRegret, Mode::ConstrainedPointwise,
                 Mode::AdversarialX0, Mode::NonCausal})
    if (mode_name(m) == name) return m;
  throw ConfigError("modes: unknown mode '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON (") + e.what() + ")");
  }
  if (!root.is_object()) fail("config", "expected an object");
  ExperimentConfig cfg;
  cfg.fingerprint = [&] {
    std::ostringstream os;
    os << std::hex << fnv1a(root.dump());
    return os.str();
  }();

  const json& sys = need(root, "system", "");
  const json& hz = need(sys, "horizon", "system.");
  if (!hz.is_number_integer() || hz.get<int>() < 0) fail("system.horizon", "expected a nonnegative integer");
  const int T = hz.get<int>();
  LtvSystem& s = cfg.system;
  s.T = T;
  s.A = per_step(need(sys, "A", "system."), "system.A", T);
  s.B = per_step(need(sys, "B", "system."), "system.B", T);
  s.E = per_step(need(sys, "E", "system."), "system.E", T);
  if (T == 0) {
    const Mat A = matrix_of(sys.at("A"), "system.A"), B = matrix_of(sys.at("B"), "system.B"),
              E = matrix_of(sys.at("E"), "system.E");
    s.n = static_cast<int>(A.rows());
    s.m = static_cast<int>(B.cols());
    s.r = static_cast<int>(E.cols());
  } else {
    s.n = static_cast<int>(s.A[0].rows());
    s.m = static_cast<int>(s.B[0].cols());
    s.r = static_cast<int>(s.E[0].cols());
  }
  for (const Mat& Ak : s.A)
    if (Ak.rows() != Ak.cols()) fail("system.A", "expected square matrices");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const int n = s.n, m = s.m, r = s.r;

  const json& costs = need(root, "costs", "");
  cfg.costs.Q = per_step(need(costs, "Q", "costs."), "costs.Q", T + 1);
  cfg.costs.R = per_step(need(costs, "R", "costs."), "costs.R", T + 1);
  try {
    cfg.costs.validate(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const json& dist = need(root, "disturbance", "");
  const std::string kind = need(dist, "kind", "disturbance.").is_string() ? dist.at("kind").get<std::string>() : "";
  if (kind == "energy") {
    cfg.omega = number(need(dist, "omega", "disturbance."), "disturbance.omega");
    if (cfg.omega < 0.0) fail("disturbance.omega", "must be nonnegative");
    cfg.disturbance = DisturbanceModel::energy(cfg.omega);
  } else if (kind == "ellipsoid") {
    const Mat P = matrix_of(need(dist, "P", "disturbance."), "disturbance.P");
    if (P.rows() != r || P.cols() != r) fail("disturbance.P", "must be r x r");
    cfg.disturbance = DisturbanceModel::ellipsoid(P);
    try {
      cfg.omega = derived_omega(cfg.disturbance, T);
    } catch (const std::invalid_argument& e) {
      fail("disturbance.P", "must be symmetric positive definite");
    }
    if (dist.contains("omega")) {
      cfg.omega = number(dist.at("omega"), "disturbance.omega");
      if (cfg.omega < 0.0) fail("disturbance.omega", "must be nonnegative");
    }
  } else {
    fail("disturbance.kind", "expected 'energy' or 'ellipsoid'");
  }

  cfg.x0 = vector_of(need(root, "x0", ""), "x0");
  if (cfg.x0.size() != n) fail("x0", "must have n = " + std::to_string(n) + " entries");

  const json& modes = need(root, "modes", "");
  if (!modes.is_array()) fail("modes", "expected an array of names");
  for (const auto& mj : modes) {
    if (!mj.is_string()) fail("modes", "expected an array of names");
    cfg.modes.push_back(parse_mode(mj.get<std::string>()));
  }
  if (cfg.modes.empty()) fail("modes", "at least one required");

  if (root.contains("constraints")) {
    const json& c = root.at("constraints");
    ConstraintSet cs;
    cs.Hx = c.contains("Hx") ? rows_of(c.at("Hx"), "constraints.Hx", n) : Mat(0, n);
    cs.Hu = c.contains("Hu") ? rows_of(c.at("Hu"), "constraints.Hu", m) : Mat(0, m);
    cfg.constraints = cs;
  }

  cfg.seed = root.value("seed", std::uint64_t{0});
  if (root.contains("scenarios")) {
    const json& sc = root.at("scenarios");
    if (!sc.is_array()) fail("scenarios", "expected an array");
    for (std::size_t i = 0; i < sc.size(); ++i)
      cfg.scenarios.push_back(parse_scenario(sc[i], "scenarios[" + std::to_string(i) + "].", r, T, cfg));
  }

  if (root.contains("solver")) {
    const json& so = root.at("solver");
    if (so.contains("tolerance")) cfg.solver.tolerance = number(so.at("tolerance"), "solver.tolerance");
    if (so.contains("time_limit")) cfg.solver.time_limit_seconds = number(so.at("time_limit"), "solver.time_limit");
    if (so.contains("max_iterations")) cfg.solver.max_iterations = so.at("max_iterations").get<int>();
    if (so.contains("verbose")) cfg.solver.verbose = so.at("verbose").get<bool>();
    if (!(cfg.solver.tolerance > 0.0)) fail("solver.tolerance", "must be positive");
  }

  cfg.output_dir = root.value("output", std::string("out"));
  if (root.contains("reference")) {
    const json& ref = root.at("reference");
    for (auto it = ref.begin(); it != ref.end(); ++it) {
      if (it.key() == "tolerance") {
        cfg.reference_tolerance = number(it.value(), "reference.tolerance");
        continue;
      }
      (void)parse_mode(it.key());
      cfg.reference_costs[it.key()] = number(it.value(), "reference." + it.key());
    }
  }

  for (Mode md : cfg.modes)
    if (md == Mode::ConstrainedPointwise && !cfg.constraints) fail("constraints", "required by constrained_pointwise_regret");
  for (Mode md : cfg.modes)
    if ((md == Mode::PointwiseRegret || md == Mode::ConstrainedPointwise) &&
        cfg.disturbance.kind != DisturbanceKind::PointwiseEllipsoid)
      fail("disturbance.kind", "pointwise modes need an ellipsoid");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void apply_overrides(ExperimentConfig& cfg, const RunOptions& opts) {
  if (opts.out_dir) cfg.output_dir = *opts.out_dir;
  if (opts.tolerance) {
    if (!(*opts.tolerance > 0.0)) fail("--tol", "must be positive");
    cfg.solver.tolerance = *opts.tolerance;
  }
  if (opts.seed) {
    cfg.seed = *opts.seed;
    for (auto& s : cfg.scenarios) s.scenario.seed = *opts.seed;
  }
  if (!opts.modes.empty()) {
    cfg.modes.clear();
    for (const auto& name : opts.modes) cfg.modes.push_back(parse_mode(name));
    for (Mode md : cfg.modes)
      if (md == Mode::ConstrainedPointwise && !cfg.constraints) fail("constraints", "required by constrained_pointwise_regret");
  }
}

}  // namespace regret::cli
