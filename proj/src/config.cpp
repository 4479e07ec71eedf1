#include "liewalk/config.hpp"

#include <json.hpp>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "liewalk/errors.hpp"
#include "liewalk/version.hpp"

namespace liewalk {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown key '" + it.key() + "' in '" + where + "'");
    }
  }
}

Rational parse_entry(const json& v, const std::string& where) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (v.is_number_unsigned()) return Rational(static_cast<unsigned long>(v.get<unsigned long long>()));
  if (v.is_number_float()) return Rational(v.get<double>());
  throw ConfigError("expected a number or rational string in '" + where + "'");
}

double parse_double(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError("expected a number in '" + where + "'");
  return v.get<double>();
}

RatMat parse_generator(const json& v, int matrix_size, int dim,
                       const std::string& where) {
  if (matrix_size == 0) {
    if (!v.is_array() || static_cast<int>(v.size()) != dim) {
      throw ConfigError("generator in '" + where + "' must be a vector of " +
                        std::to_string(dim) + " coordinates");
    }
    RatMat g(dim, 1);
    for (int i = 0; i < dim; ++i) g(i, 0) = parse_entry(v[i], where);
    return g;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != matrix_size) {
    throw ConfigError("generator in '" + where + "' must be a " +
                      std::to_string(matrix_size) + "x" +
                      std::to_string(matrix_size) + " matrix");
  }
  RatMat g(matrix_size, matrix_size);
  for (int i = 0; i < matrix_size; ++i) {
    const json& row = v[i];
    if (!row.is_array() || static_cast<int>(row.size()) != matrix_size) {
      throw ConfigError("generator row in '" + where + "' has wrong length");
    }
    for (int j = 0; j < matrix_size; ++j) g(i, j) = parse_entry(row[j], where);
  }
  return g;
}

json emit_generator(const RatMat& g) {
  json out = json::array();
  if (g.cols() == 1) {
    for (int i = 0; i < g.rows(); ++i)
      out.push_back(rational_to_string(g(i, 0)));
    return out;
  }
  for (int i = 0; i < g.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < g.cols(); ++j)
      row.push_back(rational_to_string(g(i, j)));
    out.push_back(row);
  }
  return out;
}

void check_feasible(const ExperimentConfig& cfg) {
  const LieGroupModel model = config_model(cfg);
  if (cfg.generators.empty()) throw ConfigError("measure needs generators");
  if (cfg.generators.size() != cfg.weights.size()) {
    throw ConfigError("measure needs one weight per generator");
  }
  if (!(cfg.a >= 1.0)) throw ConfigError("kernel needs a >= 1");
  if (cfg.scales.empty()) throw ConfigError("kernel needs a scale schedule");
  for (double r : cfg.scales) {
    if (!(r > 0.0)) throw ConfigError("kernel scales must be positive");
    if (!model.global_chart() && cfg.a * r >= model.chart_radius()) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "kernel support a*r = %.6g must stay below the chart "
                    "radius %.6g of %s",
                    cfg.a * r, model.chart_radius(), model.name().c_str());
      throw ConfigError(buf);
    }
  }
  if (cfg.n_samples == 0) throw ConfigError("mc.n_samples must be positive");
  if (cfg.threads < 1) throw ConfigError("mc.threads must be >= 1");
  for (int p : cfg.entropy.powers) {
    if (p < 0) throw ConfigError("entropy.powers must be nonnegative");
  }
  if (!(cfg.trace.r_lo > 0.0 && cfg.trace.r_lo < cfg.trace.r_hi)) {
    throw ConfigError("trace block needs 0 < r_lo < r_hi");
  }
  if (!(cfg.select.r1 > 0.0 && cfg.select.r1 < cfg.select.r2)) {
    throw ConfigError("select block needs 0 < r1 < r2");
  }
  if (!(cfg.select.A > 1.0)) throw ConfigError("select.A must exceed 1");
  if (cfg.separation.n < 0) throw ConfigError("separation.n must be >= 0");
  if (cfg.walk.kind != "deterministic" && cfg.walk.kind != "renewal") {
    throw ConfigError("walk.kind must be 'deterministic' or 'renewal'");
  }
  if (cfg.walk.cap < 1) throw ConfigError("walk.cap must be >= 1");
  if (!(cfg.walk.epsilon > 0.0)) {
    throw ConfigError("walk.epsilon must be positive");
  }
  if (!(cfg.verify.tolerance > 0.0)) {
    throw ConfigError("verify.tolerance must be positive");
  }
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  RatMat u(2, 2), l(2, 2);
  u(0, 0) = 1; u(0, 1) = 2; u(1, 0) = 0; u(1, 1) = 1;
  l(0, 0) = 1; l(0, 1) = 0; l(1, 0) = 2; l(1, 1) = 1;
  cfg.generators = {u, l};
  cfg.weights = {Rational(1, 2), Rational(1, 2)};
  cfg.scales = {0.01};
  cfg.walk.costs = {Rational(1), Rational(2)};
  for (int t = 2; t <= 12; t += 2) {
    cfg.walk.thresholds.push_back(Rational(t));
    cfg.walk.grid.push_back(cfg.walk.grid.size() + 1);
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  require_keys(root, "config",
               {"model", "measure", "kernel", "mc", "entropy", "trace",
                "select", "separation", "walk", "verify"});

  ExperimentConfig cfg;
  cfg.entropy.powers.clear();
  cfg.walk.costs.clear();
  cfg.walk.thresholds.clear();
  cfg.walk.grid.clear();

  if (!root.contains("model") || !root.contains("measure") ||
      !root.contains("kernel") || !root.contains("mc")) {
    throw ConfigError("config needs model, measure, kernel, and mc blocks");
  }

  const json& model = root["model"];
  require_keys(model, "model", {"name", "dim"});
  if (!model.contains("name") || !model["name"].is_string()) {
    throw ConfigError("model.name must be a string");
  }
  cfg.model_name = model["name"].get<std::string>();
  if (model.contains("dim")) {
    if (cfg.model_name != "abelian") {
      throw ConfigError("model.dim applies to the abelian model only");
    }
    if (!model["dim"].is_number_integer()) {
      throw ConfigError("model.dim must be an integer");
    }
    cfg.model_dim = model["dim"].get<int>();
  }
  const LieGroupModel lg = config_model(cfg);

  const json& measure = root["measure"];
  require_keys(measure, "measure", {"generators", "weights"});
  if (!measure.contains("generators") || !measure["generators"].is_array() ||
      !measure.contains("weights") || !measure["weights"].is_array()) {
    throw ConfigError("measure needs generator and weight arrays");
  }
  for (const json& g : measure["generators"]) {
    cfg.generators.push_back(
        parse_generator(g, lg.matrix_size(), lg.dim(), "measure.generators"));
  }
  for (const json& w : measure["weights"]) {
    cfg.weights.push_back(parse_entry(w, "measure.weights"));
  }

  const json& kernel = root["kernel"];
  require_keys(kernel, "kernel", {"a", "scales"});
  if (kernel.contains("a")) cfg.a = parse_double(kernel["a"], "kernel.a");
  cfg.scales.clear();
  if (!kernel.contains("scales") || !kernel["scales"].is_array()) {
    throw ConfigError("kernel.scales must be an array");
  }
  for (const json& s : kernel["scales"]) {
    cfg.scales.push_back(parse_double(s, "kernel.scales"));
  }

  const json& mc = root["mc"];
  require_keys(mc, "mc", {"n_samples", "seed", "threads"});
  if (mc.contains("n_samples")) {
    if (!mc["n_samples"].is_number_integer() ||
        (!mc["n_samples"].is_number_unsigned() &&
         mc["n_samples"].get<long long>() < 0)) {
      throw ConfigError("mc.n_samples must be a nonnegative integer");
    }
    cfg.n_samples = mc["n_samples"].get<std::size_t>();
  }
  if (mc.contains("seed")) {
    if (!mc["seed"].is_number_integer() ||
        (!mc["seed"].is_number_unsigned() && mc["seed"].get<long long>() < 0)) {
      throw ConfigError("mc.seed must be a nonnegative integer");
    }
    cfg.seed = mc["seed"].get<std::uint64_t>();
  }
  if (mc.contains("threads")) {
    if (!mc["threads"].is_number_integer()) {
      throw ConfigError("mc.threads must be an integer");
    }
    cfg.threads = mc["threads"].get<int>();
  }

  if (root.contains("entropy")) {
    const json& b = root["entropy"];
    require_keys(b, "entropy", {"powers"});
    if (b.contains("powers")) {
      if (!b["powers"].is_array()) {
        throw ConfigError("entropy.powers must be an array");
      }
      for (const json& p : b["powers"]) {
        if (!p.is_number_integer()) {
          throw ConfigError("entropy.powers must hold integers");
        }
        cfg.entropy.powers.push_back(p.get<int>());
      }
    }
  }
  if (cfg.entropy.powers.empty()) cfg.entropy.powers = {1, 2, 3};

  if (root.contains("trace")) {
    const json& b = root["trace"];
    require_keys(b, "trace", {"r_lo", "r_hi", "grid"});
    if (b.contains("r_lo")) cfg.trace.r_lo = parse_double(b["r_lo"], "trace.r_lo");
    if (b.contains("r_hi")) cfg.trace.r_hi = parse_double(b["r_hi"], "trace.r_hi");
    if (b.contains("grid")) {
      if (!b["grid"].is_number_integer()) {
        throw ConfigError("trace.grid must be an integer");
      }
      cfg.trace.grid = b["grid"].get<std::size_t>();
    }
  }

  if (root.contains("select")) {
    const json& b = root["select"];
    require_keys(b, "select",
                 {"r1", "r2", "A", "grid", "required_gap", "trace_constant"});
    if (b.contains("r1")) cfg.select.r1 = parse_double(b["r1"], "select.r1");
    if (b.contains("r2")) cfg.select.r2 = parse_double(b["r2"], "select.r2");
    if (b.contains("A")) cfg.select.A = parse_double(b["A"], "select.A");
    if (b.contains("grid")) {
      if (!b["grid"].is_number_integer()) {
        throw ConfigError("select.grid must be an integer");
      }
      cfg.select.grid = b["grid"].get<std::size_t>();
    }
    if (b.contains("required_gap")) {
      cfg.select.required_gap = parse_double(b["required_gap"], "select.required_gap");
    }
    if (b.contains("trace_constant")) {
      cfg.select.trace_constant =
          parse_double(b["trace_constant"], "select.trace_constant");
    }
  }

  if (root.contains("separation")) {
    const json& b = root["separation"];
    require_keys(b, "separation", {"n"});
    if (b.contains("n")) {
      if (!b["n"].is_number_integer()) {
        throw ConfigError("separation.n must be an integer");
      }
      cfg.separation.n = b["n"].get<int>();
    }
  }

  if (root.contains("walk")) {
    const json& b = root["walk"];
    require_keys(b, "walk",
                 {"kind", "schedule", "costs", "thresholds", "cap", "S",
                  "epsilon", "grid"});
    if (b.contains("kind")) {
      if (!b["kind"].is_string()) throw ConfigError("walk.kind must be a string");
      cfg.walk.kind = b["kind"].get<std::string>();
    }
    if (b.contains("schedule")) {
      if (!b["schedule"].is_array()) {
        throw ConfigError("walk.schedule must be an array");
      }
      for (const json& s : b["schedule"]) {
        if (!s.is_number_integer()) {
          throw ConfigError("walk.schedule must hold integers");
        }
        cfg.walk.schedule.push_back(s.get<int>());
      }
    }
    if (b.contains("costs")) {
      if (!b["costs"].is_array()) throw ConfigError("walk.costs must be an array");
      for (const json& c : b["costs"]) {
        cfg.walk.costs.push_back(parse_entry(c, "walk.costs"));
      }
    }
    if (b.contains("thresholds")) {
      if (!b["thresholds"].is_array()) {
        throw ConfigError("walk.thresholds must be an array");
      }
      for (const json& t : b["thresholds"]) {
        cfg.walk.thresholds.push_back(parse_entry(t, "walk.thresholds"));
      }
    }
    if (b.contains("cap")) {
      if (!b["cap"].is_number_integer()) {
        throw ConfigError("walk.cap must be an integer");
      }
      cfg.walk.cap = b["cap"].get<int>();
    }
    if (b.contains("S")) cfg.walk.S = parse_double(b["S"], "walk.S");
    if (b.contains("epsilon")) {
      cfg.walk.epsilon = parse_double(b["epsilon"], "walk.epsilon");
    }
    if (b.contains("grid")) {
      if (!b["grid"].is_array()) throw ConfigError("walk.grid must be an array");
      for (const json& g : b["grid"]) {
        if (!g.is_number_integer() && !g.is_number_unsigned()) {
          throw ConfigError("walk.grid must hold integers");
        }
        cfg.walk.grid.push_back(g.get<std::size_t>());
      }
    }
  }
  if (cfg.walk.grid.empty()) {
    const std::size_t count = cfg.walk.kind == "deterministic"
                                  ? cfg.walk.schedule.size()
                                  : cfg.walk.thresholds.size();
    for (std::size_t i = 1; i <= count; ++i) cfg.walk.grid.push_back(i);
  }

  if (root.contains("verify")) {
    const json& b = root["verify"];
    require_keys(b, "verify", {"tolerance"});
    if (b.contains("tolerance")) {
      cfg.verify.tolerance = parse_double(b["tolerance"], "verify.tolerance");
    }
  }

  check_feasible(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string emit_config(const ExperimentConfig& cfg) {
  json root;
  root["model"]["name"] = cfg.model_name;
  if (cfg.model_name == "abelian") root["model"]["dim"] = cfg.model_dim;
  json gens = json::array();
  for (const RatMat& g : cfg.generators) gens.push_back(emit_generator(g));
  root["measure"]["generators"] = std::move(gens);
  json weights = json::array();
  for (const Rational& w : cfg.weights) {
    weights.push_back(rational_to_string(w));
  }
  root["measure"]["weights"] = std::move(weights);
  root["kernel"]["a"] = cfg.a;
  root["kernel"]["scales"] = cfg.scales;
  root["mc"]["n_samples"] = cfg.n_samples;
  root["mc"]["seed"] = cfg.seed;
  root["mc"]["threads"] = cfg.threads;
  root["entropy"]["powers"] = cfg.entropy.powers;
  root["trace"]["r_lo"] = cfg.trace.r_lo;
  root["trace"]["r_hi"] = cfg.trace.r_hi;
  root["trace"]["grid"] = cfg.trace.grid;
  root["select"]["r1"] = cfg.select.r1;
  root["select"]["r2"] = cfg.select.r2;
  root["select"]["A"] = cfg.select.A;
  root["select"]["grid"] = cfg.select.grid;
  root["select"]["required_gap"] = cfg.select.required_gap;
  root["select"]["trace_constant"] = cfg.select.trace_constant;
  root["separation"]["n"] = cfg.separation.n;
  root["walk"]["kind"] = cfg.walk.kind;
  root["walk"]["schedule"] = cfg.walk.schedule;
  json costs = json::array();
  for (const Rational& c : cfg.walk.costs) costs.push_back(rational_to_string(c));
  root["walk"]["costs"] = std::move(costs);
  json thresholds = json::array();
  for (const Rational& t : cfg.walk.thresholds) {
    thresholds.push_back(rational_to_string(t));
  }
  root["walk"]["thresholds"] = std::move(thresholds);
  root["walk"]["cap"] = cfg.walk.cap;
  root["walk"]["S"] = cfg.walk.S;
  root["walk"]["epsilon"] = cfg.walk.epsilon;
  root["walk"]["grid"] = cfg.walk.grid;
  root["verify"]["tolerance"] = cfg.verify.tolerance;
  return root.dump(2) + "\n";
}

bool operator==(const ExperimentConfig& x, const ExperimentConfig& y) {
  return emit_config(x) == emit_config(y);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = emit_config(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

LieGroupModel config_model(const ExperimentConfig& cfg) {
  if (cfg.model_name == "abelian") {
    if (cfg.model_dim < 1 || cfg.model_dim > 3) {
      throw ConfigError("model.dim must be 1, 2, or 3 for abelian");
    }
    return LieGroupModel::abelian(cfg.model_dim);
  }
  if (cfg.model_name == "sl2r") return LieGroupModel::sl2r();
  if (cfg.model_name == "so3") return LieGroupModel::so3();
  if (cfg.model_name == "heisenberg3") return LieGroupModel::heisenberg3();
  throw ConfigError("unknown model name '" + cfg.model_name + "'");
}

FinSuppMeasure config_measure(const ExperimentConfig& cfg) {
  const LieGroupModel model = config_model(cfg);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < cfg.generators.size(); ++i) {
    try {
      GroupElement g = model.matrix_size() == 0
                           ? GroupElement::from_vector(model, cfg.generators[i])
                           : GroupElement::from_matrix(model, cfg.generators[i]);
      atoms.push_back({std::move(g), cfg.weights[i]});
    } catch (const Error& e) {
      throw ConfigError("generator " + std::to_string(i) +
                        " rejected: " + e.what());
    }
  }
  try {
    return FinSuppMeasure::from_atoms(atoms);
  } catch (const Error& e) {
    throw ConfigError(std::string("measure rejected: ") + e.what());
  }
}

std::string to_json(const RunManifest& m) {
  json root;
  root["config_hash"] = m.config_hash;
  root["seed"] = m.seed;
  root["version"] = m.version;
  root["wall_clock"] = m.wall_clock;
  root["outputs"] = m.outputs;
  return root.dump(2) + "\n";
}

}  // namespace liewalk
