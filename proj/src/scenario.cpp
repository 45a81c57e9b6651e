#include "rabi/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rabi/errors.hpp"

namespace rabi {
namespace {

using nlohmann::json;

struct PresetSpec {
  const char* name;
  QuantumNumbers upper;
  double alpha;       // used when g_over_nu == 0
  double g_over_nu;   // beyond-RWA presets fix the ratio instead
  double gamma;
  AtomInit atom;
  double t_max;
  std::size_t n_times;
  std::vector<Method> methods;
};

const std::vector<PresetSpec>& preset_table() {
  static const std::vector<PresetSpec> table = [] {
    const QuantumNumbers p2{2, 1, 0};
    const QuantumNumbers p9{9, 1, 0};
    const std::vector<Method> semi{Method::jc, Method::meanfield, Method::bohmian};
    const std::vector<Method> beyond{Method::quantum, Method::meanfield, Method::bohmian};
    return std::vector<PresetSpec>{
        {"table1-gamma0", p2, 0.005, 0.0, 0.0, AtomInit::excited, 20.0, 1001, semi},
        {"table1-gamma1", p2, 0.005, 0.0, 1.0, AtomInit::excited, 40.0, 2001, semi},
        {"table1-gamma2", p2, 0.005, 0.0, 2.0, AtomInit::excited, 40.0, 2001, semi},
        {"table1-gamma3", p2, 0.005, 0.0, 3.0, AtomInit::excited, 50.0, 2501, semi},
        {"table1-gamma5", p2, 0.005, 0.0, 5.0, AtomInit::excited, 80.0, 4001, semi},
        {"table1-gamma10", p2, 0.005, 0.0, 10.0, AtomInit::excited, 140.0, 7001, semi},
        {"table2", p9, 0.1, 0.0, 10.0, AtomInit::excited, 10.0, 1001, semi},
        {"table2-ground", p9, 0.1, 0.0, 10.0, AtomInit::ground, 10.0, 1001, semi},
        {"beyond-rwa-0.02", p2, 0.0, 0.02, std::sqrt(10.0), AtomInit::ground, 20.0, 2001, beyond},
        {"beyond-rwa-0.2", p2, 0.0, 0.2, std::sqrt(10.0), AtomInit::ground, 20.0, 2001, beyond},
        {"beyond-rwa-0.5", p2, 0.0, 0.5, std::sqrt(10.0), AtomInit::ground, 20.0, 2001, beyond},
        {"beyond-rwa-2", p2, 0.0, 2.0, std::sqrt(10.0), AtomInit::ground, 40.0, 4001, beyond},
    };
  }();
  return table;
}

const char* to_string(AtomInit a) { return a == AtomInit::excited ? "excited" : "ground"; }

AtomInit parse_atom_init(const std::string& s) {
  if (s == "excited") return AtomInit::excited;
  if (s == "ground") return AtomInit::ground;
  throw ValidationError("atom_init must be \"excited\" or \"ground\", got \"" + s + "\"");
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ValidationError("unknown key \"" + key + "\" in " + where);
  }
}

QuantumNumbers parse_level(const json& j, const std::string& where) {
  reject_unknown(j, {"n", "l", "m"}, where);
  QuantumNumbers qn;
  qn.n = j.at("n").get<int>();
  qn.l = j.at("l").get<int>();
  qn.m = j.value("m", 0);
  return qn;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-3 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::jc: return "jc";
    case Method::quantum: return "quantum";
    case Method::meanfield: return "meanfield";
    case Method::bohmian: return "bohmian";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "jc") return Method::jc;
  if (name == "quantum") return Method::quantum;
  if (name == "meanfield") return Method::meanfield;
  if (name == "bohmian") return Method::bohmian;
  throw ValidationError("unknown method \"" + std::string(name) +
                        "\" (expected jc, quantum, meanfield or bohmian)");
}

bool operator==(const ScenarioParams& a, const ScenarioParams& b) {
  return a.name == b.name && a.lower == b.lower && a.upper == b.upper && a.alpha == b.alpha &&
         a.gamma_r == b.gamma_r && a.gamma_i == b.gamma_i && a.atom_init == b.atom_init &&
         a.t_max == b.t_max && a.n_times == b.n_times && a.methods == b.methods &&
         a.n_samples == b.n_samples && a.n_batches == b.n_batches && a.seed == b.seed &&
         a.shared_samples == b.shared_samples && a.rtol == b.rtol && a.atol == b.atol &&
         a.fock_n_max == b.fock_n_max && a.g == b.g && a.mean_photons == b.mean_photons &&
         a.pair.P == b.pair.P && a.pair.nu == b.pair.nu;
}

double coupling_g(double alpha, double P, double nu) { return alpha * P / std::sqrt(2.0 * nu); }

void finalize(ScenarioParams& p) {
  try {
    p.pair = make_level_pair(p.lower, p.upper);
  } catch (const DomainError& e) {
    throw ValidationError(e.what());
  }
  p.g = coupling_g(p.alpha, p.pair.P, p.pair.nu);
  p.mean_photons = p.gamma_r * p.gamma_r + p.gamma_i * p.gamma_i;

  if (!std::isfinite(p.alpha)) throw ValidationError("alpha must be finite");
  if (!(p.g != 0.0)) throw ValidationError("coupling g is zero; the 2gt time axis is undefined");
  if (!(p.t_max > 0.0)) throw ValidationError("t_max_2gt must be positive");
  if (p.n_times < 2) throw ValidationError("n_times must be at least 2");
  if (p.methods.empty()) throw ValidationError("at least one method is required");
  if (p.n_batches < 2 || p.n_samples < p.n_batches) {
    throw ValidationError("sampling requires n_samples >= n_batches >= 2");
  }
  if (p.n_samples % p.n_batches != 0) {
    throw ValidationError("n_samples must be divisible by n_batches");
  }
  if (!(p.rtol > 0.0) || !(p.atol > 0.0)) throw ValidationError("solver tolerances must be positive");
  if (p.fock_n_max < 0) throw ValidationError("fock_n_max must be >= 0");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& spec : preset_table()) names.emplace_back(spec.name);
  return names;
}

bool is_preset(std::string_view name) {
  const auto& t = preset_table();
  return std::any_of(t.begin(), t.end(), [&](const PresetSpec& s) { return name == s.name; });
}

ScenarioParams preset(std::string_view name) {
  for (const auto& spec : preset_table()) {
    if (name != spec.name) continue;
    ScenarioParams p;
    p.name = spec.name;
    p.lower = {1, 0, 0};
    p.upper = spec.upper;
    p.gamma_r = spec.gamma;
    p.atom_init = spec.atom;
    p.t_max = spec.t_max;
    p.n_times = spec.n_times;
    p.methods = spec.methods;
    if (spec.g_over_nu > 0.0) {
      const LevelPair pair = make_level_pair(p.lower, p.upper);
      p.alpha = spec.g_over_nu * pair.nu * std::sqrt(2.0 * pair.nu) / pair.P;
    } else {
      p.alpha = spec.alpha;
    }
    finalize(p);
    return p;
  }
  throw ValidationError("unknown preset \"" + std::string(name) + "\"");
}

ScenarioParams parse_scenario(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    reject_unknown(j, {"schema", "name", "levels", "alpha", "gamma", "atom_init", "t_max_2gt",
                       "n_times", "methods", "sampling", "solver", "derived"},
                   "scenario");
    const std::string schema = j.at("schema").get<std::string>();
    if (schema != kScenarioSchema) {
      throw ValidationError("unsupported schema \"" + schema + "\" (expected " +
                            std::string(kScenarioSchema) + ")");
    }
    ScenarioParams p;
    p.name = j.value("name", std::string{});
    const json& levels = j.at("levels");
    reject_unknown(levels, {"lower", "upper"}, "levels");
    p.lower = parse_level(levels.at("lower"), "levels.lower");
    p.upper = parse_level(levels.at("upper"), "levels.upper");
    p.alpha = j.at("alpha").get<double>();
    const json& gamma = j.at("gamma");
    if (gamma.is_number()) {
      p.gamma_r = gamma.get<double>();
    } else {
      reject_unknown(gamma, {"re", "im"}, "gamma");
      p.gamma_r = gamma.value("re", 0.0);
      p.gamma_i = gamma.value("im", 0.0);
    }
    p.atom_init = parse_atom_init(j.value("atom_init", std::string("excited")));
    p.t_max = j.at("t_max_2gt").get<double>();
    p.n_times = j.value("n_times", p.n_times);
    if (j.contains("methods")) {
      p.methods.clear();
      for (const auto& m : j.at("methods")) p.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("sampling")) {
      const json& s = j.at("sampling");
      reject_unknown(s, {"n_samples", "n_batches", "seed", "shared_samples"}, "sampling");
      p.n_samples = s.value("n_samples", p.n_samples);
      p.n_batches = s.value("n_batches", p.n_batches);
      p.seed = s.value("seed", p.seed);
      p.shared_samples = s.value("shared_samples", p.shared_samples);
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      reject_unknown(s, {"rtol", "atol", "fock_n_max"}, "solver");
      p.rtol = s.value("rtol", p.rtol);
      p.atol = s.value("atol", p.atol);
      p.fock_n_max = s.value("fock_n_max", p.fock_n_max);
    }
    finalize(p);

    if (j.contains("derived")) {
      const json& d = j.at("derived");
      reject_unknown(d, {"P", "nu", "g", "mean_photons", "g_over_nu"}, "derived");
      const std::pair<const char*, double> checks[] = {
          {"P", p.pair.P}, {"nu", p.pair.nu}, {"g", p.g},
          {"mean_photons", p.mean_photons}, {"g_over_nu", p.g_over_nu()}};
      for (const auto& [key, value] : checks) {
        if (!d.contains(key)) continue;
        const double given = d.at(key).get<double>();
        if (!close(given, value)) {
          std::ostringstream os;
          os << "derived." << key << " = " << given << " is inconsistent with the recomputed value "
             << value;
          throw ValidationError(os.str());
        }
      }
    }
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed scenario: ") + e.what());
  }
}

std::string write_scenario(const ScenarioParams& p) {
  json j;
  j["schema"] = kScenarioSchema;
  j["name"] = p.name;
  j["levels"] = {{"lower", {{"n", p.lower.n}, {"l", p.lower.l}, {"m", p.lower.m}}},
                 {"upper", {{"n", p.upper.n}, {"l", p.upper.l}, {"m", p.upper.m}}}};
  j["alpha"] = p.alpha;
  j["gamma"] = {{"re", p.gamma_r}, {"im", p.gamma_i}};
  j["atom_init"] = to_string(p.atom_init);
  j["t_max_2gt"] = p.t_max;
  j["n_times"] = p.n_times;
  json methods = json::array();
  for (Method m : p.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["sampling"] = {{"n_samples", p.n_samples}, {"n_batches", p.n_batches}, {"seed", p.seed},
                   {"shared_samples", p.shared_samples}};
  j["solver"] = {{"rtol", p.rtol}, {"atol", p.atol}, {"fock_n_max", p.fock_n_max}};
  j["derived"] = {{"P", p.pair.P}, {"nu", p.pair.nu}, {"g", p.g},
                  {"g_over_nu", p.g_over_nu()}, {"mean_photons", p.mean_photons}};
  return j.dump(2) + "\n";
}

ScenarioParams load_scenario(const std::string& path_or_preset) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(path_or_preset, ec)) {
    std::ifstream in(path_or_preset);
    if (!in) throw ValidationError("cannot read scenario file " + path_or_preset);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
  }
  if (is_preset(path_or_preset)) return preset(path_or_preset);
  throw ValidationError("\"" + path_or_preset + "\" is neither a readable file nor a known preset");
}

std::vector<double> time_grid(const ScenarioParams& p) {
  std::vector<double> t(p.n_times);
  const double last = static_cast<double>(p.n_times - 1);
  for (std::size_t k = 0; k < p.n_times; ++k) {
    t[k] = (p.t_max * static_cast<double>(k) / last) / (2.0 * std::abs(p.g));
  }
  return t;
}

}  // namespace rabi
