#pragma once

// Scenario configuration: presets for the weak-coupling 1s-2p, 1s-9p and
// beyond-RWA comparisons, and a versioned JSON file format.
//
// File format (schema "rabi-scenario/1"):
//   {
//     "schema": "rabi-scenario/1",
//     "name": "table1-gamma5",
//     "levels": {"lower": {"n": 1, "l": 0}, "upper": {"n": 2, "l": 1}},
//     "alpha": 0.005,
//     "gamma": {"re": 5.0, "im": 0.0},
//     "atom_init": "excited",              // or "ground"
//     "t_max_2gt": 80.0,                   // horizon, in units of 2 g t
//     "n_times": 4001,
//     "methods": ["jc", "meanfield", "bohmian"],
//     "sampling": {"n_samples": 2500, "n_batches": 5, "seed": 1,
//                  "shared_samples": true},
//     "solver": {"rtol": 1e-13, "atol": 1e-15, "fock_n_max": 0},
//     "derived": {"P": ..., "nu": ..., "g": ..., "mean_photons": ...}
//   }
// Every key except "schema", "levels", "alpha", "gamma" and "t_max_2gt" is
// optional. "derived" is an echo: when present each value must agree with the
// recomputation to 1e-3 relative. Unknown keys are rejected.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rabi/atom_physics.hpp"
#include "rabi/ode.hpp"
#include "rabi/quantum_reference.hpp"

namespace rabi {

inline constexpr std::string_view kScenarioSchema = "rabi-scenario/1";

enum class Method { jc, quantum, meanfield, bohmian };

const char* to_string(Method m);
Method parse_method(std::string_view name);  // throws ValidationError

struct ScenarioParams {
  std::string name;
  QuantumNumbers lower{1, 0, 0};
  QuantumNumbers upper{2, 1, 0};
  double alpha = 0.0;
  double gamma_r = 0.0;
  double gamma_i = 0.0;
  AtomInit atom_init = AtomInit::excited;
  double t_max = 0.0;  // in units of 2 g t
  std::size_t n_times = 1001;
  std::vector<Method> methods{Method::jc, Method::meanfield, Method::bohmian};
  std::size_t n_samples = 2500;
  std::size_t n_batches = 5;
  std::uint64_t seed = 1;
  bool shared_samples = true;  // false: each method draws from its own seed
  double rtol = ode::Tolerances{}.rtol;
  double atol = ode::Tolerances{}.atol;
  int fock_n_max = 0;  // 0: automatic

  // Derived by finalize(); never configured independently.
  LevelPair pair;
  double g = 0.0;
  double mean_photons = 0.0;

  double g_over_nu() const { return g / pair.nu; }
};

bool operator==(const ScenarioParams& a, const ScenarioParams& b);

// alpha P / sqrt(2 nu)
double coupling_g(double alpha, double P, double nu);

// Recomputes the derived block and checks every invariant. Throws
// ValidationError.
void finalize(ScenarioParams& p);

std::vector<std::string> preset_names();
bool is_preset(std::string_view name);
ScenarioParams preset(std::string_view name);  // throws ValidationError

ScenarioParams parse_scenario(std::string_view json_text);
std::string write_scenario(const ScenarioParams& p);

// A readable file path is parsed; otherwise the argument is a preset name.
ScenarioParams load_scenario(const std::string& path_or_preset);

// Output times in atomic units, uniform in 2 g t from 0 to t_max.
std::vector<double> time_grid(const ScenarioParams& p);

}  // namespace rabi
