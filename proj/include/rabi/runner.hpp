#pragma once

// Executes a scenario and writes its tabular artifacts.
//
// Every table is tab-separated with a header row. Per-method files hold
//   t  two_g_t  W_mean  W_ci_low  W_ci_high
// and comparison.tsv repeats the last three columns for each method, suffixed
// with the method name. Deterministic methods (jc, quantum) leave the CI
// columns empty. Numbers use %.14e so reruns diff cleanly.

#include <filesystem>
#include <string>
#include <vector>

#include "rabi/scenario.hpp"

namespace rabi {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitNumerical = 3,
  kExitDegraded = 4,
};

struct RunOptions {
  std::filesystem::path out_dir = "out";
  bool plot = false;
  unsigned workers = 0;             // 0: RABI_WORKERS or hardware concurrency
  std::size_t dump_trajectories = 0;  // Bohmian paths to write per run
};

struct MethodSeries {
  Method method = Method::jc;
  std::vector<double> W;
  std::vector<double> ci_low;   // empty for deterministic methods
  std::vector<double> ci_high;
  std::string status;           // ok | degraded | failed
  std::string detail;
  std::size_t flagged = 0;
  double max_norm_drift = 0.0;
  double max_energy_drift = 0.0;
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<double> t;
  std::vector<double> two_g_t;
  std::vector<MethodSeries> series;
  std::vector<std::filesystem::path> artifacts;
};

// Seed used for a method: the master seed when samples are shared, otherwise
// a per-method derivation of it.
std::uint64_t method_seed(const ScenarioParams& p, Method m);

// Computes every requested method, then writes per-method tables,
// comparison.tsv, manifest.json and (optionally) plot.svg into out_dir.
// Failed methods are recorded in the manifest; the others are still written.
RunOutcome run(const ScenarioParams& p, const RunOptions& opts);

std::string format_number(double v);

// Renders plot.svg from a comparison table; the table is the only input.
void render_plot(const std::filesystem::path& comparison_tsv, const std::filesystem::path& svg_out,
                 const std::string& title);

}  // namespace rabi
