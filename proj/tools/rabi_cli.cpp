// rabi: run, list and validate Rabi-model scenarios.
//
//   rabi presets [--show NAME]
//   rabi validate (--preset NAME | --scenario FILE)
//   rabi run (--preset NAME | --scenario FILE) [--methods jc,meanfield,...]
//            [--samples N] [--batches B] [--seed S] [--out DIR] [--plot]
//            [--workers W] [--dump-trajectories K]
//
// RABI_WORKERS overrides the worker count when --workers is not given.
// Exit codes: 0 success, 2 validation error, 3 numerical failure,
// 4 degraded statistics.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rabi/errors.hpp"
#include "rabi/runner.hpp"
#include "rabi/scenario.hpp"

namespace {

std::vector<rabi::Method> parse_methods(const std::string& list) {
  std::vector<rabi::Method> out;
  std::istringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(rabi::parse_method(item));
  }
  return out;
}

void echo_derived(const rabi::ScenarioParams& p) {
  std::cout << "scenario   " << (p.name.empty() ? "(unnamed)" : p.name) << '\n'
            << "levels     " << rabi::label(p.lower) << " -> " << rabi::label(p.upper) << '\n'
            << "alpha      " << p.alpha << '\n'
            << "P          " << rabi::format_number(p.pair.P) << '\n'
            << "nu         " << rabi::format_number(p.pair.nu) << '\n'
            << "g          " << rabi::format_number(p.g) << '\n'
            << "g/nu       " << rabi::format_number(p.g_over_nu()) << '\n'
            << "<N>        " << rabi::format_number(p.mean_photons) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rabi model: Jaynes-Cummings, full quantum, mean-field and Bohmian dynamics"};
  app.require_subcommand(1);

  std::string show;
  auto* presets_cmd = app.add_subcommand("presets", "List built-in scenarios");
  presets_cmd->add_option("--show", show, "Print one preset as a scenario file");

  std::string preset_name;
  std::string scenario_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario and echo derived values");
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write tables");
  for (auto* cmd : {validate_cmd, run_cmd}) {
    auto* po = cmd->add_option("--preset", preset_name, "Built-in scenario name");
    auto* so = cmd->add_option("--scenario", scenario_path, "Scenario file (JSON)");
    po->excludes(so);
    so->excludes(po);
  }

  std::string methods;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> batches;
  std::optional<std::uint64_t> seed;
  std::optional<double> t_max;
  rabi::RunOptions run_opts;
  std::string out_dir = "out";
  run_cmd->add_option("--methods", methods, "Comma-separated subset of jc,quantum,meanfield,bohmian");
  run_cmd->add_option("--samples", samples, "Ensemble size");
  run_cmd->add_option("--batches", batches, "Number of batches for the confidence band");
  run_cmd->add_option("--seed", seed, "Master seed");
  run_cmd->add_option("--t-max", t_max, "Horizon in units of 2gt");
  run_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run_cmd->add_flag("--plot", run_opts.plot, "Also render plot.svg from comparison.tsv");
  run_cmd->add_option("--workers", run_opts.workers, "Worker threads (default: RABI_WORKERS or all cores)");
  run_cmd->add_option("--dump-trajectories", run_opts.dump_trajectories,
                      "Write (t, X, Q, W) for the first K Bohmian samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rabi::kExitValidation;
  }

  try {
    if (presets_cmd->parsed()) {
      if (!show.empty()) {
        std::cout << rabi::write_scenario(rabi::preset(show));
      } else {
        for (const auto& name : rabi::preset_names()) {
          const auto p = rabi::preset(name);
          std::cout << name << "\t" << rabi::label(p.lower) << "-" << rabi::label(p.upper)
                    << "\talpha=" << p.alpha << "\t<N>=" << p.mean_photons << "\tg/nu=" << p.g_over_nu()
                    << '\n';
        }
      }
      return rabi::kExitOk;
    }

    if (preset_name.empty() && scenario_path.empty()) {
      std::cerr << "error: one of --preset or --scenario is required\n";
      return rabi::kExitValidation;
    }
    rabi::ScenarioParams p = preset_name.empty() ? rabi::load_scenario(scenario_path)
                                                 : rabi::preset(preset_name);

    if (validate_cmd->parsed()) {
      echo_derived(p);
      return rabi::kExitOk;
    }

    if (!methods.empty()) p.methods = parse_methods(methods);
    if (samples) p.n_samples = *samples;
    if (batches) p.n_batches = *batches;
    if (seed) p.seed = *seed;
    if (t_max) p.t_max = *t_max;
    rabi::finalize(p);
    echo_derived(p);

    run_opts.out_dir = out_dir;
    const rabi::RunOutcome outcome = rabi::run(p, run_opts);
    for (const auto& s : outcome.series) {
      std::cout << rabi::to_string(s.method) << ": " << s.status;
      if (!s.detail.empty()) std::cout << " (" << s.detail << ")";
      std::cout << '\n';
    }
    std::cout << "wrote " << outcome.artifacts.size() << " files to " << out_dir << '\n';
    return outcome.exit_code;
  } catch (const rabi::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return rabi::kExitValidation;
  } catch (const rabi::DomainError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return rabi::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rabi::kExitNumerical;
  }
}
