#pragma once

// Monte Carlo ensembles of semi-classical trajectories and batch-means
// confidence bands for the averaged population inversion.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rabi/atom_physics.hpp"
#include "rabi/bohmian_dynamics.hpp"
#include "rabi/field_sampling.hpp"
#include "rabi/ode.hpp"
#include "rabi/quantum_reference.hpp"

namespace rabi {

enum class SemiclassicalMethod { meanfield, bohmian };

const char* to_string(SemiclassicalMethod m);

struct BatchBand {
  std::vector<double> mean;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
};

// `samples` is sample-major (n_samples rows of n_times). Batches are
// contiguous runs of n_samples / n_batches rows. The band is
// mean +- 2 sd(batch means) / sqrt(n_batches). Rows with include[i] == false
// are dropped from their batch; an empty `include` keeps every row.
BatchBand batch_ci(std::span<const double> samples, std::size_t n_times, std::size_t n_batches,
                   std::span<const bool> include = {});

struct FlagRecord {
  std::size_t sample = 0;
  double t = 0.0;
  std::string reason;
};

// Per-sample Bohmian path on the output grid, kept for the first few samples
// when EnsembleConfig::dump_samples > 0.
struct TrajectoryDump {
  std::size_t sample = 0;
  std::vector<double> t;
  std::vector<Vec3> X;
  std::vector<double> Q;
  std::vector<double> W;
};

struct EnsembleConfig {
  LevelPair pair;
  double alpha = 0.0;
  CoherentParams field;
  AtomInit atom_init = AtomInit::excited;
  std::vector<double> t_grid;
  SemiclassicalMethod method = SemiclassicalMethod::meanfield;
  std::size_t n_samples = 2500;
  std::size_t n_batches = 5;
  std::uint64_t seed = 1;
  ode::Tolerances tol{};
  unsigned workers = 0;              // 0: RABI_WORKERS or hardware concurrency
  double degraded_fraction = 0.01;   // flagged share above which the run is degraded
  double node_guard = kNodeGuard;    // Bohmian only
  std::size_t dump_samples = 0;
  bool keep_samples = false;
};

struct EnsembleResult {
  std::vector<double> t_grid;
  std::vector<double> mean_W;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::size_t n_samples = 0;
  std::size_t n_batches = 0;
  std::size_t flagged = 0;
  std::uint64_t seed = 0;
  bool degraded = false;
  double max_norm_drift = 0.0;
  double max_energy_drift = 0.0;  // mean-field only
  std::vector<FlagRecord> flag_records;
  std::vector<TrajectoryDump> dumps;
  std::vector<double> samples;  // sample-major W, when keep_samples
};

// Worker count from RABI_WORKERS, else std::thread::hardware_concurrency().
unsigned default_workers();

// Initial atom amplitudes for the chosen start level.
std::pair<std::complex<double>, std::complex<double>> initial_amplitudes(AtomInit atom);

// Draws initial conditions per sample from streams keyed by (seed, sample),
// integrates every trajectory, and reduces in sample order, so the result is
// independent of the worker count. Throws NumericalError if any trajectory
// fails outside the node guard.
EnsembleResult run_ensemble(const EnsembleConfig& cfg);

}  // namespace rabi
