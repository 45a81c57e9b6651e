#include "rabi/ensemble_stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "rabi/bohmian_dynamics.hpp"
#include "rabi/errors.hpp"
#include "rabi/meanfield_dynamics.hpp"

namespace rabi {

const char* to_string(SemiclassicalMethod m) {
  return m == SemiclassicalMethod::meanfield ? "meanfield" : "bohmian";
}

BatchBand batch_ci(std::span<const double> samples, std::size_t n_times, std::size_t n_batches,
                   std::span<const bool> include) {
  if (n_batches < 2) throw DomainError("batch_ci: need at least 2 batches");
  if (n_times == 0 || samples.size() % n_times != 0) {
    throw DomainError("batch_ci: sample array is not a whole number of rows");
  }
  const std::size_t n_samples = samples.size() / n_times;
  if (n_samples % n_batches != 0) {
    throw DomainError("batch_ci: sample count must be divisible by the batch count");
  }
  if (!include.empty() && include.size() != n_samples) {
    throw DomainError("batch_ci: include mask length differs from sample count");
  }
  const std::size_t batch_size = n_samples / n_batches;

  std::vector<double> batch_means(n_batches * n_times, 0.0);
  std::vector<double> total(n_times, 0.0);
  std::size_t total_count = 0;
  for (std::size_t b = 0; b < n_batches; ++b) {
    std::size_t count = 0;
    double* bm = batch_means.data() + b * n_times;
    for (std::size_t i = b * batch_size; i < (b + 1) * batch_size; ++i) {
      if (!include.empty() && !include[i]) continue;
      ++count;
      const double* row = samples.data() + i * n_times;
      for (std::size_t k = 0; k < n_times; ++k) bm[k] += row[k];
    }
    if (count == 0) throw NumericalError("batch_ci: every sample of a batch is excluded");
    for (std::size_t k = 0; k < n_times; ++k) {
      total[k] += bm[k];
      bm[k] /= static_cast<double>(count);
    }
    total_count += count;
  }

  BatchBand band;
  band.mean.resize(n_times);
  band.ci_low.resize(n_times);
  band.ci_high.resize(n_times);
  const double nb = static_cast<double>(n_batches);
  for (std::size_t k = 0; k < n_times; ++k) {
    double avg = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) avg += batch_means[b * n_times + k];
    avg /= nb;
    double ss = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      const double d = batch_means[b * n_times + k] - avg;
      ss += d * d;
    }
    const double half = 2.0 * std::sqrt(ss / (nb - 1.0)) / std::sqrt(nb);
    const double mean = total[k] / static_cast<double>(total_count);
    band.mean[k] = mean;
    band.ci_low[k] = mean - half;
    band.ci_high[k] = mean + half;
  }
  return band;
}

unsigned default_workers() {
  if (const char* env = std::getenv("RABI_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::pair<std::complex<double>, std::complex<double>> initial_amplitudes(AtomInit atom) {
  if (atom == AtomInit::excited) return {{1.0, 0.0}, {0.0, 0.0}};
  return {{0.0, 0.0}, {1.0, 0.0}};
}

namespace {

struct SampleOutcome {
  std::vector<double> W;
  double norm_drift = 0.0;
  double energy_drift = 0.0;
  bool flagged = false;
  double flag_t = 0.0;
  std::string flag_reason;
  std::optional<TrajectoryDump> dump;
};

SampleOutcome run_sample(const EnsembleConfig& cfg, const PositionSampler* sampler, std::size_t i) {
  auto field_rng = make_stream(cfg.seed, i, StreamPurpose::field);
  const FieldSample field = sample_initial_field(cfg.field, field_rng);
  const auto [cp, cm] = initial_amplitudes(cfg.atom_init);

  SampleOutcome out;
  if (cfg.method == SemiclassicalMethod::meanfield) {
    MeanFieldOptions opts;
    opts.tol = cfg.tol;
    auto traj = evolve_meanfield({cp, cm, field.Q, field.Qdot}, cfg.pair, cfg.alpha, cfg.t_grid, opts);
    out.W = std::move(traj.W);
    out.norm_drift = traj.max_norm_drift;
    out.energy_drift = traj.max_energy_drift;
    return out;
  }

  auto pos_rng = make_stream(cfg.seed, i, StreamPurpose::position);
  BohmianState s0{cp, cm, (*sampler)(pos_rng), field.Q, field.Qdot};
  BohmianOptions opts;
  opts.tol = cfg.tol;
  opts.node_guard = cfg.node_guard;
  const bool dump = i < cfg.dump_samples;
  opts.keep_states = dump;
  auto traj = evolve_bohmian(s0, cfg.pair, cfg.alpha, cfg.t_grid, opts);
  out.norm_drift = traj.max_norm_drift;
  out.flagged = traj.flagged;
  out.flag_t = traj.report.t_reached;
  out.flag_reason = traj.flag_reason;
  if (dump) {
    TrajectoryDump d;
    d.sample = i;
    d.t = traj.t;
    d.W = traj.W;
    for (const auto& s : traj.states) {
      d.X.push_back(s.X);
      d.Q.push_back(s.Q);
    }
    out.dump = std::move(d);
  }
  out.W = std::move(traj.W);
  out.W.resize(cfg.t_grid.size(), 0.0);
  return out;
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleConfig& cfg) {
  if (cfg.n_batches < 2 || cfg.n_samples < cfg.n_batches) {
    throw DomainError("run_ensemble: requires n_samples >= n_batches >= 2");
  }
  if (cfg.n_samples % cfg.n_batches != 0) {
    throw DomainError("run_ensemble: n_samples must be divisible by n_batches");
  }
  if (cfg.t_grid.empty()) throw DomainError("run_ensemble: empty time grid");

  const std::size_t n_times = cfg.t_grid.size();
  std::optional<PositionSampler> sampler;
  if (cfg.method == SemiclassicalMethod::bohmian) {
    sampler.emplace(cfg.atom_init == AtomInit::excited ? cfg.pair.plus : cfg.pair.minus);
  }

  std::vector<double> samples(cfg.n_samples * n_times, 0.0);
  std::vector<SampleOutcome> outcomes(cfg.n_samples);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.n_samples) return;
      try {
        SampleOutcome o = run_sample(cfg, sampler ? &*sampler : nullptr, i);
        std::copy(o.W.begin(), o.W.end(), samples.begin() + static_cast<std::ptrdiff_t>(i * n_times));
        o.W.clear();
        o.W.shrink_to_fit();
        outcomes[i] = std::move(o);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(
      cfg.workers > 0 ? cfg.workers : default_workers(), static_cast<unsigned>(cfg.n_samples)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  EnsembleResult result;
  result.t_grid = cfg.t_grid;
  result.n_samples = cfg.n_samples;
  result.n_batches = cfg.n_batches;
  result.seed = cfg.seed;

  std::vector<char> include_storage(cfg.n_samples, 1);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const SampleOutcome& o = outcomes[i];
    result.max_norm_drift = std::max(result.max_norm_drift, o.norm_drift);
    result.max_energy_drift = std::max(result.max_energy_drift, o.energy_drift);
    if (o.flagged) {
      include_storage[i] = 0;
      ++result.flagged;
      result.flag_records.push_back({i, o.flag_t, o.flag_reason});
    }
    if (o.dump) result.dumps.push_back(*o.dump);
  }
  result.degraded =
      static_cast<double>(result.flagged) > cfg.degraded_fraction * static_cast<double>(cfg.n_samples);

  // std::vector<bool> has no contiguous storage to view as a span.
  std::unique_ptr<bool[]> include(new bool[cfg.n_samples]);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) include[i] = include_storage[i] != 0;
  BatchBand band = batch_ci(samples, n_times, cfg.n_batches,
                            std::span<const bool>(include.get(), cfg.n_samples));
  result.mean_W = std::move(band.mean);
  result.ci_low = std::move(band.ci_low);
  result.ci_high = std::move(band.ci_high);
  if (cfg.keep_samples) result.samples = std::move(samples);
  return result;
}

}  // namespace rabi
