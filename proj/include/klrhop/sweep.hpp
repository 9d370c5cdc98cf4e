#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "klrhop/landscape.hpp"
#include "klrhop/spectral.hpp"

namespace klrhop {

/// Environment variable holding the sweep worker count.
inline constexpr const char* kWorkersEnv = "KLRHOP_WORKERS";

struct GridSpec {
  std::vector<double> gamma_values;
  std::vector<double> load_values;
  Index n_neurons = 100;
  std::uint64_t base_seed = 0;
  TrainConfig train_config;
  long trials_per_cell = 1;

  [[nodiscard]] Index patterns_for(double load) const {
    return static_cast<Index>(std::llround(load * static_cast<double>(n_neurons)));
  }

  void validate() const {
    if (n_neurons < 1) throw ParameterError("grid n_neurons must be >= 1");
    if (trials_per_cell < 1) throw ParameterError("trials_per_cell must be >= 1");
    if (gamma_values.empty() || load_values.empty()) throw ParameterError("grid axes must be non-empty");
    for (std::size_t k = 0; k < gamma_values.size(); ++k) {
      if (!(gamma_values[k] > 0.0) || !std::isfinite(gamma_values[k])) throw ParameterError("grid gamma values must be > 0");
      if (k > 0 && !(gamma_values[k] > gamma_values[k - 1])) throw ParameterError("grid gamma values must be increasing");
    }
    for (std::size_t k = 0; k < load_values.size(); ++k) {
      if (!(load_values[k] > 0.0) || !std::isfinite(load_values[k])) throw ParameterError("grid loads must be > 0");
      if (k > 0 && !(load_values[k] > load_values[k - 1])) throw ParameterError("grid loads must be increasing");
      if (patterns_for(load_values[k]) < 1)
        throw ParameterError("load " + std::to_string(load_values[k]) + " rounds to zero patterns");
    }
    train_config.validate();
  }
};

/// Measurements of one trained network.
struct TrialMeasurement {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure;
  bool train_converged = false;
  long epochs = 0;
  double sharpness = 0.0;
  double fd_sq = 0.0;
  double fi_sq = 0.0;
  double rho = 0.0;
  double stable_rank = 0.0;
  double lambda_max = 0.0;
  std::optional<SpectrumShape> spectrum_class;  ///< empty when min(P, N) < 3
};

/// One phase-grid cell. Numeric fields are means over the non-failed trials;
/// when every trial failed, `failed` is set and the numeric fields are meaningless.
struct CellRecord {
  double gamma = 0.0;
  double load = 0.0;
  Index p_patterns = 0;
  double sharpness = 0.0;
  double log10_sharpness = 0.0;
  double fd_sq = 0.0;
  double fi_sq = 0.0;
  double rho = 0.0;
  double stable_rank = 0.0;
  double lambda_max = 0.0;
  std::optional<SpectrumShape> spectrum_class;
  std::uint64_t seed = 0;  ///< regenerates the record via run_cell(n, gamma, p, seed, tc, trials)
  bool train_converged = false;
  bool failed = false;
  std::vector<TrialMeasurement> trials;
};

/// Seed of grid cell (gamma_index, load_index): mix_seed(mix_seed(base, gamma_index), load_index).
inline std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t gamma_index, std::size_t load_index) {
  return mix_seed(mix_seed(base_seed, gamma_index), load_index);
}

/// Trial 0 uses the cell seed itself; later trials use mix_seed(cell_seed, t).
inline std::uint64_t trial_seed(std::uint64_t seed, long trial) {
  return trial == 0 ? seed : mix_seed(seed, static_cast<std::uint64_t>(trial));
}

inline TrialMeasurement run_trial(Index n, double gamma, Index p, std::uint64_t seed, const TrainConfig& tc) {
  TrialMeasurement m;
  m.seed = seed;
  const NetworkConfig config{n, p, gamma, seed};
  config.validate();
  const PatternSet patterns = generate_patterns(config);
  try {
    const KlrModel model = train_klr(patterns, gamma, tc, seed);
    m.train_converged = model.train_meta.converged;
    m.epochs = model.train_meta.epochs;
    const ForceReport forces = force_report(model, patterns.pattern(0));
    m.sharpness = forces.sharpness;
    m.fd_sq = forces.fd_sq;
    m.fi_sq = forces.fi_sq;
    m.rho = forces.rho;
    const SpectralReport spectrum = spectral_report(model);
    m.stable_rank = spectrum.stable_rank;
    m.lambda_max = spectrum.lambda_max;
    if (spectrum.singular_values.size() >= 3) m.spectrum_class = spectrum_shape_class(spectrum);
  } catch (const Error& e) {
    m.failed = true;
    m.failure = e.what();
    m.train_converged = false;
  }
  return m;
}

namespace detail {

inline CellRecord aggregate_trials(double gamma, double load, Index p, std::uint64_t seed,
                                   std::vector<TrialMeasurement> trials) {
  CellRecord r;
  r.gamma = gamma;
  r.load = load;
  r.p_patterns = p;
  r.seed = seed;
  std::size_t ok = 0;
  bool all_converged = true;
  std::map<SpectrumShape, std::size_t> votes;
  std::vector<SpectrumShape> first_seen;
  for (const auto& t : trials) {
    if (t.failed) {
      all_converged = false;
      continue;
    }
    ++ok;
    r.sharpness += t.sharpness;
    r.fd_sq += t.fd_sq;
    r.fi_sq += t.fi_sq;
    r.rho += t.rho;
    r.stable_rank += t.stable_rank;
    r.lambda_max += t.lambda_max;
    all_converged = all_converged && t.train_converged;
    if (t.spectrum_class) {
      if (votes[*t.spectrum_class]++ == 0) first_seen.push_back(*t.spectrum_class);
    }
  }
  r.trials = std::move(trials);
  if (ok == 0) {
    r.failed = true;
    r.train_converged = false;
    return r;
  }
  const auto count = static_cast<double>(ok);
  r.sharpness /= count;
  r.fd_sq /= count;
  r.fi_sq /= count;
  r.rho /= count;
  r.stable_rank /= count;
  r.lambda_max /= count;
  r.log10_sharpness = std::log10(r.sharpness);
  r.train_converged = all_converged;
  // Majority class; ties go to the class seen first.
  std::size_t best = 0;
  for (const auto shape : first_seen) {
    if (votes[shape] > best) {
      best = votes[shape];
      r.spectrum_class = shape;
    }
  }
  return r;
}

}  // namespace detail

/// Generates patterns, trains, probes the landscape at xi^0 and the dual
/// spectrum; averages over `trials` derived seeds. Deterministic in its inputs.
inline CellRecord run_cell(Index n, double gamma, Index p, std::uint64_t seed, const TrainConfig& tc, long trials = 1) {
  if (trials < 1) throw ParameterError("trials must be >= 1");
  std::vector<TrialMeasurement> runs;
  runs.reserve(static_cast<std::size_t>(trials));
  for (long t = 0; t < trials; ++t) runs.push_back(run_trial(n, gamma, p, trial_seed(seed, t), tc));
  return detail::aggregate_trials(gamma, static_cast<double>(p) / static_cast<double>(n), p, seed, std::move(runs));
}

/// KLRHOP_WORKERS if set to a positive integer, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1U : hw;
}

/// One record per (gamma, load), gamma outer and load inner. Cells run on a
/// shared work queue; records land in their row-major slot, so the output
/// does not depend on the worker count or completion order.
inline std::vector<CellRecord> run_grid(const GridSpec& spec, unsigned workers = 0) {
  spec.validate();
  const std::size_t n_loads = spec.load_values.size();
  const std::size_t n_cells = spec.gamma_values.size() * n_loads;
  std::vector<CellRecord> records(n_cells);
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    for (std::size_t cell = next.fetch_add(1); cell < n_cells; cell = next.fetch_add(1)) {
      const std::size_t gi = cell / n_loads;
      const std::size_t li = cell % n_loads;
      const double load = spec.load_values[li];
      const Index p = spec.patterns_for(load);
      CellRecord r = run_cell(spec.n_neurons, spec.gamma_values[gi], p, cell_seed(spec.base_seed, gi, li),
                              spec.train_config, spec.trials_per_cell);
      r.load = load;
      records[cell] = std::move(r);
    }
  };

  const unsigned count = std::max(1U, std::min<unsigned>(workers == 0 ? worker_count() : workers,
                                                         static_cast<unsigned>(n_cells)));
  if (count == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned w = 0; w < count; ++w) pool.emplace_back(work);
  }
  return records;
}

/// The force-growth profile: a grid with a single gamma, ordered by load.
inline std::vector<CellRecord> cross_section(const GridSpec& spec, unsigned workers = 0) {
  if (spec.gamma_values.size() != 1) throw ParameterError("cross_section expects exactly one gamma value");
  auto records = run_grid(spec, workers);
  std::stable_sort(records.begin(), records.end(),
                   [](const CellRecord& a, const CellRecord& b) { return a.load < b.load; });
  return records;
}

struct RidgeReport {
  std::size_t index = 0;  ///< position in the input records
  double gamma = 0.0;
  double load = 0.0;
  double sharpness = 0.0;
  double stable_rank = 0.0;
  /// Fraction of usable cells whose stable rank is strictly below the ridge cell's.
  double stable_rank_quantile = 0.0;
  std::size_t usable_cells = 0;
};

inline RidgeReport locate_ridge(const std::vector<CellRecord>& records) {
  std::vector<std::size_t> usable;
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (!records[k].failed && std::isfinite(records[k].sharpness)) usable.push_back(k);
  }
  if (usable.empty()) throw EmptyResultError("locate_ridge: no records with finite sharpness");
  if (usable.size() < 4) throw ParameterError("locate_ridge needs at least 4 records with finite sharpness");

  std::size_t best = usable.front();
  for (const std::size_t k : usable) {
    if (records[k].sharpness > records[best].sharpness) best = k;
  }
  RidgeReport out;
  out.index = best;
  out.gamma = records[best].gamma;
  out.load = records[best].load;
  out.sharpness = records[best].sharpness;
  out.stable_rank = records[best].stable_rank;
  std::size_t below = 0;
  for (const std::size_t k : usable) {
    if (records[k].stable_rank < out.stable_rank) ++below;
  }
  out.usable_cells = usable.size();
  out.stable_rank_quantile = static_cast<double>(below) / static_cast<double>(usable.size());
  return out;
}

/// `steps` log-spaced values from lo to hi inclusive.
inline std::vector<double> log_space(double lo, double hi, int steps) {
  if (!(lo > 0.0) || !(hi >= lo) || steps < 1) throw ParameterError("log_space needs 0 < lo <= hi and steps >= 1");
  if (steps == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(steps));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int k = 0; k < steps; ++k) out[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * k / (steps - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

/// `steps` evenly spaced values from lo to hi inclusive.
inline std::vector<double> linear_space(double lo, double hi, int steps) {
  if (!(hi >= lo) || steps < 1) throw ParameterError("linear_space needs lo <= hi and steps >= 1");
  if (steps == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) out[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (steps - 1);
  out.back() = hi;
  return out;
}

}  // namespace klrhop
