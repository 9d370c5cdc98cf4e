#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "klrhop/trainer.hpp"

namespace klrhop {

inline constexpr long kDefaultMaxSteps = 100;

enum class RecallOutcome {
  FixedPoint,       ///< s(t+1) == s(t)
  TwoCycle,         ///< s(t+1) == s(t-1) != s(t)
  BudgetExhausted,  ///< max_steps updates applied without settling
};

inline std::string to_string(RecallOutcome o) {
  switch (o) {
    case RecallOutcome::FixedPoint: return "fixed_point";
    case RecallOutcome::TwoCycle: return "two_cycle";
    case RecallOutcome::BudgetExhausted: return "budget_exhausted";
  }
  return "unknown";
}

struct RecallResult {
  StateVector final_state;
  long n_steps = 0;  ///< updates that changed the state
  bool converged = false;
  RecallOutcome outcome = RecallOutcome::BudgetExhausted;
  double final_overlap = 0.0;
  std::optional<std::vector<double>> trajectory_overlaps;  ///< overlap with the target at t = 0..n_steps
};

/// h_i(x) = sum_mu alpha_{mu i} K(x, xi^mu), i.e. A^T k(x).
inline Vector local_field(const KlrModel& model, const StateVector& x) {
  if (x.size() != model.n_neurons()) throw ParameterError("local_field: state length does not match N");
  return model.dual.matrix().transpose() * kernel_vector(x, model.patterns, model.gamma());
}

/// One synchronous update s_i <- sign(h_i(s)); a zero field keeps s_i.
inline StateVector sync_step(const KlrModel& model, const StateVector& s) {
  if (!s.is_bipolar()) throw ParameterError("sync_step expects a bipolar state");
  const Vector h = local_field(model, s);
  Vector next = s.values();
  for (Index i = 0; i < next.size(); ++i) {
    if (h[i] > 0.0) {
      next[i] = 1.0;
    } else if (h[i] < 0.0) {
      next[i] = -1.0;
    }
  }
  return StateVector::bipolar(std::move(next));
}

inline RecallResult run_recall(const KlrModel& model, const StateVector& start, Index target, long max_steps,
                               bool record_trajectory = false) {
  if (max_steps < 1) throw ParameterError("max_steps must be >= 1");
  const StateVector goal = model.patterns.pattern(target);
  if (start.size() != model.n_neurons()) throw ParameterError("run_recall: start length does not match N");

  RecallResult result;
  std::vector<double> trajectory;
  StateVector current = start;
  std::optional<StateVector> previous;
  if (record_trajectory) trajectory.push_back(overlap(current, goal));

  while (true) {
    StateVector next = sync_step(model, current);
    if (next == current) {
      result.outcome = RecallOutcome::FixedPoint;
      result.converged = true;
      break;
    }
    if (previous && next == *previous) {
      result.outcome = RecallOutcome::TwoCycle;
      break;
    }
    if (result.n_steps == max_steps) {
      result.outcome = RecallOutcome::BudgetExhausted;
      break;
    }
    previous = std::move(current);
    current = std::move(next);
    ++result.n_steps;
    if (record_trajectory) trajectory.push_back(overlap(current, goal));
  }

  result.final_overlap = overlap(current, goal);
  result.final_state = std::move(current);
  if (record_trajectory) result.trajectory_overlaps = std::move(trajectory);
  return result;
}

struct RecallSummary {
  long trials = 0;
  long perfect = 0;  ///< final overlap exactly 1
  long fixed_points = 0;
  long two_cycles = 0;
  double mean_overlap = 0.0;

  [[nodiscard]] double success_rate() const {
    return trials == 0 ? 0.0 : static_cast<double>(perfect) / static_cast<double>(trials);
  }
};

/// Noisy-cue retrieval: trial t corrupts pattern (t mod P) with flip noise
/// seeded by mix_seed(seed, t) and runs recall toward that pattern.
inline RecallSummary recall_experiment(const KlrModel& model, double flip_prob, long trials, std::uint64_t seed,
                                       long max_steps = kDefaultMaxSteps) {
  if (trials < 1) throw ParameterError("trials must be >= 1");
  RecallSummary summary;
  summary.trials = trials;
  double overlap_sum = 0.0;
  for (long t = 0; t < trials; ++t) {
    const Index mu = t % model.n_patterns();
    const StateVector cue = corrupt(model.patterns.pattern(mu), flip_prob, mix_seed(seed, static_cast<std::uint64_t>(t)));
    const RecallResult r = run_recall(model, cue, mu, max_steps);
    if (r.final_overlap == 1.0) ++summary.perfect;
    if (r.outcome == RecallOutcome::FixedPoint) ++summary.fixed_points;
    if (r.outcome == RecallOutcome::TwoCycle) ++summary.two_cycles;
    overlap_sum += r.final_overlap;
  }
  summary.mean_overlap = overlap_sum / static_cast<double>(trials);
  return summary;
}

}  // namespace klrhop
