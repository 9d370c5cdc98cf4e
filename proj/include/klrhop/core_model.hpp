#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "klrhop/errors.hpp"
#include "klrhop/rng.hpp"

namespace klrhop {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct NetworkConfig {
  Index n_neurons = 100;
  Index n_patterns = 10;
  double gamma = 0.01;
  std::uint64_t seed = 0;

  [[nodiscard]] double load() const { return static_cast<double>(n_patterns) / static_cast<double>(n_neurons); }

  void validate() const {
    if (n_neurons < 1) throw ParameterError("n_neurons must be >= 1");
    if (n_patterns < 1) throw ParameterError("n_patterns must be >= 1");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be a finite positive number");
  }
};

namespace detail {

inline bool is_bipolar(const Eigen::Ref<const Matrix>& m) {
  return ((m.array() == 1.0) || (m.array() == -1.0)).all();
}

}  // namespace detail

/// A state of the network. Discrete states are in {-1,+1}^N; relaxed states
/// are arbitrary finite points of R^N used to probe the landscape.
class StateVector {
 public:
  StateVector() = default;

  static StateVector bipolar(Vector values) {
    if (!detail::is_bipolar(values)) throw ParameterError("bipolar state entries must be exactly -1 or +1");
    return StateVector(std::move(values), true);
  }

  static StateVector relaxed(Vector values) {
    if (!values.allFinite()) throw ParameterError("relaxed state entries must be finite");
    return StateVector(std::move(values), false);
  }

  [[nodiscard]] const Vector& values() const noexcept { return values_; }
  [[nodiscard]] Index size() const noexcept { return values_.size(); }
  [[nodiscard]] bool is_bipolar() const noexcept { return bipolar_; }
  [[nodiscard]] double operator[](Index i) const { return values_[i]; }

  [[nodiscard]] StateVector negated() const { return StateVector(-values_, bipolar_); }

  friend bool operator==(const StateVector& a, const StateVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  StateVector(Vector values, bool bipolar) : values_(std::move(values)), bipolar_(bipolar) {}

  Vector values_;
  bool bipolar_ = false;
};

/// P stored bipolar patterns, one per row.
class PatternSet {
 public:
  PatternSet() = default;

  explicit PatternSet(Matrix rows) : rows_(std::move(rows)) {
    if (rows_.rows() < 1 || rows_.cols() < 1) throw ParameterError("pattern set must be non-empty");
    if (!detail::is_bipolar(rows_)) throw ParameterError("pattern entries must be exactly -1 or +1");
  }

  [[nodiscard]] Index n_patterns() const noexcept { return rows_.rows(); }
  [[nodiscard]] Index n_neurons() const noexcept { return rows_.cols(); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return rows_; }

  [[nodiscard]] StateVector pattern(Index mu) const {
    if (mu < 0 || mu >= n_patterns()) throw ParameterError("pattern index " + std::to_string(mu) + " out of range");
    return StateVector::bipolar(rows_.row(mu).transpose());
  }

  friend bool operator==(const PatternSet& a, const PatternSet& b) {
    return a.rows_.rows() == b.rows_.rows() && a.rows_.cols() == b.rows_.cols() && a.rows_ == b.rows_;
  }

 private:
  Matrix rows_;
};

/// P i.i.d. uniform bipolar patterns; a pure function of (N, P, seed).
inline PatternSet generate_patterns(const NetworkConfig& config) {
  config.validate();
  std::mt19937_64 gen(config.seed);
  Matrix rows(config.n_patterns, config.n_neurons);
  for (Index mu = 0; mu < rows.rows(); ++mu) {
    for (Index i = 0; i < rows.cols(); ++i) rows(mu, i) = random_sign(gen);
  }
  return PatternSet(std::move(rows));
}

/// Flips each entry independently with probability flip_prob.
inline StateVector corrupt(const StateVector& pattern, double flip_prob, std::uint64_t seed) {
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw ParameterError("flip_prob must lie in [0, 1]");
  if (!pattern.is_bipolar()) throw ParameterError("corrupt expects a bipolar state");
  std::mt19937_64 gen(seed);
  Vector out = pattern.values();
  for (Index i = 0; i < out.size(); ++i) {
    if (uniform01(gen) < flip_prob) out[i] = -out[i];
  }
  return StateVector::bipolar(std::move(out));
}

/// m = (1/N) a.b
inline double overlap(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw ParameterError("overlap: length mismatch");
  if (a.size() == 0) throw ParameterError("overlap: empty states");
  if (!a.is_bipolar() || !b.is_bipolar()) throw ParameterError("overlap expects bipolar states");
  return a.values().dot(b.values()) / static_cast<double>(a.size());
}

}  // namespace klrhop
