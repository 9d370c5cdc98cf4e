#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "klrhop/kernel.hpp"

namespace klrhop {

enum class Regularizer {
  Rkhs,       ///< (lambda/2) a^T K a, the function norm in the RKHS
  Euclidean,  ///< (lambda/2) |a|^2
};

/// How a gradient step that would raise a neuron's loss is handled.
enum class StepControl {
  Backtracking,  ///< reject the step and halve that neuron's learning rate
  Fixed,         ///< always accept; a non-finite loss aborts training
};

struct TrainConfig {
  double reg_lambda = 1e-4;
  double learning_rate = 0.5;
  long max_epochs = 2000;
  double grad_tol = 1e-6;
  Regularizer regularizer = Regularizer::Rkhs;
  StepControl step_control = StepControl::Backtracking;

  void validate() const {
    if (!(reg_lambda >= 0.0) || !std::isfinite(reg_lambda)) throw ParameterError("reg_lambda must be finite and >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ParameterError("learning_rate must be finite and > 0");
    if (max_epochs < 1) throw ParameterError("max_epochs must be >= 1");
    if (!(grad_tol > 0.0)) throw ParameterError("grad_tol must be > 0");
  }
};

inline std::string to_string(Regularizer r) { return r == Regularizer::Rkhs ? "rkhs" : "euclidean"; }
inline std::string to_string(StepControl s) { return s == StepControl::Backtracking ? "backtracking" : "fixed"; }

inline Regularizer parse_regularizer(const std::string& s) {
  if (s == "rkhs") return Regularizer::Rkhs;
  if (s == "euclidean") return Regularizer::Euclidean;
  throw ParameterError("unknown regularizer '" + s + "'");
}

inline StepControl parse_step_control(const std::string& s) {
  if (s == "backtracking") return StepControl::Backtracking;
  if (s == "fixed") return StepControl::Fixed;
  throw ParameterError("unknown step control '" + s + "'");
}

/// P x N dual coefficients; entry (mu, i) weights pattern mu for neuron i.
class DualMatrix {
 public:
  DualMatrix() = default;
  explicit DualMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (!entries_.allFinite()) throw NumericalError("dual matrix contains non-finite entries");
  }

  [[nodiscard]] const Matrix& matrix() const noexcept { return entries_; }
  [[nodiscard]] Index n_patterns() const noexcept { return entries_.rows(); }
  [[nodiscard]] Index n_neurons() const noexcept { return entries_.cols(); }

 private:
  Matrix entries_;
};

struct TrainMeta {
  long epochs = 0;           ///< largest number of epochs any neuron ran
  double final_loss = 0.0;   ///< mean of the per-neuron losses
  bool converged = false;    ///< every neuron reached grad_tol
};

struct KlrModel {
  NetworkConfig config;
  PatternSet patterns;
  DualMatrix dual;
  KernelGram gram;
  TrainConfig train_config;
  TrainMeta train_meta;

  [[nodiscard]] Index n_neurons() const noexcept { return patterns.n_neurons(); }
  [[nodiscard]] Index n_patterns() const noexcept { return patterns.n_patterns(); }
  [[nodiscard]] double gamma() const noexcept { return config.gamma; }
};

/// Builds a model around given dual coefficients, checking that every part agrees in shape.
inline KlrModel make_model(PatternSet patterns, double gamma, Matrix dual, TrainConfig tc = {}, TrainMeta meta = {},
                           std::uint64_t seed = 0) {
  if (dual.rows() != patterns.n_patterns() || dual.cols() != patterns.n_neurons())
    throw ParameterError("dual matrix must be P x N");
  KlrModel model;
  model.config = NetworkConfig{patterns.n_neurons(), patterns.n_patterns(), gamma, seed};
  model.config.validate();
  model.gram = gram_matrix(patterns, gamma);
  model.patterns = std::move(patterns);
  model.dual = DualMatrix(std::move(dual));
  model.train_config = tc;
  model.train_meta = meta;
  return model;
}

namespace detail {

/// log(1 + exp(-m)) without overflow.
inline double softplus_neg(double m) { return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

/// sigma(-m) = 1 / (1 + exp(m))
inline double sigmoid_neg(double m) {
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

inline double regularizer_value(const TrainConfig& tc, const Eigen::Ref<const Vector>& alpha,
                                const Eigen::Ref<const Vector>& field) {
  const double norm = tc.regularizer == Regularizer::Rkhs ? alpha.dot(field) : alpha.squaredNorm();
  return 0.5 * tc.reg_lambda * norm;
}

}  // namespace detail

/// L_i for one neuron: mean logistic loss of the margins y * (K a) plus the regularizer.
inline double neuron_loss(const Matrix& gram, const Eigen::Ref<const Vector>& labels,
                          const Eigen::Ref<const Vector>& alpha, const TrainConfig& tc) {
  const Vector field = gram * alpha;
  double data = 0.0;
  for (Index nu = 0; nu < field.size(); ++nu) data += detail::softplus_neg(labels[nu] * field[nu]);
  return data / static_cast<double>(field.size()) + detail::regularizer_value(tc, alpha, field);
}

/// Gradient of neuron_loss with respect to alpha.
inline Vector neuron_loss_gradient(const Matrix& gram, const Eigen::Ref<const Vector>& labels,
                                   const Eigen::Ref<const Vector>& alpha, const TrainConfig& tc) {
  const Vector field = gram * alpha;
  Vector weighted(field.size());
  for (Index nu = 0; nu < field.size(); ++nu) weighted[nu] = labels[nu] * detail::sigmoid_neg(labels[nu] * field[nu]);
  Vector grad = -(gram * weighted) / static_cast<double>(field.size());
  if (tc.regularizer == Regularizer::Rkhs) {
    grad += tc.reg_lambda * field;
  } else {
    grad += tc.reg_lambda * alpha;
  }
  return grad;
}

/// Full-batch gradient descent from alpha = 0 on each neuron's logistic
/// problem. Neurons are independent; they are advanced together as the
/// columns of one matrix so each epoch costs two P x P x N products.
/// Relative slack on the descent check; near the optimum the loss change is below rounding noise.
inline constexpr double kLossSlack = 64.0 * std::numeric_limits<double>::epsilon();

inline KlrModel train_klr(const PatternSet& patterns, double gamma, const TrainConfig& tc, std::uint64_t seed = 0) {
  tc.validate();
  const Index p = patterns.n_patterns();
  const Index n = patterns.n_neurons();
  const auto inv_p = 1.0 / static_cast<double>(p);
  const KernelGram gram = gram_matrix(patterns, gamma);
  const Matrix& k = gram.matrix();
  const Matrix& y = patterns.matrix();
  const bool rkhs = tc.regularizer == Regularizer::Rkhs;

  Matrix alpha = Matrix::Zero(p, n);
  Matrix field = Matrix::Zero(p, n);

  auto column_losses = [&](const Matrix& a, const Matrix& h) {
    Vector out(n);
    for (Index i = 0; i < n; ++i) {
      double data = 0.0;
      for (Index nu = 0; nu < p; ++nu) data += detail::softplus_neg(y(nu, i) * h(nu, i));
      out[i] = data * inv_p + detail::regularizer_value(tc, a.col(i), h.col(i));
    }
    return out;
  };

  Vector loss = column_losses(alpha, field);
  Vector rate = Vector::Constant(n, tc.learning_rate);
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<char> converged(static_cast<std::size_t>(n), 0);
  std::vector<long> epochs(static_cast<std::size_t>(n), 0);

  Matrix weighted(p, n);
  for (long epoch = 0; epoch < tc.max_epochs; ++epoch) {
    for (Index i = 0; i < n; ++i) {
      for (Index nu = 0; nu < p; ++nu) weighted(nu, i) = y(nu, i) * detail::sigmoid_neg(y(nu, i) * field(nu, i));
    }
    Matrix grad = -(k * weighted) * inv_p;
    grad += tc.reg_lambda * (rkhs ? field : alpha);

    bool any_active = false;
    for (Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (!active[ui]) {
        grad.col(i).setZero();
        continue;
      }
      const double gmax = grad.col(i).cwiseAbs().maxCoeff();
      if (!std::isfinite(gmax)) throw TrainingDivergedError(i, epoch, "non-finite gradient");
      if (gmax < tc.grad_tol) {
        active[ui] = 0;
        converged[ui] = 1;
        grad.col(i).setZero();
        continue;
      }
      any_active = true;
      ++epochs[ui];
      grad.col(i) *= rate[i];
    }
    if (!any_active) break;

    Matrix next_alpha = alpha - grad;
    Matrix next_field = k * next_alpha;
    const Vector next_loss = column_losses(next_alpha, next_field);
    for (Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (!active[ui]) continue;
      const bool finite = std::isfinite(next_loss[i]) && next_alpha.col(i).allFinite();
      if (tc.step_control == StepControl::Fixed) {
        if (!finite) throw TrainingDivergedError(i, epoch, "non-finite loss");
      } else if (!finite || next_loss[i] > loss[i] + kLossSlack * std::max(1.0, std::abs(loss[i]))) {
        rate[i] *= 0.5;
        continue;
      }
      alpha.col(i) = next_alpha.col(i);
      field.col(i) = next_field.col(i);
      loss[i] = next_loss[i];
    }
  }

  // The epoch budget may run out right after the step that met the tolerance.
  for (Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (converged[ui]) continue;
    const Vector g = neuron_loss_gradient(k, y.col(i), alpha.col(i), tc);
    if (g.cwiseAbs().maxCoeff() < tc.grad_tol) converged[ui] = 1;
  }

  TrainMeta meta;
  meta.epochs = 0;
  meta.converged = true;
  for (Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    meta.epochs = std::max(meta.epochs, epochs[ui]);
    meta.converged = meta.converged && converged[ui] != 0;
  }
  meta.final_loss = loss.mean();

  KlrModel model;
  model.config = NetworkConfig{n, p, gamma, seed};
  model.patterns = patterns;
  model.dual = DualMatrix(std::move(alpha));
  model.gram = gram;
  model.train_config = tc;
  model.train_meta = meta;
  return model;
}

inline double training_loss(const KlrModel& model, Index neuron) {
  if (neuron < 0 || neuron >= model.n_neurons())
    throw ParameterError("neuron index " + std::to_string(neuron) + " out of range");
  return neuron_loss(model.gram.matrix(), model.patterns.matrix().col(neuron), model.dual.matrix().col(neuron),
                     model.train_config);
}

}  // namespace klrhop
