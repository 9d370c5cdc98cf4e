#pragma once

#include <cmath>
#include <utility>

#include "klrhop/core_model.hpp"

namespace klrhop {

/// Symmetric P x P matrix of pairwise RBF values between stored patterns.
class KernelGram {
 public:
  KernelGram() = default;
  explicit KernelGram(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw ParameterError("Gram matrix must be square");
  }

  [[nodiscard]] const Matrix& matrix() const noexcept { return entries_; }
  [[nodiscard]] Index size() const noexcept { return entries_.rows(); }
  [[nodiscard]] double operator()(Index mu, Index nu) const { return entries_(mu, nu); }

 private:
  Matrix entries_;
};

/// K(x, y) = exp(-gamma * |x - y|^2)
inline double rbf_kernel(const StateVector& x, const StateVector& y, double gamma) {
  if (x.size() != y.size()) throw ParameterError("rbf_kernel: length mismatch");
  if (!(gamma > 0.0)) throw ParameterError("rbf_kernel: gamma must be positive");
  return std::exp(-gamma * (x.values() - y.values()).squaredNorm());
}

/// Component mu is K(x, xi^mu).
inline Vector kernel_vector(const StateVector& x, const PatternSet& patterns, double gamma) {
  if (x.size() != patterns.n_neurons()) throw ParameterError("kernel_vector: state length does not match N");
  if (!(gamma > 0.0)) throw ParameterError("kernel_vector: gamma must be positive");
  const Vector sq = (patterns.matrix().rowwise() - x.values().transpose()).rowwise().squaredNorm();
  return (-gamma * sq.array()).exp().matrix();
}

/// Uses |a - b|^2 = 2(N - a.b) for bipolar rows; the inner products are
/// integers, so the distances are exact.
inline KernelGram gram_matrix(const PatternSet& patterns, double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("gram_matrix: gamma must be positive");
  const Matrix& x = patterns.matrix();
  const Index p = x.rows();
  const auto n = static_cast<double>(x.cols());
  const Matrix inner = x * x.transpose();
  Matrix k(p, p);
  for (Index mu = 0; mu < p; ++mu) {
    k(mu, mu) = 1.0;
    for (Index nu = mu + 1; nu < p; ++nu) {
      const double value = std::exp(-gamma * 2.0 * (n - inner(mu, nu)));
      k(mu, nu) = value;
      k(nu, mu) = value;
    }
  }
  return KernelGram(std::move(k));
}

}  // namespace klrhop
