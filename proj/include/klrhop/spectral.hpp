#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "klrhop/trainer.hpp"

namespace klrhop {

/// Eigenvalues of alpha_eff below this are clipped to zero before the square root.
inline constexpr double kSqrtClip = 1e-12;

enum class SpectrumShape { Collapsed, Concentrated, Diffuse };

inline std::string to_string(SpectrumShape s) {
  switch (s) {
    case SpectrumShape::Collapsed: return "collapsed";
    case SpectrumShape::Concentrated: return "concentrated";
    case SpectrumShape::Diffuse: return "diffuse";
  }
  return "unknown";
}

inline SpectrumShape parse_spectrum_shape(const std::string& s) {
  if (s == "collapsed") return SpectrumShape::Collapsed;
  if (s == "concentrated") return SpectrumShape::Concentrated;
  if (s == "diffuse") return SpectrumShape::Diffuse;
  throw ParameterError("unknown spectrum class '" + s + "'");
}

struct SpectralReport {
  Vector singular_values;  ///< of the P x N dual matrix, nonincreasing
  Vector alpha_eff_eigs;   ///< nonincreasing
  Vector k_alpha_eigs;     ///< nonincreasing
  double lambda_max = 0.0;
  double stable_rank = 0.0;
};

namespace detail {

inline Vector descending(Vector v) {
  std::sort(v.data(), v.data() + v.size(), [](double a, double b) { return a > b; });
  return v;
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + " contains non-finite entries");
}

struct RootedAlpha {
  Vector eigenvalues;  // of alpha_eff, nonincreasing
  Matrix root;         // symmetric PSD square root
};

inline RootedAlpha psd_sqrt(const Matrix& sym) {
  require_finite(sym, "alpha_eff");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of alpha_eff failed");
  Vector clipped = eig.eigenvalues();
  for (Index k = 0; k < clipped.size(); ++k) clipped[k] = clipped[k] < kSqrtClip ? 0.0 : std::sqrt(clipped[k]);
  RootedAlpha out;
  out.eigenvalues = descending(eig.eigenvalues());
  out.root = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  out.root = 0.5 * (out.root + out.root.transpose());
  return out;
}

inline Vector symmetric_eigenvalues(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition failed");
  return descending(eig.eigenvalues());
}

inline Matrix effective_gram_from(const Matrix& alpha_eff, const Matrix& gram) {
  const Matrix root = psd_sqrt(alpha_eff).root;
  Matrix k_alpha = root * gram * root;
  k_alpha = 0.5 * (k_alpha + k_alpha.transpose());
  require_finite(k_alpha, "K_alpha");
  return k_alpha;
}

}  // namespace detail

/// alpha_eff = (1/N) A A^T, the P x P aggregate of the per-neuron duals.
inline Matrix effective_alpha(const KlrModel& model) {
  const Matrix& a = model.dual.matrix();
  Matrix out = a * a.transpose() / static_cast<double>(a.cols());
  return 0.5 * (out + out.transpose());
}

/// K_alpha = alpha_eff^{1/2} K alpha_eff^{1/2}
inline Matrix effective_gram(const KlrModel& model) {
  return detail::effective_gram_from(effective_alpha(model), model.gram.matrix());
}

/// Nonincreasing singular values.
inline Vector singular_values(const Matrix& m) {
  detail::require_finite(m, "matrix");
  Eigen::BDCSVD<Matrix> svd(m);
  return detail::descending(svd.singularValues());
}

/// sum_i sigma_i^2 / sigma_1^2
inline double stable_rank_from_singular_values(const Vector& sigma) {
  if (sigma.size() == 0 || !(sigma[0] > 0.0)) throw UndefinedRankError("stable rank of an all-zero matrix is undefined");
  const double lead = sigma[0] * sigma[0];
  double total = lead;
  for (Index k = 1; k < sigma.size(); ++k) total += sigma[k] * sigma[k];
  return total / lead;
}

inline double stable_rank(const Matrix& m) {
  if (m.size() == 0) throw UndefinedRankError("stable rank of an empty matrix is undefined");
  return stable_rank_from_singular_values(singular_values(m));
}

inline SpectralReport spectral_report(const KlrModel& model) {
  SpectralReport r;
  r.singular_values = singular_values(model.dual.matrix());
  r.stable_rank = stable_rank_from_singular_values(r.singular_values);
  const Matrix alpha_eff = effective_alpha(model);
  const auto rooted = detail::psd_sqrt(alpha_eff);
  r.alpha_eff_eigs = rooted.eigenvalues;
  Matrix k_alpha = rooted.root * model.gram.matrix() * rooted.root;
  k_alpha = 0.5 * (k_alpha + k_alpha.transpose());
  detail::require_finite(k_alpha, "K_alpha");
  r.k_alpha_eigs = detail::symmetric_eigenvalues(k_alpha);
  r.lambda_max = r.k_alpha_eigs[0];
  return r;
}

/// Thresholds on the tail mass r = sum_{k>1} sigma_k^2 / sum_k sigma_k^2.
inline constexpr double kCollapsedTail = 0.01;
inline constexpr double kDiffuseTail = 0.5;

inline double spectral_tail_mass(const Vector& sigma) {
  const double tail = sigma.tail(sigma.size() - 1).squaredNorm();
  const double total = sigma[0] * sigma[0] + tail;
  if (!(total > 0.0)) throw UndefinedRankError("tail mass of an all-zero spectrum is undefined");
  return tail / total;
}

inline SpectrumShape spectrum_shape_class(const Vector& singular) {
  if (singular.size() < 3) throw ParameterError("spectrum classification needs at least 3 singular values");
  const Vector sigma = detail::descending(singular);
  const double tail = spectral_tail_mass(sigma);
  if (tail < kCollapsedTail) return SpectrumShape::Collapsed;
  if (tail > kDiffuseTail) return SpectrumShape::Diffuse;
  return SpectrumShape::Concentrated;
}

inline SpectrumShape spectrum_shape_class(const SpectralReport& report) {
  return spectrum_shape_class(report.singular_values);
}

}  // namespace klrhop
