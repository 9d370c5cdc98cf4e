#pragma once

#include <algorithm>
#include <cmath>

#include "klrhop/dynamics.hpp"

namespace klrhop {

/// Force norms below this are treated as zero when forming the interference.
inline constexpr double kZeroForceNorm = 1e-12;

/// Landscape quantities at one probe point x.
struct ForceReport {
  double v_value = 0.0;  ///< V(x) = -x.h(x)
  Vector grad_v;         ///< f_direct + f_indirect
  Vector f_direct;       ///< -h(x)
  Vector f_indirect;     ///< [F_i]_j = -sum_k x_k dh_k/dx_j
  double rho = 0.0;      ///< cosine between the two forces; 0 when either vanishes
  double sharpness = 0.0;
  double fd_sq = 0.0;
  double fi_sq = 0.0;
};

namespace detail {

struct FieldParts {
  Vector kernel;  // K(x, xi^mu)
  Vector field;   // h(x)
};

inline FieldParts field_parts(const KlrModel& model, const StateVector& x) {
  if (x.size() != model.n_neurons()) throw ParameterError("state length does not match N");
  FieldParts parts;
  parts.kernel = kernel_vector(x, model.patterns, model.gamma());
  parts.field = model.dual.matrix().transpose() * parts.kernel;
  return parts;
}

/// With dK(x, xi)/dx_j = -2 gamma (x_j - xi_j) K(x, xi):
///   [F_i]_j = 2 gamma sum_mu (x_j - xi^mu_j) K(x, xi^mu) (alpha_mu . x)
inline Vector indirect_from_kernel(const KlrModel& model, const StateVector& x, const Vector& kernel) {
  const Matrix& a = model.dual.matrix();
  const Matrix& xi = model.patterns.matrix();
  const Vector coupling = a * x.values();  // alpha_mu . x
  const Vector weight = 2.0 * model.gamma() * kernel.cwiseProduct(coupling);
  return weight.sum() * x.values() - xi.transpose() * weight;
}

}  // namespace detail

inline double lyapunov_v(const KlrModel& model, const StateVector& x) {
  return -x.values().dot(detail::field_parts(model, x).field);
}

inline Vector direct_force(const KlrModel& model, const StateVector& x) { return -detail::field_parts(model, x).field; }

inline Vector indirect_force(const KlrModel& model, const StateVector& x) {
  const auto parts = detail::field_parts(model, x);
  return detail::indirect_from_kernel(model, x, parts.kernel);
}

inline Vector grad_v(const KlrModel& model, const StateVector& x) {
  const auto parts = detail::field_parts(model, x);
  return -parts.field + detail::indirect_from_kernel(model, x, parts.kernel);
}

inline ForceReport force_report(const KlrModel& model, const StateVector& x) {
  const auto parts = detail::field_parts(model, x);
  ForceReport r;
  r.v_value = -x.values().dot(parts.field);
  r.f_direct = -parts.field;
  r.f_indirect = detail::indirect_from_kernel(model, x, parts.kernel);
  r.grad_v = r.f_direct + r.f_indirect;
  r.fd_sq = r.f_direct.squaredNorm();
  r.fi_sq = r.f_indirect.squaredNorm();
  r.sharpness = r.grad_v.squaredNorm();
  const double nd = std::sqrt(r.fd_sq);
  const double ni = std::sqrt(r.fi_sq);
  if (nd >= kZeroForceNorm && ni >= kZeroForceNorm) {
    r.rho = std::clamp(r.f_direct.dot(r.f_indirect) / (nd * ni), -1.0, 1.0);
  }
  return r;
}

/// M(xi^mu) = |grad V|^2 at the stored pattern.
inline double pinnacle_sharpness(const KlrModel& model, Index mu) {
  return force_report(model, model.patterns.pattern(mu)).sharpness;
}

}  // namespace klrhop
