#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <vector>

#include "klrhop/spectral.hpp"

namespace klrhop {
namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = scale * (2.0 * uniform01(gen) - 1.0);
  }
  return m;
}

TEST(EffectiveAlpha, Anchors) {
  const PatternSet one = generate_patterns({30, 1, 0.1, 1});
  const KlrModel m1 = make_model(one, 0.1, one.matrix());
  ASSERT_EQ(effective_alpha(m1).rows(), 1);
  EXPECT_DOUBLE_EQ(effective_alpha(m1)(0, 0), 1.0);

  const PatternSet ps = generate_patterns({30, 6, 0.1, 2});
  EXPECT_EQ(effective_alpha(make_model(ps, 0.1, Matrix::Zero(6, 30))), Matrix::Zero(6, 6));
  const Matrix ae = effective_alpha(make_model(ps, 0.1, random_matrix(6, 30, 3)));
  EXPECT_EQ(ae, ae.transpose());
  EXPECT_GE(detail::symmetric_eigenvalues(ae).minCoeff(), -1e-14);
}

TEST(EffectiveGram, IdentityAlphaLeavesKernel) {
  const PatternSet ps = generate_patterns({20, 5, 0.1, 4});
  const KernelGram g = gram_matrix(ps, 0.05);
  const Matrix k_alpha = detail::effective_gram_from(Matrix::Identity(5, 5), g.matrix());
  EXPECT_LE((k_alpha - g.matrix()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(EffectiveGram, SpectrumMatchesProductEigenvalues) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Index p = 5 + static_cast<Index>(seed) * 6;
    const PatternSet ps = generate_patterns({60, p, 0.1, 100 + seed});
    const KlrModel m = make_model(ps, 0.02, random_matrix(p, 60, 200 + seed, 3.0));
    const SpectralReport r = spectral_report(m);

    const Matrix product = effective_alpha(m) * m.gram.matrix();
    Eigen::EigenSolver<Matrix> es(product, false);
    std::vector<double> ref(static_cast<std::size_t>(p));
    for (Index k = 0; k < p; ++k) ref[static_cast<std::size_t>(k)] = es.eigenvalues()[k].real();
    std::sort(ref.begin(), ref.end(), std::greater<>());
    for (Index k = 0; k < p; ++k) {
      EXPECT_LE(std::abs(r.k_alpha_eigs[k] - ref[static_cast<std::size_t>(k)]), 1e-8 * ref[0]) << "P " << p;
    }
    EXPECT_DOUBLE_EQ(r.lambda_max, r.k_alpha_eigs[0]);
  }
}

TEST(StableRank, Anchors) {
  EXPECT_NEAR(stable_rank(Matrix::Identity(7, 7)), 7.0, 1e-12);
  EXPECT_NEAR(stable_rank(Vector::Constant(4, 2.0) * Eigen::RowVectorXd::Constant(9, -1.0)), 1.0, 1e-12);
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 2.0, 1.0, 1.0;
  EXPECT_NEAR(stable_rank(d), 1.5, 1e-12);
  EXPECT_THROW((void)stable_rank(Matrix::Zero(4, 4)), UndefinedRankError);
}

TEST(StableRank, ScaleInvariantAndBoundedByRank) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = random_matrix(6, 15, seed);
    const double sr = stable_rank(a);
    EXPECT_GE(sr, 1.0);
    EXPECT_LE(sr, 6.0 + 1e-12);
    EXPECT_NEAR(stable_rank(-3.7 * a), sr, 1e-12 * sr);
    // Rank-3 product.
    const Matrix low = random_matrix(6, 3, seed + 50) * random_matrix(3, 15, seed + 60);
    EXPECT_LE(stable_rank(low), 3.0 + 1e-9);
  }
}

TEST(SpectralReport, SinglePatternAnchors) {
  const PatternSet ps = generate_patterns({50, 1, 0.1, 5});
  const SpectralReport r = spectral_report(make_model(ps, 0.1, ps.matrix()));
  EXPECT_DOUBLE_EQ(r.stable_rank, 1.0);
  EXPECT_NEAR(r.lambda_max, 1.0, 1e-14);
  EXPECT_NEAR(r.singular_values[0], std::sqrt(50.0), 1e-12);
}

TEST(SpectralReport, OrderingAndFiniteness) {
  const PatternSet ps = generate_patterns({40, 12, 0.1, 6});
  const SpectralReport r = spectral_report(train_klr(ps, 0.01, TrainConfig{}));
  ASSERT_EQ(r.singular_values.size(), 12);
  for (Index k = 1; k < 12; ++k) {
    EXPECT_GE(r.singular_values[k - 1], r.singular_values[k]);
    EXPECT_GE(r.k_alpha_eigs[k - 1], r.k_alpha_eigs[k]);
    EXPECT_GE(r.alpha_eff_eigs[k - 1], r.alpha_eff_eigs[k]);
  }
  EXPECT_GE(r.stable_rank, 1.0);
  EXPECT_LE(r.stable_rank, 12.0);
  EXPECT_THROW((void)spectral_report(make_model(ps, 0.1, Matrix::Zero(12, 40))), UndefinedRankError);
}

TEST(SpectrumShape, Classification) {
  Vector v(3);
  v << 1.0, 0.0, 0.0;
  EXPECT_EQ(spectrum_shape_class(v), SpectrumShape::Collapsed);
  v << 1.0, 1.0, 1.0;
  EXPECT_EQ(spectrum_shape_class(v), SpectrumShape::Diffuse);
  v << 10.0, 1.0, 1.0;
  EXPECT_EQ(spectrum_shape_class(v), SpectrumShape::Concentrated);
  v << 1.0, 10.0, 1.0;
  EXPECT_EQ(spectrum_shape_class(v), SpectrumShape::Concentrated);
  EXPECT_THROW((void)spectrum_shape_class(Vector::Ones(2)), ParameterError);
  EXPECT_THROW((void)spectrum_shape_class(Vector::Zero(3)), UndefinedRankError);
  for (auto s : {SpectrumShape::Collapsed, SpectrumShape::Concentrated, SpectrumShape::Diffuse}) {
    EXPECT_EQ(parse_spectrum_shape(to_string(s)), s);
  }
}

}  // namespace
}  // namespace klrhop
