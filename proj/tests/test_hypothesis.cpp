#include <gtest/gtest.h>

#include <random>

#include "stat_oracles.hpp"
#include "test_support.hpp"
#include "tglm/bench.hpp"
#include "tglm/glm.hpp"
#include "tglm/hypothesis.hpp"
#include "tglm/pipeline.hpp"
#include "tglm/staggered.hpp"

using namespace tglm;

namespace {

const std::vector<double> kX{0.5, 1.2, 2.0, 2.7, 3.1, 4.4, 5.0, 6.3};
const std::vector<double> kY{1.1, 2.3, 2.9, 4.2, 4.0, 5.9, 6.1, 7.8};

Dataset eight_points(double scale = 1.0) {
  Dataset d;
  d.group_count = 1;
  d.regressor_count = 1;
  for (std::size_t i = 0; i < kX.size(); ++i) {
    d.outcome.push_back(scale * kY[i]);
    d.regressors.push_back({kX[i]});
    d.group.push_back(0);
  }
  return d;
}

struct Fitted {
  DesignTensor x;
  OutcomeTensor y;
  FitResult fit;
  VarianceEstimate variance;
};

Fitted fit_all(const Dataset& d) {
  auto [x, y] = build_design(d);
  auto f = fit_detailed(x, y);
  auto v = estimate_variance(residuals(x, f.beta, y), x.params());
  return {std::move(x), std::move(y), std::move(f), std::move(v)};
}

ContrastTensor contrast(std::size_t h, std::size_t p, std::size_t g, std::vector<double> v) {
  return ContrastTensor(Tensor({h, p, g}, std::move(v)));
}

}  // namespace

TEST(ContrastTensor, RejectsAllZeroRow) {
  try {
    contrast(2, 2, 1, {1, 0, 0, 0});
    FAIL();
  } catch (const IndexedError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::all_zero_hypothesis);
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(ContrastValue, SelectorPicksOneCoefficient) {
  // beta[a, g]: b1 = 1, b2 = 2, m1 = 3, m2 = 4.
  const BetaTensor beta{Tensor({2, 2}, {1, 2, 3, 4})};
  EXPECT_EQ(contrast_value(contrast(1, 2, 2, {0, 0, 1, 0}), beta)[0], 3.0);
}

TEST(ContrastValue, DenseTwoHypothesisLayout) {
  // Component layout C[h][a][g] with beta[0,0] = b1, beta[1,0] = m1,
  // beta[0,1] = b2, beta[1,1] = m2.
  const double b1 = 0.7, m1 = -1.3, b2 = 2.2, m2 = 0.4;
  const BetaTensor beta{Tensor({2, 2}, {b1, b2, m1, m2})};
  const double cb1[2] = {1.5, -0.25}, cm1[2] = {2.0, 3.0}, cb2[2] = {-1.0, 0.5}, cm2[2] = {0.75, -4.0};
  std::vector<double> c(8);
  for (std::size_t h = 0; h < 2; ++h) {
    c[(h * 2 + 0) * 2 + 0] = cb1[h];
    c[(h * 2 + 1) * 2 + 0] = cm1[h];
    c[(h * 2 + 0) * 2 + 1] = cb2[h];
    c[(h * 2 + 1) * 2 + 1] = cm2[h];
  }
  const auto g = contrast_value(contrast(2, 2, 2, c), beta);
  for (std::size_t h = 0; h < 2; ++h) {
    const double expanded = cb1[h] * b1 + cm1[h] * m1 + cb2[h] * b2 + cm2[h] * m2;
    EXPECT_NEAR(g[h], expanded, 1e-12 * std::abs(expanded));
  }
}

TEST(ContrastValue, ShapeMismatch) {
  const BetaTensor beta{Tensor({2, 3}, {1, 2, 3, 4, 5, 6})};
  EXPECT_THROW(contrast_value(contrast(1, 2, 2, {0, 0, 1, 0}), beta), Error);
}

TEST(ContrastValue, LinearInContrastAndBeta) {
  std::mt19937_64 rng(1);
  const auto c1 = tglm::testing::random_tensor(rng, {3, 2, 4});
  const auto c2 = tglm::testing::random_tensor(rng, {3, 2, 4});
  const auto b1 = tglm::testing::random_tensor(rng, {2, 4});
  const auto b2 = tglm::testing::random_tensor(rng, {2, 4});
  std::vector<double> cs(c1.size()), bs(b1.size());
  for (std::size_t i = 0; i < cs.size(); ++i) cs[i] = 2.0 * c1.data()[i] - 3.0 * c2.data()[i];
  for (std::size_t i = 0; i < bs.size(); ++i) bs[i] = 0.5 * b1.data()[i] + 1.5 * b2.data()[i];

  const auto g_c = contrast_value(ContrastTensor(Tensor(c1.shape(), cs)), BetaTensor{b1});
  const auto g_c1 = contrast_value(ContrastTensor(c1), BetaTensor{b1});
  const auto g_c2 = contrast_value(ContrastTensor(c2), BetaTensor{b1});
  const auto g_b = contrast_value(ContrastTensor(c1), BetaTensor{Tensor(b1.shape(), bs)});
  const auto g_b2 = contrast_value(ContrastTensor(c1), BetaTensor{b2});
  for (std::size_t h = 0; h < 3; ++h) {
    const double lin_c = 2.0 * g_c1[h] - 3.0 * g_c2[h];
    EXPECT_NEAR(g_c[h], lin_c, 1e-12 * std::max({std::abs(2.0 * g_c1[h]), std::abs(3.0 * g_c2[h]), 1.0}));
    const double lin_b = 0.5 * g_c1[h] + 1.5 * g_b2[h];
    EXPECT_NEAR(g_b[h], lin_b, 1e-12 * std::max({std::abs(0.5 * g_c1[h]), std::abs(1.5 * g_b2[h]), 1.0}));
  }
}

TEST(TStatistics, SymmetricDataGivesZero) {
  Dataset d = eight_points();
  Dataset two = d;
  two.group_count = 2;
  for (std::size_t i = 0; i < d.size(); ++i) {
    two.outcome.push_back(d.outcome[i]);
    two.regressors.push_back(d.regressors[i]);
    two.group.push_back(1);
  }
  const auto f = fit_all(two);
  const auto c = contrast(1, 2, 2, {0, 0, 1, -1});
  EXPECT_EQ(contrast_value(c, f.fit.beta)[0], 0.0);
  const auto r = t_statistics(c, f.fit.beta, f.fit.inverse, f.variance);
  EXPECT_EQ(r.t[0], 0.0);
  EXPECT_EQ(r.p[0], 1.0);
}

TEST(TStatistics, MatchesClosedFormSimpleRegression) {
  const auto f = fit_all(eight_points());
  const auto r = t_statistics(contrast(1, 2, 1, {0, 1}), f.fit.beta, f.x, f.variance);
  const double want = tglm::testing::simple_regression_slope_t(kX, kY);
  EXPECT_NEAR(r.t[0], want, 1e-10 * std::abs(want));
  EXPECT_EQ(r.df, 6);
  EXPECT_GT(r.standard_error[0], 0.0);
}

TEST(TStatistics, InvariantToOutcomeScale) {
  const auto base = fit_all(eight_points());
  const auto c = contrast(2, 2, 1, {0, 1, 1, -0.5});
  const auto t0 = t_statistics(c, base.fit.beta, base.fit.inverse, base.variance);
  for (double scale : {0.5, 3.0, 100.0}) {
    const auto f = fit_all(eight_points(scale));
    const auto t = t_statistics(c, f.fit.beta, f.fit.inverse, f.variance);
    for (std::size_t h = 0; h < 2; ++h) EXPECT_NEAR(t.t[h], t0.t[h], 1e-10 * std::abs(t0.t[h]));
  }
}

TEST(TStatistics, InvariantToContrastScale) {
  std::mt19937_64 rng(6);
  const auto f = fit_all(synthetic_dataset(rng(), {12, 20}, 2));
  const auto c = tglm::testing::random_tensor(rng, {3, 3, 2});
  const auto t0 = t_statistics(ContrastTensor(c), f.fit.beta, f.fit.inverse, f.variance);
  std::vector<double> scaled(c.data().begin(), c.data().end());
  for (std::size_t i = 0; i < 6; ++i) scaled[6 + i] *= 7.5;  // hypothesis 1 only
  const auto t1 = t_statistics(ContrastTensor(Tensor(c.shape(), scaled)), f.fit.beta, f.fit.inverse, f.variance);
  for (std::size_t h = 0; h < 3; ++h) EXPECT_NEAR(t1.t[h], t0.t[h], 1e-10 * std::abs(t0.t[h]));
}

TEST(TStatistics, MatchesStaggeredFormulation) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t groups = 0, r = 0;
    std::vector<std::size_t> n;
    const auto d = random_instance(rng, groups, r, n);
    const auto c = random_contrast(rng, r + 1, groups);
    const auto f = fit_all(d);
    const auto t = t_statistics(c, f.fit.beta, f.fit.inverse, f.variance);
    const auto s = staggered_t_statistics(c, fit_staggered_detailed(build_staggered(d)));
    ASSERT_LT(max_relative_deviation(t.t, s.t), 1e-9);
    EXPECT_EQ(t.df, s.df);
  }
}

TEST(FStatistic, SingleHypothesisEqualsTSquared) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = fit_all(synthetic_dataset(rng(), {15, 9, 11}, 1));
    const auto c = ContrastTensor(tglm::testing::random_tensor(rng, {1, 2, 3}));
    const double t = t_statistics(c, f.fit.beta, f.fit.inverse, f.variance).t[0];
    const double F = f_statistic(c, f.fit.beta, f.fit.inverse, f.variance);
    EXPECT_NEAR(F, t * t, 1e-10 * t * t);
  }
}

TEST(FStatistic, DuplicateRowsAreSingular) {
  const auto f = fit_all(eight_points());
  try {
    f_statistic(contrast(2, 2, 1, {0, 1, 0, 1}), f.fit.beta, f.x, f.variance);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular_contrast_system);
  }
}

TEST(FStatistic, MatchesStaggeredCovariance) {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 10; ++trial) {
    const auto d = synthetic_dataset(rng(), {14, 22, 9}, 2);
    const auto c = ContrastTensor(tglm::testing::random_tensor(rng, {2, 3, 3}));
    const auto f = fit_all(d);
    const double F = f_statistic(c, f.fit.beta, f.fit.inverse, f.variance);

    // Brute force from the staggered covariance sigma^2 (X^T X)^{-1}:
    // F = (Cb)^T (C V C^T)^{-1} (Cb) / H with a closed-form 2x2 inverse.
    const auto sf = fit_staggered_detailed(build_staggered(d));
    const auto rows = flatten_contrast(c);
    const auto n = sf.coef.size();
    double g[2] = {0, 0}, m[2][2] = {{0, 0}, {0, 0}};
    for (int a = 0; a < 2; ++a) {
      for (std::size_t i = 0; i < n; ++i) g[a] += rows[a][i] * sf.coef[i];
      for (int b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) m[a][b] += rows[a][i] * sf.sigma2 * sf.normal_inverse(i, j) * rows[b][j];
    }
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    const double quad = (g[0] * (m[1][1] * g[0] - m[0][1] * g[1]) + g[1] * (-m[1][0] * g[0] + m[0][0] * g[1])) / det;
    const double want = quad / 2.0;
    EXPECT_NEAR(F, want, 1e-9 * want);
    EXPECT_NEAR(staggered_f_statistic(c, sf), want, 1e-9 * want);
  }
}

TEST(TPValue, Basics) {
  EXPECT_EQ(t_pvalue(0.0, 5), 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-6, 6);
  for (int i = 0; i < 100; ++i) {
    const double t = u(rng);
    const long long df = 1 + static_cast<long long>(rng() % 40);
    EXPECT_EQ(t_pvalue(t, df), t_pvalue(-t, df));
    const double p = t_pvalue(t, df);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  EXPECT_THROW(t_pvalue(1.0, 0), Error);
}

TEST(TPValue, CriticalValueAgainstQuadrature) {
  const double oracle = tglm::testing::two_sided_p_by_quadrature(2.2281, 10.0);
  EXPECT_NEAR(oracle, 0.050, 5e-4);
  const double p = t_pvalue(2.2281, 10);
  EXPECT_NEAR(p, 0.050, 5e-4);
  EXPECT_NEAR(p, oracle, 1e-9);
}

TEST(TPValue, AgreesWithQuadratureAcrossDf) {
  for (long long df : {1, 2, 3, 7, 30, 200}) {
    for (double t : {0.3, 1.0, 2.5, 4.0}) {
      EXPECT_NEAR(t_pvalue(t, df), tglm::testing::two_sided_p_by_quadrature(t, static_cast<double>(df)), 1e-9)
          << "df=" << df << " t=" << t;
    }
  }
}

TEST(TPValue, MonotoneInMagnitude) {
  for (long long df : {1, 4, 25}) {
    double prev = 2.0;
    for (double t = 0.0; t <= 8.0; t += 0.05) {
      const double p = t_pvalue(t, df);
      EXPECT_LT(p, prev) << "df=" << df << " t=" << t;
      prev = p;
    }
  }
}

TEST(FPValue, MatchesTForSingleNumeratorDf) {
  for (double t : {0.5, 1.7, 3.2}) EXPECT_NEAR(f_pvalue(t * t, 1, 12), t_pvalue(t, 12), 1e-12);
}
