#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>

#include "../support/oracles.hpp"
#include "adstest/stats.hpp"

using namespace adstest;

namespace {

ResultMatrix to_matrix(const oracle::Matrix& m) {
  std::vector<double> flat;
  for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
  return ResultMatrix(m.size(), m.front().size(), flat);
}

ResultMatrix ordered(std::size_t n) {
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) v.insert(v.end(), {1.0 + i, 2.0 + i, 3.0 + i});
  return ResultMatrix(n, 3, v);
}

}  // namespace

TEST(Matrix, RejectsDegenerateShapes) {
  EXPECT_THROW(ResultMatrix(1, 3), std::invalid_argument);
  EXPECT_THROW(ResultMatrix(3, 1), std::invalid_argument);
  EXPECT_THROW(ResultMatrix(2, 2, {1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(ResultMatrix::from_columns({{1, 2}, {1}}), std::invalid_argument);
  const ResultMatrix m = ResultMatrix::from_columns({{1, 2}, {3, 4}});
  EXPECT_EQ(m(1, 0), 2.0);
  EXPECT_EQ(m.column(1), (std::vector<double>{3, 4}));
}

TEST(Ranks, TiesShareMean) {
  const std::vector<double> v{10, 20, 10, 5};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{2.5, 4, 2.5, 1}));
}

TEST(Friedman, AllRowsIdentical) {
  const auto f = friedman(ResultMatrix(5, 4, std::vector<double>(20, 3.0)));
  EXPECT_EQ(f.statistic, 0.0);
  EXPECT_EQ(f.p_value, 1.0);
}

TEST(Friedman, StrictOrderingClosedForm) {
  const auto f = friedman(ordered(20));
  EXPECT_EQ(f.statistic, 40.0);
  EXPECT_EQ(f.df, 2);
  EXPECT_NEAR(f.p_value, 2.061153622438558e-9, 1e-18);
  EXPECT_EQ(f.mean_ranks, (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(f.tie_correction, 1.0);
}

TEST(Friedman, HandMatrixMatchesOracle) {
  const oracle::Matrix m{{3, 1, 2}, {2, 2, 1}, {9, 7, 8}};
  const auto f = friedman(to_matrix(m));
  const auto o = oracle::friedman(m);
  EXPECT_NEAR(f.statistic, o.statistic, 1e-9);
  EXPECT_NEAR(f.p_value, o.p, 1e-9);
}

TEST(Friedman, RandomMatricesMatchOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 12, k = 2 + rng() % 5;
    const auto m = oracle::random_matrix(rng, n, k, 2 + static_cast<int>(rng() % 6));
    const auto f = friedman(to_matrix(m));
    const auto o = oracle::friedman(m);
    EXPECT_NEAR(f.statistic, o.statistic, 1e-9) << "trial " << trial;
    EXPECT_NEAR(f.p_value, o.p, 1e-9) << "trial " << trial;
    for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(f.mean_ranks[j], o.mean_ranks[j], 1e-12);
    EXPECT_GE(f.p_value, 0.0);
    EXPECT_LE(f.p_value, 1.0);
  }
}

TEST(Dunn, IdenticalTreatmentsAllOne) {
  for (const auto& p : dunn(ResultMatrix(6, 3, std::vector<double>(18, 1.0)))) {
    EXPECT_EQ(p.p_adjusted, 1.0);
    EXPECT_FALSE(p.greater.has_value());
  }
}

TEST(Dunn, ExtremePairOfStrictOrdering) {
  const auto pairs = dunn(ordered(20));
  ASSERT_EQ(pairs.size(), 3u);
  const auto& ext = pairs[1];
  EXPECT_EQ(ext.a, 0u);
  EXPECT_EQ(ext.b, 2u);
  EXPECT_NEAR(std::abs(ext.z), 2.0 / std::sqrt(12.0 / 120.0), 1e-12);
  EXPECT_LT(ext.p_adjusted, 1e-4);
  EXPECT_EQ(ext.greater, 2u);
}

TEST(Dunn, TwoTreatmentsSinglePair) {
  EXPECT_EQ(dunn(ResultMatrix::from_columns({{1, 2, 3}, {2, 3, 4}})).size(), 1u);
}

TEST(Dunn, RandomMatricesMatchOracle) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 12, k = 2 + rng() % 5;
    const auto m = oracle::random_matrix(rng, n, k, 2 + static_cast<int>(rng() % 6));
    const auto got = dunn(to_matrix(m));
    const auto want = oracle::dunn(m);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].a, want[i].a);
      EXPECT_EQ(got[i].b, want[i].b);
      EXPECT_NEAR(got[i].z, want[i].z, 1e-9);
      EXPECT_NEAR(got[i].p_adjusted, want[i].p_adj, 1e-9);
      EXPECT_LE(got[i].p_adjusted, 1.0);
      if (got[i].greater) EXPECT_EQ(*got[i].greater, want[i].z > 0 ? want[i].a : want[i].b);
    }
  }
}

TEST(RankInvariance, ShiftMonotoneAndPermutation) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = oracle::random_matrix(rng, 8, 4, 5);
    oracle::Matrix shifted = m, cubed = m, permuted = m;
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        shifted[i][j] += 17.5;
        cubed[i][j] = std::exp(m[i][j]);
      }
      std::rotate(permuted[i].begin(), permuted[i].begin() + 1, permuted[i].end());
    }
    const auto base = friedman(to_matrix(m));
    EXPECT_EQ(friedman(to_matrix(shifted)).statistic, base.statistic);
    EXPECT_EQ(friedman(to_matrix(cubed)).statistic, base.statistic);
    EXPECT_NEAR(friedman(to_matrix(permuted)).statistic, base.statistic, 1e-12);
    const auto d0 = dunn(to_matrix(m));
    const auto d1 = dunn(to_matrix(shifted));
    for (std::size_t i = 0; i < d0.size(); ++i) EXPECT_EQ(d0[i].p_adjusted, d1[i].p_adjusted);
  }
}

TEST(Auc, ConstantHalf) {
  EXPECT_DOUBLE_EQ(auc_normalized(std::vector<double>(13, 0.5), 1.0), 0.5);
}

TEST(Auc, LinearRamp) {
  std::vector<double> v;
  for (int i = 0; i <= 12; ++i) v.push_back(i / 12.0);
  EXPECT_NEAR(auc_normalized(v, 1.0), 0.5, 1e-15);
}

TEST(Auc, StepBetweenMiddleSamples) {
  EXPECT_DOUBLE_EQ(auc_normalized(std::vector<double>{0, 0, 1, 1}, 1.0), 0.5);
  std::vector<double> v(12, 0.0);
  std::fill(v.begin() + 6, v.end(), 1.0);
  EXPECT_DOUBLE_EQ(auc_normalized(v, 1.0), 0.5);
}

TEST(Auc, ZeroMaximumIsZero) {
  EXPECT_EQ(auc_normalized(std::vector<double>(5, 0.0), 0.0), 0.0);
}

TEST(Auc, OneOnlyForConstantMaximum) {
  EXPECT_DOUBLE_EQ(auc_normalized(std::vector<double>(6, 4.0), 4.0), 1.0);
  EXPECT_LT(auc_normalized(std::vector<double>{4, 4, 3.99, 4}, 4.0), 1.0);
}

TEST(Auc, LinearInSeries) {
  const std::vector<double> a{0, 1, 3, 2}, b{2, 2, 0, 5};
  std::vector<double> sum(4);
  for (int i = 0; i < 4; ++i) sum[i] = 2 * a[i] + 3 * b[i];
  EXPECT_NEAR(auc_normalized(sum, 10.0), 2 * auc_normalized(a, 10.0) + 3 * auc_normalized(b, 10.0), 1e-14);
}

TEST(Auc, RandomSeriesMatchOracle) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> t{0}, v{u(rng)};
    for (int i = 0; i < 12; ++i) {
      t.push_back(t.back() + u(rng));
      v.push_back(u(rng));
    }
    const double vmax = *std::max_element(v.begin(), v.end());
    EXPECT_NEAR(auc_normalized(t, v, t.back(), vmax), oracle::auc(t, v, t.back(), vmax), 1e-12);
  }
}

TEST(Summary, ConstantValues) {
  const auto s = summarize(std::vector<double>{2, 2, 2});
  EXPECT_EQ(s.mean, 2.0);
  EXPECT_EQ(*s.std_dev, 0.0);
  EXPECT_EQ(*s.sem, 0.0);
}

TEST(Summary, OneToFour) {
  const auto s = summarize(std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_NEAR(*s.std_dev, 1.2909944487358056, 1e-15);
  EXPECT_NEAR(*s.sem, 0.6454972243679028, 1e-15);
  EXPECT_EQ(s.median, 2.5);
  EXPECT_EQ(s.q1, 1.75);
  EXPECT_EQ(s.q3, 3.25);
  EXPECT_EQ(s.iqr, 1.5);
}

TEST(Summary, SingletonHasNoSpread) {
  const auto s = summarize(std::vector<double>{7});
  EXPECT_EQ(s.mean, 7.0);
  EXPECT_FALSE(s.std_dev.has_value());
  EXPECT_FALSE(s.sem.has_value());
}

TEST(Summary, RandomSamplesMatchOracle) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> d(3, 2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(2 + rng() % 30);
    for (auto& v : x) v = d(rng);
    const auto s = summarize(x);
    const auto o = oracle::summarize(x);
    EXPECT_NEAR(s.mean, o.mean, 1e-12);
    EXPECT_NEAR(*s.std_dev, o.std_dev, 1e-12);
    EXPECT_NEAR(*s.sem, o.sem, 1e-12);
    EXPECT_NEAR(s.median, o.median, 1e-12);
    EXPECT_NEAR(s.iqr, o.iqr, 1e-12);
  }
}

TEST(Tails, IncompleteGammaMatchesBoost) {
  for (double a : {0.5, 1.0, 1.5, 2.0, 5.0, 12.5, 40.0}) {
    for (double x : {1e-6, 0.1, 0.5, 1.0, 3.0, 10.0, 30.0, 80.0, 200.0}) {
      const double want = boost::math::gamma_q(a, x);
      const double got = regularized_gamma_q(a, x);
      if (want > 1e-300) EXPECT_LE(std::abs(got - want) / want, 1e-10) << a << " " << x;
    }
  }
}

TEST(Tails, ChiSquareAndNormal) {
  EXPECT_EQ(chi_square_sf(0.0, 3), 1.0);
  EXPECT_NEAR(chi_square_sf(40.0, 2), std::exp(-20.0), 1e-22);
  boost::math::normal z01;
  for (double z : {0.0, 0.3, 1.0, 1.96, 3.5, 6.32, 9.0}) {
    const double want = 2 * boost::math::cdf(boost::math::complement(z01, z));
    EXPECT_LE(std::abs(normal_two_sided_p(z) - want), 1e-12 * std::max(want, 1e-300) + 1e-300) << z;
    EXPECT_EQ(normal_two_sided_p(-z), normal_two_sided_p(z));
  }
}
