// Brute-force reference implementations for the statistics module. They share
// no code with the library: ranks by pairwise counting, tails from Boost.Math.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/statistics/univariate_statistics.hpp>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;  // rows = blocks

// Rank of x among row: (#smaller) + (#equal + 1) / 2, counting x itself.
inline double pairwise_rank(const std::vector<double>& row, std::size_t j) {
  double smaller = 0, equal = 0;
  for (double v : row) {
    if (v < row[j]) smaller += 1;
    else if (v == row[j]) equal += 1;
  }
  return smaller + (equal + 1) / 2;
}

struct Friedman {
  double statistic;
  double p;
  std::vector<double> mean_ranks;
};

inline Friedman friedman(const Matrix& m) {
  const double n = static_cast<double>(m.size());
  const std::size_t k = m.front().size();
  const double kd = static_cast<double>(k);
  std::vector<double> sums(k, 0.0);
  double tie_term = 0.0;
  for (const auto& row : m) {
    for (std::size_t j = 0; j < k; ++j) sums[j] += pairwise_rank(row, j);
    std::vector<double> sorted = row;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < k;) {
      std::size_t e = i;
      while (e < k && sorted[e] == sorted[i]) ++e;
      const double t = static_cast<double>(e - i);
      tie_term += t * t * t - t;
      i = e;
    }
  }
  // Sum-of-squared-rank-totals form, algebraically distinct from the library.
  double ssq = 0.0;
  for (double s : sums) ssq += s * s;
  double chi = 12.0 / (n * kd * (kd + 1)) * ssq - 3.0 * n * (kd + 1);
  const double corr = 1.0 - tie_term / (n * kd * (kd * kd - 1));
  Friedman f;
  for (double s : sums) f.mean_ranks.push_back(s / n);
  if (corr <= 0 || std::abs(chi) < 1e-12) {
    f.statistic = 0.0;
    f.p = 1.0;
    return f;
  }
  chi /= corr;
  f.statistic = chi;
  f.p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(kd - 1), chi));
  return f;
}

struct DunnPair {
  std::size_t a, b;
  double z, p_adj;
};

inline std::vector<DunnPair> dunn(const Matrix& m) {
  const Friedman f = friedman(m);
  const double n = static_cast<double>(m.size());
  const std::size_t k = m.front().size();
  const double kd = static_cast<double>(k);
  const double se = std::sqrt(kd * (kd + 1) / (6 * n));
  const double pairs = kd * (kd - 1) / 2;
  boost::math::normal z01;
  std::vector<DunnPair> out;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const double z = (f.mean_ranks[a] - f.mean_ranks[b]) / se;
      const double p = 2 * boost::math::cdf(boost::math::complement(z01, std::abs(z)));
      out.push_back({a, b, z, std::min(1.0, p * pairs)});
    }
  }
  return out;
}

// Exact integral of the piecewise-linear interpolant via Simpson per segment.
inline double auc(const std::vector<double>& t, const std::vector<double>& v, double t_max, double v_max) {
  if (v_max == 0) return 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double h = t[i + 1] - t[i];
    area += h / 6 * (v[i] + 4 * (v[i] + v[i + 1]) / 2 + v[i + 1]);
  }
  return area / (t_max * v_max);
}

// Hyndman-Fan type 7 written with 1-based positions.
inline double quantile7(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  const double pos = 1 + (static_cast<double>(x.size()) - 1) * p;
  const double lo = std::floor(pos);
  const auto i = static_cast<std::size_t>(lo);
  if (i >= x.size()) return x.back();
  return x[i - 1] + (pos - lo) * (x[i] - x[i - 1]);
}

struct Summary {
  double mean, std_dev, sem, median, iqr;
};

inline Summary summarize(std::vector<double> x) {
  Summary s;
  s.mean = boost::math::statistics::mean(x);
  s.std_dev = x.size() > 1 ? std::sqrt(boost::math::statistics::sample_variance(x)) : 0.0;
  s.sem = s.std_dev / std::sqrt(static_cast<double>(x.size()));
  s.iqr = quantile7(x, 0.75) - quantile7(x, 0.25);
  s.median = boost::math::statistics::median(x);
  return s;
}

// Small matrices with frequent ties: integer entries in [0, levels).
inline Matrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t k, int levels) {
  std::uniform_int_distribution<int> d(0, levels - 1);
  Matrix m(n, std::vector<double>(k));
  for (auto& row : m) {
    for (auto& v : row) v = d(rng);
  }
  return m;
}

inline double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace oracle
