#include "adstest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace adstest {

ResultMatrix::ResultMatrix(std::size_t blocks, std::size_t treatments)
    : ResultMatrix(blocks, treatments, std::vector<double>(blocks * treatments, 0.0)) {}

ResultMatrix::ResultMatrix(std::size_t blocks, std::size_t treatments, std::vector<double> values)
    : n_(blocks), k_(treatments), v_(std::move(values)) {
  if (n_ < 2 || k_ < 2) throw std::invalid_argument("result matrix needs at least 2 blocks and 2 treatments");
  if (v_.size() != n_ * k_) throw std::invalid_argument("result matrix is not rectangular");
}

ResultMatrix ResultMatrix::from_columns(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) throw std::invalid_argument("no treatments");
  const std::size_t n = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != n) throw std::invalid_argument("treatments have different block counts");
  }
  ResultMatrix m(n, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) m(i, j) = columns[j][i];
  }
  return m;
}

std::vector<double> ResultMatrix::column(std::size_t treatment) const {
  std::vector<double> c(n_);
  for (std::size_t i = 0; i < n_; ++i) c[i] = (*this)(i, treatment);
  return c;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

struct RankSums {
  std::vector<double> mean_ranks;
  double tie_term = 0.0;  // sum over blocks and tie groups of t^3 - t
};

RankSums rank_blocks(const ResultMatrix& m) {
  const std::size_t n = m.blocks();
  const std::size_t k = m.treatments();
  RankSums out;
  out.mean_ranks.assign(k, 0.0);
  std::vector<double> row(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) row[j] = m(i, j);
    const auto r = average_ranks(row);
    for (std::size_t j = 0; j < k; ++j) out.mean_ranks[j] += r[j];
    std::sort(row.begin(), row.end());
    for (std::size_t a = 0; a < k;) {
      std::size_t b = a;
      while (b + 1 < k && row[b + 1] == row[a]) ++b;
      const double t = static_cast<double>(b - a + 1);
      out.tie_term += t * t * t - t;
      a = b + 1;
    }
  }
  for (double& r : out.mean_ranks) r /= static_cast<double>(n);
  return out;
}

}  // namespace

FriedmanReport friedman(const ResultMatrix& m) {
  const double n = static_cast<double>(m.blocks());
  const double k = static_cast<double>(m.treatments());
  const RankSums rs = rank_blocks(m);
  FriedmanReport rep;
  rep.df = static_cast<int>(m.treatments()) - 1;
  rep.mean_ranks = rs.mean_ranks;
  rep.tie_correction = 1.0 - rs.tie_term / (n * k * (k * k - 1.0));

  const double centre = 0.5 * (k + 1.0);
  double ss = 0.0;
  for (double r : rs.mean_ranks) ss += (r - centre) * (r - centre);
  const double uncorrected = 12.0 * n / (k * (k + 1.0)) * ss;
  if (rep.tie_correction <= 0.0 || uncorrected == 0.0) {
    rep.statistic = 0.0;
    rep.p_value = 1.0;
    return rep;
  }
  rep.statistic = uncorrected / rep.tie_correction;
  rep.p_value = std::clamp(chi_square_sf(rep.statistic, rep.df), 0.0, 1.0);
  return rep;
}

std::vector<DunnPair> dunn(const ResultMatrix& m) {
  const std::size_t k = m.treatments();
  const double n = static_cast<double>(m.blocks());
  const auto mean_ranks = rank_blocks(m).mean_ranks;
  const double se = std::sqrt(static_cast<double>(k * (k + 1)) / (6.0 * n));
  const double comparisons = static_cast<double>(k * (k - 1) / 2);
  std::vector<DunnPair> out;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      DunnPair p;
      p.a = a;
      p.b = b;
      p.z = (mean_ranks[a] - mean_ranks[b]) / se;
      p.p_raw = normal_two_sided_p(p.z);
      p.p_adjusted = std::min(1.0, p.p_raw * comparisons);
      if (mean_ranks[a] > mean_ranks[b]) p.greater = a;
      if (mean_ranks[b] > mean_ranks[a]) p.greater = b;
      out.push_back(p);
    }
  }
  return out;
}

double auc_normalized(std::span<const double> times, std::span<const double> values, double t_max,
                      double v_max) {
  if (times.size() != values.size()) throw std::invalid_argument("auc: times and values differ in length");
  if (v_max == 0.0) return 0.0;
  if (v_max < 0.0 || t_max <= 0.0) throw std::invalid_argument("auc: t_max and v_max must be positive");
  double area = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    area += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
  }
  return area / (t_max * v_max);
}

double auc_normalized(std::span<const double> values, double v_max) {
  if (values.size() < 2) throw std::invalid_argument("auc: need at least two samples");
  std::vector<double> t(values.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  return auc_normalized(t, values, static_cast<double>(values.size() - 1), v_max);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: no values");
  Summary s;
  s.n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.sem = *s.std_dev / std::sqrt(static_cast<double>(s.n));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.median = quantile_sorted(sorted, 0.5);
  s.q1 = quantile_sorted(sorted, 0.25);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.iqr = s.q3 - s.q1;
  return s;
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("incomplete gamma: a > 0 and x >= 0 required");
  if (x == 0.0) return 1.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 10000;
  if (x < a + 1.0) {
    // Series for P(a, x).
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return std::clamp(1.0 - sum * std::exp(log_prefix), 0.0, 1.0);
  }
  // Lentz continued fraction for Q(a, x).
  constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::clamp(std::exp(log_prefix) * h, 0.0, 1.0);
}

double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

double normal_two_sided_p(double z) { return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0))); }

}  // namespace adstest
