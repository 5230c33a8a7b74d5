#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adstest {

/// n blocks (repetitions) by k treatments, row-major.
class ResultMatrix {
 public:
  ResultMatrix(std::size_t blocks, std::size_t treatments);
  ResultMatrix(std::size_t blocks, std::size_t treatments, std::vector<double> values);
  /// One column per treatment; all columns must have equal length.
  static ResultMatrix from_columns(const std::vector<std::vector<double>>& columns);

  std::size_t blocks() const { return n_; }
  std::size_t treatments() const { return k_; }
  double& operator()(std::size_t block, std::size_t treatment) { return v_[block * k_ + treatment]; }
  double operator()(std::size_t block, std::size_t treatment) const { return v_[block * k_ + treatment]; }
  std::vector<double> column(std::size_t treatment) const;

 private:
  std::size_t n_;
  std::size_t k_;
  std::vector<double> v_;
};

/// Ranks 1..m of `values`; tied values share their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

struct FriedmanReport {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::vector<double> mean_ranks;
  /// 1 - sum(t^3 - t) / (n k (k^2 - 1)); the uncorrected statistic is divided by it.
  double tie_correction = 1.0;
};

/// Tie-corrected Friedman chi-square with a chi-square(k-1) tail.
FriedmanReport friedman(const ResultMatrix& m);

struct DunnPair {
  std::size_t a = 0;
  std::size_t b = 0;
  double z = 0.0;  // (Rbar_a - Rbar_b) / se
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  /// Treatment with the higher mean rank, empty when the mean ranks are equal.
  std::optional<std::size_t> greater;
};

/// Pairwise two-sided tests on Friedman mean ranks, Bonferroni adjusted.
std::vector<DunnPair> dunn(const ResultMatrix& m);

/// Trapezoidal area of (times, values) divided by t_max * v_max; 0 when v_max is 0.
double auc_normalized(std::span<const double> times, std::span<const double> values, double t_max,
                      double v_max);
/// Same on an evenly spaced grid spanning [0, t_max].
double auc_normalized(std::span<const double> values, double v_max);

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> std_dev;  // n - 1 denominator, absent for n = 1
  std::optional<double> sem;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
};

inline constexpr const char* kQuartileMethod = "linear interpolation between order statistics (h = (n-1)p)";

Summary summarize(std::span<const double> values);

/// Linear-interpolation quantile of already sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

/// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);
double chi_square_sf(double x, double df);
/// Two-sided standard normal tail 2 * P(Z > |z|).
double normal_two_sided_p(double z);

}  // namespace adstest
