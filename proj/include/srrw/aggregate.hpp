#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace srrw {

/// Finished statistics of one metric over replicas.
///   std          sample standard deviation (divisor m - 1; 0 when m = 1)
///   q05 / q95    quantiles by linear interpolation between order statistics
///   ci_half      1.959963984540054 * std / sqrt(m), the 95% normal interval
struct Summary {
  std::uint64_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double ci_half = 0.0;
};

/// Keeps every value. finalize() sorts before reducing, so the result does
/// not depend on the order of add() or merge() calls.
class SampleSummary {
 public:
  void add(double v) { values_.push_back(v); }
  void merge(const SampleSummary& other) {
    values_.insert(values_.end(), other.values_.begin(), other.values_.end());
  }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }

  Summary finalize() const;

 private:
  std::vector<double> values_;
};

/// Quantile p of sorted data, linear interpolation at position p (m - 1).
double quantile_sorted(std::span<const double> sorted, double p);
double median(std::vector<double> values);
double quantile(std::vector<double> values, double p);

struct TwoSampleResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::size_t bins = 0;
};

/// Chi-square test of homogeneity for two samples of discrete-valued points
/// (rows of d coordinates). Distinct values are sorted lexicographically and
/// adjacent ones pooled until every bin expects at least 5 observations in
/// each sample.
TwoSampleResult chi_square_two_sample(std::span<const double> a, std::span<const double> b,
                                      int d = 1);

/// Same test for continuous scalars: bins are `bins` equal-count cells of the
/// pooled sample.
TwoSampleResult chi_square_two_sample_continuous(std::span<const double> a,
                                                 std::span<const double> b, int bins = 50);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, int dof);

}  // namespace srrw
