#include "srrw/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "srrw/numeric.hpp"

namespace srrw {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

Summary SampleSummary::finalize() const {
  Summary s;
  s.count = values_.size();
  if (values_.empty()) return s;
  std::vector<double> v = values_;
  std::sort(v.begin(), v.end());
  CompensatedSum sum;
  for (double x : v) sum.add(x);
  s.mean = sum.value() / static_cast<double>(v.size());
  if (v.size() > 1) {
    CompensatedSum sq;
    for (double x : v) sq.add((x - s.mean) * (x - s.mean));
    s.std = std::sqrt(sq.value() / static_cast<double>(v.size() - 1));
  }
  s.median = quantile_sorted(v, 0.5);
  s.q05 = quantile_sorted(v, 0.05);
  s.q95 = quantile_sorted(v, 0.95);
  s.ci_half = 1.959963984540054 * s.std / std::sqrt(static_cast<double>(v.size()));
  return s;
}

double chi_square_sf(double statistic, int dof) {
  if (dof < 1) throw std::invalid_argument("chi-square needs at least one degree of freedom");
  if (statistic <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

namespace {

TwoSampleResult chi_square_from_counts(const std::vector<std::pair<double, double>>& cells,
                                       double na, double nb) {
  // Pool adjacent cells until both expected counts reach 5.
  std::vector<std::pair<double, double>> pooled;
  std::pair<double, double> acc{0.0, 0.0};
  auto ready = [&](const std::pair<double, double>& c) {
    const double tot = c.first + c.second;
    return tot * na / (na + nb) >= 5.0 && tot * nb / (na + nb) >= 5.0;
  };
  for (const auto& c : cells) {
    acc.first += c.first;
    acc.second += c.second;
    if (ready(acc)) {
      pooled.push_back(acc);
      acc = {0.0, 0.0};
    }
  }
  if (acc.first + acc.second > 0.0) {
    if (pooled.empty()) {
      pooled.push_back(acc);
    } else {
      pooled.back().first += acc.first;
      pooled.back().second += acc.second;
    }
  }
  TwoSampleResult r;
  r.bins = pooled.size();
  r.dof = static_cast<int>(pooled.size()) - 1;
  if (r.dof < 1) return r;
  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  CompensatedSum stat;
  for (const auto& [a, b] : pooled) {
    const double diff = ka * a - kb * b;
    stat.add(diff * diff / (a + b));
  }
  r.statistic = stat.value();
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

}  // namespace

TwoSampleResult chi_square_two_sample(std::span<const double> a, std::span<const double> b,
                                      int d) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (a.empty() || b.empty() || a.size() % d != 0 || b.size() % d != 0) {
    throw std::invalid_argument("samples must hold a positive whole number of points");
  }
  std::map<std::vector<double>, std::pair<double, double>> cells;
  for (std::size_t k = 0; k < a.size(); k += d) {
    cells[std::vector<double>(a.begin() + k, a.begin() + k + d)].first += 1.0;
  }
  for (std::size_t k = 0; k < b.size(); k += d) {
    cells[std::vector<double>(b.begin() + k, b.begin() + k + d)].second += 1.0;
  }
  std::vector<std::pair<double, double>> ordered;
  ordered.reserve(cells.size());
  for (const auto& [key, c] : cells) ordered.push_back(c);
  return chi_square_from_counts(ordered, static_cast<double>(a.size() / d),
                                static_cast<double>(b.size() / d));
}

TwoSampleResult chi_square_two_sample_continuous(std::span<const double> a,
                                                 std::span<const double> b, int bins) {
  if (a.empty() || b.empty()) throw std::invalid_argument("samples must be nonempty");
  if (bins < 2) throw std::invalid_argument("need at least 2 bins");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) {
    const double e = quantile_sorted(pooled, static_cast<double>(k) / bins);
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  std::vector<std::pair<double, double>> cells(edges.size() + 1, {0.0, 0.0});
  auto cell_of = [&](double x) {
    return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) -
                                    edges.begin());
  };
  for (double x : a) cells[cell_of(x)].first += 1.0;
  for (double x : b) cells[cell_of(x)].second += 1.0;
  return chi_square_from_counts(cells, static_cast<double>(a.size()),
                                static_cast<double>(b.size()));
}

}  // namespace srrw
