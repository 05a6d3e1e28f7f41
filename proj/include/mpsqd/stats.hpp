#pragma once

// Descriptive statistics for experiment reports: mean, sample standard
// deviation, linearly interpolated quantiles (the classic "type 7" rule used
// by most plotting stacks), Tukey box-plot whiskers, and the Hartree →
// kcal/mol conversion.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mpsqd/errors.hpp"

namespace mpsqd {

inline constexpr double kKcalPerHartree = 627.5094740631;

inline double to_kcal_per_mol(double hartree) { return hartree * kKcalPerHartree; }

// Linear interpolation between order statistics at rank h = (n-1)p.
// `sorted` must be ascending and nonempty; p in [0, 1].
inline double quantile_type7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("quantile probability must lie in [0, 1]");
  const std::size_t n = sorted.size();
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct StatsSummary {
  long long count = 0;           // n = 1 marks the std-undefined edge case
  double mean = 0.0;
  double stddev = 0.0;           // sample (n-1) standard deviation; 0 when n = 1
  double minimum = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double maximum = 0.0;
  double iqr = 0.0;
  double whisker_low = 0.0;      // smallest value >= q1 - 1.5 * iqr
  double whisker_high = 0.0;     // largest value <= q3 + 1.5 * iqr
  std::vector<double> outliers;  // exactly the values beyond the whiskers, ascending

  friend bool operator==(const StatsSummary&, const StatsSummary&) = default;
};

inline StatsSummary summarize(std::vector<double> values) {
  if (values.empty()) throw InputError("cannot summarize an empty group");
  std::sort(values.begin(), values.end());
  StatsSummary s;
  s.count = static_cast<long long>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  s.minimum = values.front();
  s.maximum = values.back();
  s.q1 = quantile_type7(values, 0.25);
  s.median = quantile_type7(values, 0.50);
  s.q3 = quantile_type7(values, 0.75);
  s.iqr = s.q3 - s.q1;
  const double fence_low = s.q1 - 1.5 * s.iqr;
  const double fence_high = s.q3 + 1.5 * s.iqr;
  s.whisker_low = s.maximum;   // overwritten by the first in-fence value
  s.whisker_high = s.minimum;
  for (double v : values) {
    if (v >= fence_low && v <= fence_high) {
      s.whisker_low = std::min(s.whisker_low, v);
      s.whisker_high = std::max(s.whisker_high, v);
    } else {
      s.outliers.push_back(v);
    }
  }
  return s;
}

}  // namespace mpsqd
