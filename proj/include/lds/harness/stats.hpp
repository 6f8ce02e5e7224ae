#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lds/core/error.hpp"

namespace lds::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct PairedTest {
  double mean_difference = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
  double p_one_sided = 1.0;  // H1: mean(a - b) > 0
};

/// Paired test on a - b with a normal reference distribution; intended for
/// the thousands of episodes an evaluation produces.
inline PairedTest paired_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw DataError("paired_test: need two equal-length samples");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  PairedTest t;
  t.mean_difference = mean(d);
  t.standard_error = stddev(d) / std::sqrt(static_cast<double>(d.size()));
  if (t.standard_error == 0.0) {
    t.z = t.mean_difference > 0 ? INFINITY : 0.0;
    t.p_one_sided = t.mean_difference > 0 ? 0.0 : 1.0;
    return t;
  }
  t.z = t.mean_difference / t.standard_error;
  t.p_one_sided = 0.5 * std::erfc(t.z / std::sqrt(2.0));
  return t;
}

}  // namespace lds::stats
