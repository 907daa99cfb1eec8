#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "specdiff/errors.hpp"
#include "specdiff/rng.hpp"
#include "specdiff/vec.hpp"

namespace specdiff {

/// Kolmogorov-Smirnov sup distance between the empirical CDF of `data` and a
/// continuous reference CDF.
inline double ks_one_sample(std::vector<double> data,
                            const std::function<double(double)>& cdf) {
  if (data.empty()) throw TooFewSamples("ks_one_sample: empty sample");
  std::sort(data.begin(), data.end());
  const double n = static_cast<double>(data.size());
  double d = 0.0;
  for (size_t i = 0; i < data.size(); ++i) {
    double F = cdf(data[i]);
    d = std::max(d, std::fabs(F - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - F));
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov sup distance.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw TooFewSamples("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }
  return d;
}

/// Empirical characteristic function (1/n) sum exp(i xi . V_k) of a vector
/// sample, evaluated at one frequency.
template <int D>
inline std::complex<double> empirical_char(const std::vector<Vec<D>>& sample,
                                           const Vec<D>& xi) {
  if (sample.empty()) throw TooFewSamples("empirical_char: empty sample");
  double re = 0.0, im = 0.0;
  for (const auto& v : sample) {
    double p = dot(xi, v);
    re += std::cos(p);
    im += std::sin(p);
  }
  double n = static_cast<double>(sample.size());
  return {re / n, im / n};
}

/// Mann-Kendall trend z-statistic of a short time series; |z| < 1.96 means no
/// monotone trend at the 5% level. Uses the exact O(n^2) S statistic.
inline double mann_kendall_z(const std::vector<double>& series) {
  const long n = static_cast<long>(series.size());
  if (n < 4) throw TooFewSamples("mann_kendall_z: need at least 4 points");
  long S = 0;
  for (long i = 0; i < n - 1; ++i)
    for (long j = i + 1; j < n; ++j) {
      double d = series[j] - series[i];
      S += (d > 0.0) - (d < 0.0);
    }
  double var = static_cast<double>(n) * (n - 1) * (2 * n + 5) / 18.0;
  if (var == 0.0) return 0.0;
  double z;
  if (S > 0) z = (static_cast<double>(S) - 1.0) / std::sqrt(var);
  else if (S < 0) z = (static_cast<double>(S) + 1.0) / std::sqrt(var);
  else z = 0.0;
  return z;
}

/// Pareto draw with survival function (x_m/x)^index for x >= x_m.
inline double sample_pareto(double index, double xm, RngStream& rng) {
  return xm * std::pow(rng.uniform(), -1.0 / index);
}

inline double sample_mean(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return v.empty() ? 0.0 : m / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw TooFewSamples("sample_variance: need >= 2 points");
  double m = sample_mean(v), acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

}  // namespace specdiff
