#pragma once

// Small numerical helpers shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace ham::testing {

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// 8-point Gauss-Legendre on [a, b] split into `pieces` parts.
template <typename F>
double gauss_legendre(F&& f, double a, double b, int pieces = 16) {
  static constexpr double x[4] = {0.1834346424956498, 0.5255324099163290,
                                  0.7966664774136267, 0.9602898564975363};
  static constexpr double w[4] = {0.3626837833783620, 0.3137066458778873,
                                  0.2223810344533745, 0.1012285362903763};
  double total = 0.0;
  const double step = (b - a) / pieces;
  for (int p = 0; p < pieces; ++p) {
    const double mid = a + step * (p + 0.5), half = 0.5 * step;
    for (int i = 0; i < 4; ++i) {
      total += half * w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
    }
  }
  return total;
}

/// Integrates f over the sorted breakpoints, Gauss-Legendre between them.
template <typename F>
double piecewise_gauss(F&& f, std::vector<double> breaks, int pieces = 16) {
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) total += gauss_legendre(f, breaks[i], breaks[i + 1], pieces);
  }
  return total;
}

struct RunningMoments {
  double n = 0, mean = 0, m2 = 0;
  void add(double x) {
    n += 1;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double variance() const { return m2 / (n - 1); }
  double se_mean() const { return std::sqrt(variance() / n); }
};

}  // namespace ham::testing
