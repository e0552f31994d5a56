#pragma once

// Order-fixed reductions and small regressions used by the experiments.

#include <cstddef>
#include <span>

namespace ham {

/// Pairwise (cascade) summation in index order.
double pairwise_sum(std::span<const double> values);

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  double standard_error = 0.0;
  std::size_t count = 0;
};

SampleSummary summarize(std::span<const double> values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Fit of log y against log x; intercept is log of the fitted constant.
LinearFit fit_log_log(std::span<const double> x, std::span<const double> y);

}  // namespace ham
