#include "ham/stats.hpp"

#include <cmath>
#include <vector>

#include "ham/errors.hpp"

namespace ham {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleSummary summarize(std::span<const double> values) {
  SampleSummary out;
  out.count = values.size();
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = pairwise_sum(values) / n;
  if (values.size() < 2) return out;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - out.mean;
    sq[i] = d * d;
  }
  out.variance = pairwise_sum(sq) / (n - 1.0);
  out.standard_error = std::sqrt(out.variance / n);
  return out;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("fit_line: need at least two (x, y) pairs");
  }
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n, my = pairwise_sum(y) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_line: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

LinearFit fit_log_log(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw DomainError("fit_log_log: values must be positive");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

}  // namespace ham
