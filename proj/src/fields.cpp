#include "ham/fields.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ham/errors.hpp"

namespace ham {
namespace {

void require_coverage(const SpaceTimeWindow& window, double theta) {
  if (!window.covers(-theta, theta)) {
    throw CoverageError(fmt::format(
        "window [{}, {}] at t0={} does not contain the light cone of "
        "[-{}, {}]; need [{}, {}]",
        window.x_min, window.x_max, window.t0, theta, theta,
        -theta - window.t0, theta + window.t0));
  }
}

}  // namespace

double spatial_integral(const PiecewiseField& field, double theta) {
  if (theta < 0.0) throw DomainError("spatial_integral: theta must be >= 0");
  require_coverage(field.window(), theta);
  if (theta == 0.0) return 0.0;
  return field.excess_integral(-theta, theta);
}

double spatial_integral_direct(const SolutionAtoms& solution, double theta) {
  if (theta < 0.0) throw DomainError("spatial_integral: theta must be >= 0");
  require_coverage(solution.config.window, theta);
  return evaluate_functional(solution, SpatialIntegral{theta});
}

SpatialIntegralSeries integral_series(const PiecewiseField& field,
                                      std::span<const double> theta_grid) {
  SpatialIntegralSeries out;
  if (theta_grid.empty()) return out;
  if (!std::is_sorted(theta_grid.begin(), theta_grid.end())) {
    throw DomainError("integral_series: theta grid must be ascending");
  }
  require_coverage(field.window(), theta_grid.back());
  out.theta.assign(theta_grid.begin(), theta_grid.end());
  out.value.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    out.value.push_back(theta > 0.0 ? field.excess_integral(-theta, theta)
                                    : 0.0);
  }
  return out;
}

SpatialIntegralSeries standardize(SpatialIntegralSeries series,
                                  const MomentOracle& oracle) {
  series.standardized.resize(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double sigma = oracle.sigma(series.theta[k]);
    if (!(sigma > 0.0)) {
      throw DegenerateNoise(fmt::format(
          "standardize: sigma({}) = 0; the noise has no variance",
          series.theta[k]));
    }
    series.standardized[k] = series.value[k] / sigma;
  }
  return series;
}

double ergodic_mean(const PiecewiseField& field, double theta) {
  if (!(theta > 0.0)) throw DomainError("ergodic_mean: theta must be > 0");
  return 1.0 + spatial_integral(field, theta) / (2.0 * theta);
}

std::vector<double> geometric_theta_grid(double theta_min, double theta_max,
                                         int per_decade) {
  if (!(theta_min > 0.0) || theta_max < theta_min || per_decade <= 0) {
    throw DomainError("geometric_theta_grid: need 0 < theta_min <= theta_max");
  }
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double theta =
        theta_min * std::pow(10.0, static_cast<double>(k) / per_decade);
    if (theta > theta_max * (1.0 + 1e-12)) break;
    grid.push_back(std::min(theta, theta_max));
  }
  if (grid.back() < theta_max) grid.push_back(theta_max);
  return grid;
}

}  // namespace ham
