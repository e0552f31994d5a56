#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ham/oracle.hpp"
#include "ham/solver.hpp"

namespace ham {

/// F_theta = int_{-theta}^{theta} (u(t0,x) - 1) dx along one trajectory,
/// sampled on an ascending theta grid.
struct SpatialIntegralSeries {
  std::vector<double> theta;
  std::vector<double> value;         ///< F_theta
  std::vector<double> standardized;  ///< F_theta / sigma_theta (empty until set)
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;

  std::size_t size() const { return theta.size(); }
};

/// Exact F_theta from the step-function representation. Throws
/// CoverageError when the window misses part of the backward cone of
/// {t0} x [-theta, theta].
double spatial_integral(const PiecewiseField& field, double theta);

/// Same quantity as 1/2 sum_i z_i u_i |[-theta, theta] cap cone_i|.
double spatial_integral_direct(const SolutionAtoms& solution, double theta);

SpatialIntegralSeries integral_series(const PiecewiseField& field,
                                      std::span<const double> theta_grid);

/// F~_theta = F_theta / sigma_theta with sigma from the closed-form oracle.
SpatialIntegralSeries standardize(SpatialIntegralSeries series,
                                  const MomentOracle& oracle);

/// (1 / 2 theta) int_{-theta}^{theta} u(t0, x) dx = 1 + F_theta / (2 theta).
double ergodic_mean(const PiecewiseField& field, double theta);

/// theta_k = theta_min * 10^{k / per_decade} up to theta_max; theta_max is
/// appended when it is not already a grid point.
std::vector<double> geometric_theta_grid(double theta_min, double theta_max,
                                         int per_decade = 64);

}  // namespace ham
