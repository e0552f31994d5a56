#pragma once

// Exact event-driven solution of the mild equation for finite-activity,
// centered noise. With a centered Levy measure the compensator drops out and
//
//   u(t, x) = 1 + 1/2 sum_{i : s_i < t, |x - y_i| < t - s_i} z_i u_i,
//   u_i     = u(s_i-, y_i),
//
// so the field is determined by the per-atom values u_i.

#include <cstddef>
#include <variant>
#include <vector>

#include "ham/levy_noise.hpp"

namespace ham {

struct SolutionAtoms {
  PointConfiguration config;
  std::vector<double> values;  ///< u_i = u(s_i-, y_i), aligned with atoms

  double t0() const { return config.window.t0; }
  std::size_t size() const { return values.size(); }
};

/// x -> u(t0, x) as a step function. Cone edges y_i -+ (t0 - s_i) are the
/// breakpoints; `values[k]` holds u on (breaks[k-1], breaks[k]) with
/// values[0] = values.back() = 1. At a breakpoint, `at` returns the value to
/// the right.
class PiecewiseField {
 public:
  PiecewiseField() = default;
  PiecewiseField(std::vector<double> breaks, std::vector<double> values,
                 SpaceTimeWindow window);

  double at(double x) const;
  /// int_{lo}^{hi} (u(t0, x) - 1) dx, exact up to rounding.
  double excess_integral(double lo, double hi) const;

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }
  const SpaceTimeWindow& window() const { return window_; }
  double t0() const { return window_.t0; }
  std::size_t pieces() const { return values_.size(); }

 private:
  double cumulative(double x) const;

  std::vector<double> breaks_;
  std::vector<double> values_{1.0};
  std::vector<double> prefix_;  // int_{breaks[0]}^{breaks[k]} (u - 1)
  SpaceTimeWindow window_;
};

/// O(n^2) reference solver; contributions are summed in ascending j.
SolutionAtoms solve_naive(const PointConfiguration& config);

/// O(n log^2 n) solver. In rotated coordinates a = y + s, b = y - s the
/// light-cone predicate |y_i - y_j| < s_i - s_j becomes a_j < a_i and
/// b_j > b_i; a divide and conquer over time order pushes left-half
/// contributions to the right half with a sweep over a and a Fenwick tree
/// over b.
SolutionAtoms solve_fast(const PointConfiguration& config);

PiecewiseField evaluate_field(const SolutionAtoms& solution);

/// u(t0, x) by direct summation over atoms; O(n).
double field_value_direct(const SolutionAtoms& solution, double x);

struct PointValue {
  double x = 0.0;  ///< F = u(t0, x)
};
struct SpatialIntegral {
  double theta = 0.0;  ///< F = int_{-theta}^{theta} (u(t0, x) - 1) dx
};
using Functional = std::variant<PointValue, SpatialIntegral>;

/// F evaluated on a solved configuration, by direct summation.
double evaluate_functional(const SolutionAtoms& solution, const Functional& f);

/// D_xi F = F(config + delta_xi) - F(config). Atoms before xi keep their
/// values; only atoms inside the forward light cone of xi change, and their
/// increments are propagated in time order. Zero when xi.s >= t0.
double add_one_cost(const SolutionAtoms& solution, const NoiseAtom& xi,
                    const Functional& f);
double add_one_cost(const PointConfiguration& config, const NoiseAtom& xi,
                    const Functional& f);

/// D_xi1 D_xi2 F = F(+xi1+xi2) - F(+xi1) - F(+xi2) + F. Symmetric in
/// (xi1, xi2); internally the earlier atom is added first.
double second_add_one_cost(const SolutionAtoms& solution, const NoiseAtom& xi1,
                           const NoiseAtom& xi2, const Functional& f);
double second_add_one_cost(const PointConfiguration& config,
                           const NoiseAtom& xi1, const NoiseAtom& xi2,
                           const Functional& f);

/// Solution of config + delta_xi obtained from an existing solution by
/// propagating increments through the forward cone of xi.
SolutionAtoms with_added_atom(const SolutionAtoms& solution,
                              const NoiseAtom& xi);

}  // namespace ham
