#pragma once

// Distances between a weighted empirical measure on R and the standard
// Gaussian gamma (or a second empirical measure).

#include <span>
#include <vector>

namespace ham {

class WeightedEmpiricalMeasure {
 public:
  WeightedEmpiricalMeasure() = default;

  /// Sorts the support, merges repeated points and checks that weights are
  /// nonnegative and sum to one within 1e-12.
  WeightedEmpiricalMeasure(std::vector<double> points,
                           std::vector<double> weights);

  /// Same, but rescales the weights to total mass one first.
  static WeightedEmpiricalMeasure normalized(std::vector<double> points,
                                             std::vector<double> weights);
  /// Equal weights 1/n.
  static WeightedEmpiricalMeasure from_samples(std::span<const double> samples);

  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  /// mu((-inf, x]).
  double cdf(double x) const;

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

double normal_pdf(double x);
/// Phi(x) through erfc, accurate in both tails.
double normal_cdf(double x);
double normal_quantile(double p);

/// sup_t |mu((-inf, t]) - Phi(t)|, exact over one-sided limits at the atoms.
double kolmogorov(const WeightedEmpiricalMeasure& mu);
double kolmogorov(const WeightedEmpiricalMeasure& mu,
                  const WeightedEmpiricalMeasure& nu);

/// int |F_mu(t) - Phi(t)| dt by exact piecewise integration.
double wasserstein1(const WeightedEmpiricalMeasure& mu);
double wasserstein1(const WeightedEmpiricalMeasure& mu,
                    const WeightedEmpiricalMeasure& nu);

struct FortetMourierOptions {
  double step = 0.005;      ///< grid spacing of the piecewise-linear test functions
  double half_range = 6.0;  ///< grid covers [-half_range, half_range] and the support
  int golden_iterations = 40;
};

/// Bounded-Lipschitz distance sup { |int phi d(mu - gamma)| :
/// ||phi||_inf + Lip(phi) <= 1 }, maximized over continuous piecewise-linear
/// phi on a uniform grid (constant outside it). The value is a lower bound
/// for the exact distance and never exceeds min(d_W1, 2).
double fortet_mourier(const WeightedEmpiricalMeasure& mu,
                      const FortetMourierOptions& options = {});
double fortet_mourier(const WeightedEmpiricalMeasure& mu,
                      const WeightedEmpiricalMeasure& nu,
                      const FortetMourierOptions& options = {});

/// max sum c_j phi_j subject to |phi_j| <= sup_bound and
/// |phi_{j+1} - phi_j| <= increment_bound. Exact, by dynamic programming on
/// concave piecewise-linear value functions.
double max_bounded_increments(std::span<const double> coefficients,
                              double sup_bound, double increment_bound);

}  // namespace ham
