#include "ham/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "ham/errors.hpp"

namespace ham {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Upper tail 1 - Phi(x).
double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

// gamma((l, r]) without cancellation in the upper tail.
double normal_mass(double l, double r) {
  if (l >= 0.0) return normal_sf(l) - normal_sf(r);
  return normal_cdf(r) - normal_cdf(l);
}

// int_t^inf (1 - Phi(s)) ds for t >= 0.
double upper_tail_integral(double t) { return normal_pdf(t) - t * normal_sf(t); }

// Antiderivative of Phi normalized to vanish at -inf.
double phi_antiderivative(double t) {
  if (t == -HUGE_VAL) return 0.0;
  return t <= 0.0 ? upper_tail_integral(-t) : t + upper_tail_integral(t);
}

double integral_cdf(double a, double b) {
  return phi_antiderivative(b) - phi_antiderivative(a);
}

// int_a^b |c - Phi(t)| dt for a constant level c in [0, 1].
double gap_integral(double c, double a, double b) {
  if (!(b > a)) return 0.0;
  if (c <= 0.0) return integral_cdf(a, b);
  if (c >= 1.0) return (b - a) - integral_cdf(a, b);
  const double cross = normal_quantile(c);
  if (cross <= a) return integral_cdf(a, b) - c * (b - a);
  if (cross >= b) return c * (b - a) - integral_cdf(a, b);
  return (c * (cross - a) - integral_cdf(a, cross)) +
         (integral_cdf(cross, b) - c * (b - cross));
}

void require_nonempty(const WeightedEmpiricalMeasure& mu, const char* what) {
  if (mu.empty()) {
    throw DomainError(fmt::format("{}: measure has empty support", what));
  }
}

struct Grid {
  double lo = 0.0;
  double step = 0.0;
  std::size_t nodes = 0;
};

Grid make_grid(double lo, double hi, double step) {
  Grid g;
  g.lo = lo;
  g.step = step;
  g.nodes = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  return g;
}

// Mass of an empirical measure spread onto hat functions of the grid.
void deposit(const WeightedEmpiricalMeasure& mu, const Grid& g, double sign,
             std::vector<double>& c) {
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double pos = (mu.points()[k] - g.lo) / g.step;
    auto j = static_cast<std::size_t>(std::floor(pos));
    if (j >= g.nodes - 1) {
      c[g.nodes - 1] += sign * mu.weights()[k];
      continue;
    }
    const double frac = pos - static_cast<double>(j);
    c[j] += sign * mu.weights()[k] * (1.0 - frac);
    c[j + 1] += sign * mu.weights()[k] * frac;
  }
}

// Gaussian mass of hat functions; the outer hats extend flat to +-inf.
void deposit_gaussian(const Grid& g, double sign, std::vector<double>& c) {
  const double first = g.lo;
  const double last = g.lo + g.step * static_cast<double>(g.nodes - 1);
  c[0] += sign * normal_cdf(first);
  c[g.nodes - 1] += sign * normal_sf(last);
  for (std::size_t j = 0; j + 1 < g.nodes; ++j) {
    const double l = g.lo + g.step * static_cast<double>(j);
    const double r = l + g.step;
    const double mass = normal_mass(l, r);
    // int_l^r (t - l) dgamma(t)
    const double moment = normal_pdf(l) - normal_pdf(r) - l * mass;
    const double right_share = moment / g.step;
    c[j] += sign * (mass - right_share);
    c[j + 1] += sign * right_share;
  }
}

double maximize_over_split(const std::vector<double>& c, const Grid& g,
                           int iterations) {
  // V(L) = best value with ||phi||_inf <= 1 - L and Lip(phi) <= L is concave
  // in L and vanishes at both ends.
  auto value = [&](double lip) {
    return max_bounded_increments(c, 1.0 - lip, lip * g.step);
  };
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = 1.0;
  double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
  double f1 = value(x1), f2 = value(x2);
  double best = std::max({0.0, f1, f2});
  for (int it = 0; it < iterations; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = value(x2);
      best = std::max(best, f2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = value(x1);
      best = std::max(best, f1);
    }
  }
  return best;
}

}  // namespace

WeightedEmpiricalMeasure::WeightedEmpiricalMeasure(std::vector<double> points,
                                                   std::vector<double> weights) {
  if (points.size() != weights.size()) {
    throw DomainError("WeightedEmpiricalMeasure: size mismatch");
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a] < points[b];
  });
  double total = 0.0;
  for (std::size_t idx : order) {
    const double x = points[idx], w = weights[idx];
    if (!std::isfinite(x)) throw DomainError("WeightedEmpiricalMeasure: non-finite point");
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("WeightedEmpiricalMeasure: weights must be >= 0");
    }
    if (!points_.empty() && points_.back() == x) {
      weights_.back() += w;
    } else {
      points_.push_back(x);
      weights_.push_back(w);
    }
    total += w;
    cumulative_.push_back(total);
  }
  cumulative_.resize(points_.size());
  double running = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    running += weights_[k];
    cumulative_[k] = running;
  }
  if (!points_.empty() && std::abs(total - 1.0) > 1e-12) {
    throw DomainError(fmt::format(
        "WeightedEmpiricalMeasure: weights sum to {}, expected 1", total));
  }
  if (!cumulative_.empty()) cumulative_.back() = 1.0;
}

WeightedEmpiricalMeasure WeightedEmpiricalMeasure::normalized(
    std::vector<double> points, std::vector<double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) {
    throw DomainError("WeightedEmpiricalMeasure: total weight must be > 0");
  }
  for (double& w : weights) w /= total;
  // Division leaves the sum within a few ulps of one; the constructor check
  // is relative to 1e-12, which is ample.
  return WeightedEmpiricalMeasure(std::move(points), std::move(weights));
}

WeightedEmpiricalMeasure WeightedEmpiricalMeasure::from_samples(
    std::span<const double> samples) {
  if (samples.empty()) return {};
  std::vector<double> points(samples.begin(), samples.end());
  std::vector<double> weights(samples.size(),
                              1.0 / static_cast<double>(samples.size()));
  return normalized(std::move(points), std::move(weights));
}

double WeightedEmpiricalMeasure::cdf(double x) const {
  const auto k = std::upper_bound(points_.begin(), points_.end(), x) -
                 points_.begin();
  return k == 0 ? 0.0 : cumulative_[static_cast<std::size_t>(k) - 1];
}

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -HUGE_VAL;
    if (p == 1.0) return HUGE_VAL;
    throw DomainError("normal_quantile: p outside [0, 1]");
  }
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double kolmogorov(const WeightedEmpiricalMeasure& mu) {
  require_nonempty(mu, "kolmogorov");
  double sup = 0.0, before = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double phi = normal_cdf(mu.points()[k]);
    const double after = mu.cdf(mu.points()[k]);
    sup = std::max({sup, std::abs(after - phi), std::abs(before - phi)});
    before = after;
  }
  return sup;
}

double kolmogorov(const WeightedEmpiricalMeasure& mu,
                  const WeightedEmpiricalMeasure& nu) {
  require_nonempty(mu, "kolmogorov");
  require_nonempty(nu, "kolmogorov");
  double sup = 0.0;
  for (const auto* m : {&mu, &nu}) {
    for (double x : m->points()) {
      sup = std::max(sup, std::abs(mu.cdf(x) - nu.cdf(x)));
    }
  }
  return sup;
}

double wasserstein1(const WeightedEmpiricalMeasure& mu) {
  require_nonempty(mu, "wasserstein1");
  const auto& x = mu.points();
  double total = integral_cdf(-HUGE_VAL, x.front());
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    total += gap_integral(mu.cdf(x[k]), x[k], x[k + 1]);
  }
  const double last = x.back();
  total += last >= 0.0 ? upper_tail_integral(last)
                       : upper_tail_integral(0.0) - last -
                             (phi_antiderivative(0.0) - phi_antiderivative(last));
  return total;
}

double wasserstein1(const WeightedEmpiricalMeasure& mu,
                    const WeightedEmpiricalMeasure& nu) {
  require_nonempty(mu, "wasserstein1");
  require_nonempty(nu, "wasserstein1");
  std::vector<double> xs = mu.points();
  xs.insert(xs.end(), nu.points().begin(), nu.points().end());
  std::sort(xs.begin(), xs.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    total += std::abs(mu.cdf(xs[k]) - nu.cdf(xs[k])) * (xs[k + 1] - xs[k]);
  }
  return total;
}

double max_bounded_increments(std::span<const double> coefficients,
                              double sup_bound, double increment_bound) {
  if (coefficients.empty() || !(sup_bound > 0.0)) return 0.0;
  const double M = sup_bound, delta = std::max(increment_bound, 0.0);
  // Concave piecewise-linear value function over [-M, M].
  std::vector<double> xs = {-M, M};
  std::vector<double> vs = {-coefficients[0] * M, coefficients[0] * M};
  std::vector<double> nx, nv;

  auto interpolate = [](double x0, double v0, double x1, double v1, double x) {
    if (x1 == x0) return std::max(v0, v1);
    return v0 + (v1 - v0) * (x - x0) / (x1 - x0);
  };

  for (std::size_t j = 1; j < coefficients.size(); ++j) {
    // Sliding maximum over |u - v| <= delta: split at the top plateau, move
    // the rising part left and the falling part right by delta.
    std::size_t top_first = 0;
    for (std::size_t i = 1; i < vs.size(); ++i) {
      if (vs[i] > vs[top_first]) top_first = i;
    }
    std::size_t top_last = top_first;
    while (top_last + 1 < vs.size() && vs[top_last + 1] == vs[top_first]) {
      ++top_last;
    }
    nx.clear();
    nv.clear();
    for (std::size_t i = 0; i <= top_first; ++i) {
      nx.push_back(xs[i] - delta);
      nv.push_back(vs[i]);
    }
    for (std::size_t i = top_last; i < xs.size(); ++i) {
      nx.push_back(xs[i] + delta);
      nv.push_back(vs[i]);
    }
    // Clip back to [-M, M].
    std::size_t first = 0;
    while (first + 1 < nx.size() && nx[first + 1] <= -M) ++first;
    std::size_t last = nx.size() - 1;
    while (last > 0 && nx[last - 1] >= M) --last;
    xs.clear();
    vs.clear();
    xs.push_back(-M);
    vs.push_back(first + 1 < nx.size()
                     ? interpolate(nx[first], nv[first], nx[first + 1],
                                   nv[first + 1], -M)
                     : nv[first]);
    for (std::size_t i = first + 1; i < last; ++i) {
      if (nx[i] > -M && nx[i] < M) {
        xs.push_back(nx[i]);
        vs.push_back(nv[i]);
      }
    }
    xs.push_back(M);
    vs.push_back(last > 0 ? interpolate(nx[last - 1], nv[last - 1], nx[last],
                                        nv[last], M)
                          : nv[last]);
    const double c = coefficients[j];
    for (std::size_t i = 0; i < xs.size(); ++i) vs[i] += c * xs[i];
  }
  return *std::max_element(vs.begin(), vs.end());
}

double fortet_mourier(const WeightedEmpiricalMeasure& mu,
                      const FortetMourierOptions& options) {
  require_nonempty(mu, "fortet_mourier");
  const Grid g = make_grid(std::min(-options.half_range, mu.points().front()),
                           std::max(options.half_range, mu.points().back()),
                           options.step);
  std::vector<double> c(g.nodes, 0.0);
  deposit(mu, g, 1.0, c);
  deposit_gaussian(g, -1.0, c);
  return maximize_over_split(c, g, options.golden_iterations);
}

double fortet_mourier(const WeightedEmpiricalMeasure& mu,
                      const WeightedEmpiricalMeasure& nu,
                      const FortetMourierOptions& options) {
  require_nonempty(mu, "fortet_mourier");
  require_nonempty(nu, "fortet_mourier");
  const Grid g = make_grid(
      std::min({-options.half_range, mu.points().front(), nu.points().front()}),
      std::max({options.half_range, mu.points().back(), nu.points().back()}),
      options.step);
  std::vector<double> c(g.nodes, 0.0);
  deposit(mu, g, 1.0, c);
  deposit(nu, g, -1.0, c);
  return maximize_over_split(c, g, options.golden_iterations);
}

}  // namespace ham
