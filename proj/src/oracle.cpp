#include "ham/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "ham/errors.hpp"

namespace ham {
namespace {

// cosh(x) - 1 - x^2/2 and sinh(x) - x without cancellation near zero.
double cosh_remainder(double x) {
  if (std::abs(x) >= 0.5) return std::cosh(x) - 1.0 - 0.5 * x * x;
  const double x2 = x * x;
  double term = x2 * x2 / 24.0;
  double sum = 0.0;
  for (int n = 4; n < 40 && term != 0.0; n += 2) {
    sum += term;
    term *= x2 / ((n + 1.0) * (n + 2.0));
  }
  return sum;
}

double sinh_remainder(double x) {
  if (std::abs(x) >= 0.5) return std::sinh(x) - x;
  const double x2 = x * x;
  double term = x * x2 / 6.0;
  double sum = 0.0;
  for (int n = 3; n < 40 && term != 0.0; n += 2) {
    sum += term;
    term *= x2 / ((n + 1.0) * (n + 2.0));
  }
  return sum;
}

// Romberg extrapolation of the trapezoid rule from values at 4P+1 equally
// spaced nodes on [a, b].
template <typename F>
double romberg3(F&& f, double a, double b, std::size_t panels) {
  const std::size_t n = 4 * panels;
  const double h = (b - a) / static_cast<double>(n);
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = f(a + h * static_cast<double>(i));
  auto trap = [&](std::size_t stride) {
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = stride; i < n; i += stride) s += v[i];
    return s * h * static_cast<double>(stride);
  };
  const double t1 = trap(4), t2 = trap(2), t3 = trap(1);
  const double r1 = (4.0 * t2 - t1) / 3.0;
  const double r2 = (4.0 * t3 - t2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

constexpr std::array<double, 4> kGaussNodes = {
    0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
    0.9602898564975363};
constexpr std::array<double, 4> kGaussWeights = {
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
    0.1012285362903763};

// 8-point Gauss-Legendre on [a, b], split into `pieces` equal parts.
template <typename F>
double gauss8(F&& f, double a, double b, int pieces = 4) {
  double total = 0.0;
  const double step = (b - a) / pieces;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + step * p;
    const double mid = lo + 0.5 * step, half = 0.5 * step;
    double s = 0.0;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
      s += kGaussWeights[i] *
           (f(mid - half * kGaussNodes[i]) + f(mid + half * kGaussNodes[i]));
    }
    total += s * half;
  }
  return total;
}

template <typename F>
double integrate_between_breaks(F&& f, std::vector<double> breaks) {
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) total += gauss8(f, breaks[i], breaks[i + 1]);
  }
  return total;
}

// 1/2 int_{y - t0}^{y + t0} cone_mass(theta, t0, u) du; the integrand is
// piecewise linear with kinks at +-theta +- t0, so trapezoids are exact.
double smoothed_cone_mass(double theta, double t0, double y) {
  const double lo = y - t0, hi = y + t0;
  std::array<double, 6> pts = {lo, hi, -theta - t0, -theta + t0, theta - t0,
                               theta + t0};
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  double prev = lo;
  double f_prev = cone_mass(theta, t0, lo);
  for (double p : pts) {
    if (p <= prev || p > hi) continue;
    const double f = cone_mass(theta, t0, p);
    total += 0.5 * (f + f_prev) * (p - prev);
    prev = p;
    f_prev = f;
  }
  return 0.5 * total;
}

}  // namespace

double wave_kernel(double t, double x) {
  if (t < 0.0) throw DomainError("wave_kernel: t must be >= 0");
  return std::abs(x) < t ? 0.5 : 0.0;
}

double cone_mass(double theta, double t0, double y) {
  const double lo = std::max(-theta, y - t0);
  const double hi = std::min(theta, y + t0);
  return hi > lo ? 0.5 * (hi - lo) : 0.0;
}

MomentOracle::MomentOracle(double t0, double m2, QuadratureControl control)
    : t0_(t0), m2_(m2), k_(std::sqrt(m2 / 2.0)), control_(control) {
  if (!(t0 > 0.0) || !std::isfinite(t0)) {
    throw DomainError(fmt::format("oracle: t0 must be > 0, got {}", t0));
  }
  if (!(m2 >= 0.0) || !std::isfinite(m2)) {
    throw DomainError(fmt::format("oracle: m2 must be >= 0, got {}", m2));
  }
}

double MomentOracle::second_moment(double t) const {
  if (t < 0.0) throw DomainError("second_moment: t must be >= 0");
  return std::cosh(k_ * t);
}

std::size_t MomentOracle::fine_steps(double length) const {
  const double step = control_.relative_step * t0_;
  const auto half = static_cast<std::size_t>(std::ceil(length / (2.0 * step)));
  return 2 * std::max<std::size_t>(half, 1);
}

std::vector<double> MomentOracle::volterra_grid(double end,
                                                std::size_t n) const {
  // Trapezoid rule on int_0^t (t - s) g(s) ds; the endpoint weight vanishes
  // because the kernel is zero at s = t, so the scheme is explicit.
  std::vector<double> g(n + 1);
  const double dt = end / static_cast<double>(n);
  const double c = 0.5 * m2_ * dt;
  g[0] = 1.0;
  double sum_g = 0.5 * g[0];  // weighted sum of g_j, j < i
  double sum_sg = 0.0;        // weighted sum of s_j g_j, j < i
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = dt * static_cast<double>(i);
    g[i] = 1.0 + c * (t * sum_g - sum_sg);
    sum_g += g[i];
    sum_sg += t * g[i];
  }
  return g;
}

double MomentOracle::second_moment_quadrature(double t) const {
  if (t < 0.0) throw DomainError("second_moment_quadrature: t must be >= 0");
  if (t == 0.0) return 1.0;
  const std::size_t n = fine_steps(t);
  const double fine = volterra_grid(t, n).back();
  const double coarse = volterra_grid(t, n / 2).back();
  return (4.0 * fine - coarse) / 3.0;
}

double MomentOracle::covariance_kernel(double h) const {
  h = std::abs(h);
  if (h >= 2.0 * t0_) return 0.0;
  const double half = 0.5 * k_ * (t0_ - 0.5 * h);
  const double sh = std::sinh(half);
  return 2.0 * sh * sh;
}

double MomentOracle::kernel_trapezoid(double h, std::size_t n) const {
  // (m2/4) int_0^c g(s) 2 (c - s) ds with c = t0 - h/2.
  const double c = t0_ - 0.5 * h;
  const auto g = volterra_grid(c, n);
  const double ds = c / static_cast<double>(n);
  double sum = 0.5 * g[0] * 2.0 * c;
  for (std::size_t j = 1; j < n; ++j) {
    sum += g[j] * 2.0 * (c - ds * static_cast<double>(j));
  }
  return 0.25 * m2_ * sum * ds;
}

double MomentOracle::covariance_kernel_quadrature(double h) const {
  h = std::abs(h);
  if (h >= 2.0 * t0_ || m2_ == 0.0) return 0.0;
  const std::size_t n = fine_steps(t0_ - 0.5 * h);
  const double fine = kernel_trapezoid(h, n);
  const double coarse = kernel_trapezoid(h, n / 2);
  return (4.0 * fine - coarse) / 3.0;
}

double MomentOracle::psi(double d) const {
  d = std::abs(d);
  if (k_ == 0.0 || d == 0.0) return 0.0;
  const double a = k_ * t0_;
  if (d >= 2.0 * t0_) {
    const double at_support = 4.0 / (k_ * k_) * (-cosh_remainder(a)) +
                              4.0 * t0_ / k_ * sinh_remainder(a);
    return at_support + (d - 2.0 * t0_) * kernel_integral();
  }
  const double b = k_ * (t0_ - 0.5 * d);
  return 4.0 / (k_ * k_) * (cosh_remainder(b) - cosh_remainder(a)) +
         2.0 * d / k_ * sinh_remainder(a);
}

double MomentOracle::psi_quadrature(double d) const {
  d = std::abs(d);
  const double end = std::min(d, 2.0 * t0_);
  if (end <= 0.0 || m2_ == 0.0) return 0.0;
  return romberg3(
      [&](double h) { return (d - h) * covariance_kernel_quadrature(h); }, 0.0,
      end, control_.outer_panels);
}

double MomentOracle::kernel_integral() const {
  if (k_ == 0.0) return 0.0;
  return 2.0 / k_ * sinh_remainder(k_ * t0_);
}

double MomentOracle::kernel_first_moment() const {
  return 2.0 * t0_ * kernel_integral() - psi(2.0 * t0_);
}

double MomentOracle::variance_F(double theta) const {
  if (theta < 0.0) throw DomainError("variance_F: theta must be >= 0");
  return 2.0 * psi(2.0 * theta);
}

double MomentOracle::variance_F_quadrature(double theta) const {
  if (theta < 0.0) throw DomainError("variance_F: theta must be >= 0");
  return 2.0 * psi_quadrature(2.0 * theta);
}

double MomentOracle::sigma(double theta) const {
  return std::sqrt(variance_F(theta));
}

double MomentOracle::covariance_F(double theta, double w) const {
  if (theta < 0.0 || w < 0.0) {
    throw DomainError("covariance_F: half-widths must be >= 0");
  }
  return 2.0 * psi(theta + w) - 2.0 * psi(w - theta);
}

double MomentOracle::covariance_F_quadrature(double theta, double w) const {
  if (theta < 0.0 || w < 0.0) {
    throw DomainError("covariance_F: half-widths must be >= 0");
  }
  return 2.0 * psi_quadrature(theta + w) - 2.0 * psi_quadrature(w - theta);
}

double MomentOracle::correlation_F(double theta, double w) const {
  const double denom = sigma(theta) * sigma(w);
  if (!(denom > 0.0)) {
    throw DegenerateNoise("correlation_F: sigma vanishes (m2 = 0 or theta = 0)");
  }
  return covariance_F(theta, w) / denom;
}

GammaBounds gamma_bound_quadrature(const MomentOracle& oracle,
                                   const BoundMoments& moments, double theta,
                                   double w, double alpha) {
  if (!(theta >= 1.0 && w >= theta)) {
    throw DomainError(fmt::format(
        "gamma_bound_quadrature: need 1 <= theta <= w, got ({}, {})", theta, w));
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("gamma_bound_quadrature: alpha must lie in (0, 1]");
  }
  const double t0 = oracle.t0();
  const double p = 1.0 + alpha;
  const double q = std::min(2.0, 1.0 + 2.0 * alpha);
  const double sig_t = oracle.sigma(theta);
  const double sig_w = oracle.sigma(w);
  if (!(sig_t > 0.0)) throw DegenerateNoise("gamma bounds need m2 > 0");

  // T1(a, b): first cost of F~_a against second cost of F~_b.
  auto t1 = [&](double a, double sa, double b, double sb) {
    const double reach = std::max(b + t0, a + 2.0 * t0);
    const std::vector<double> breaks = {
        -reach,     reach,      -b - t0,        -b + t0,        b - t0,
        b + t0,     -a,         a,              -a - 2.0 * t0,  -a + 2.0 * t0,
        a - 2.0 * t0, a + 2.0 * t0};
    const double integral = integrate_between_breaks(
        [&](double y) {
          const double v =
              cone_mass(b, t0, y) * smoothed_cone_mass(a, t0, y);
          return std::pow(v, p);
        },
        breaks);
    return moments.m_one_plus_alpha * t0 * std::pow(moments.m2 * t0, p) *
           integral / std::pow(sa * sb, p);
  };
  auto power_integral = [&](double a, double power) {
    const std::vector<double> breaks = {-a - t0, -a + t0, a - t0, a + t0};
    return integrate_between_breaks(
        [&](double y) { return std::pow(cone_mass(a, t0, y), power); }, breaks);
  };
  auto g2 = [&](double a, double sa) {
    return moments.m_two_plus_two_alpha * t0 *
           std::pow(0.5 * moments.m2 * t0 * t0, p) * power_integral(a, 2.0 * p) /
           std::pow(sa, 2.0 * p);
  };
  auto g3 = [&](double a, double sa) {
    return 2.0 * moments.m_q_plus_one * t0 * power_integral(a, q + 1.0) /
           std::pow(sa, q + 1.0);
  };

  GammaBounds out;
  out.q = q;
  out.t1_theta_theta = t1(theta, sig_t, theta, sig_t);
  out.t1_theta_w = t1(theta, sig_t, w, sig_w);
  out.t1_w_theta = t1(w, sig_w, theta, sig_t);
  out.t1_w_w = t1(w, sig_w, w, sig_w);
  out.g2_theta = g2(theta, sig_t);
  out.g2_w = g2(w, sig_w);
  out.g3_theta = g3(theta, sig_t);
  out.g3_w = g3(w, sig_w);
  out.gamma1 = std::pow(
      out.t1_theta_theta + out.t1_theta_w + out.t1_w_theta + out.t1_w_w,
      1.0 / p);
  out.gamma2 = std::pow(out.g2_theta + out.g2_w, 1.0 / p);
  out.gamma3 = out.g3_theta + out.g3_w;
  return out;
}

}  // namespace ham
