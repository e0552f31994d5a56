#pragma once

// Deterministic second-order quantities of the hyperbolic Anderson model
// u(t,x) = 1 + int_0^t int G_{t-s}(x-y) u(s,y) L(ds,dy) with constant
// initial data. Everything here depends on the noise only through m_2.
//
// Two independent routes are provided for g, rho, sigma^2 and Cov(F, F):
// closed forms (cosh identities) and trapezoid quadrature of the Volterra
// equation g(t) = 1 + (m_2/2) int_0^t (t-s) g(s) ds with Richardson
// extrapolation.

#include <cstddef>
#include <vector>

namespace ham {

/// G_t(x) = 1/2 on |x| < t (open), 0 otherwise.
double wave_kernel(double t, double x);

struct QuadratureControl {
  /// Volterra / kernel step as a fraction of t0.
  double relative_step = 1e-4;
  /// Panels of the outer trapezoid for sigma^2 and Cov(F,F); refined twice
  /// for Romberg extrapolation.
  std::size_t outer_panels = 128;
};

class MomentOracle {
 public:
  MomentOracle(double t0, double m2, QuadratureControl control = {});

  double t0() const { return t0_; }
  double m2() const { return m2_; }

  /// g(t) = E[u(t,x)^2] = cosh(t sqrt(m2/2)).
  double second_moment(double t) const;
  double second_moment_quadrature(double t) const;

  /// rho(h) = Cov(u(t0,x), u(t0,x+h)) = cosh(k (t0 - h/2)) - 1 on h < 2 t0.
  double covariance_kernel(double h) const;
  double covariance_kernel_quadrature(double h) const;

  /// sigma^2(theta) = Var(F_theta) = 2 int_0^{2 theta} (2 theta - h) rho(h) dh.
  double variance_F(double theta) const;
  double variance_F_quadrature(double theta) const;
  double sigma(double theta) const;

  /// Cov(F_theta, F_w) = int_{-theta}^{theta} int_{-w}^{w} rho(|x-x'|).
  /// Symmetric in its arguments.
  double covariance_F(double theta, double w) const;
  double covariance_F_quadrature(double theta, double w) const;
  double correlation_F(double theta, double w) const;

  /// int_0^{2 t0} rho(h) dh and int_0^{2 t0} h rho(h) dh; for theta >= t0
  /// sigma^2(theta) = 4 theta I0 - 2 I1.
  double kernel_integral() const;
  double kernel_first_moment() const;

 private:
  // Psi(d) = int_0^d (d - h) rho(h) dh, extended evenly.
  double psi(double d) const;
  double psi_quadrature(double d) const;
  // Volterra solution on the uniform grid of [0, end] with n steps.
  std::vector<double> volterra_grid(double end, std::size_t n) const;
  double kernel_trapezoid(double h, std::size_t n) const;
  std::size_t fine_steps(double length) const;

  double t0_;
  double m2_;
  double k_;  // sqrt(m2 / 2)
  QuadratureControl control_;
};

/// Moments of nu entering the second-order Poincare bounds.
struct BoundMoments {
  double m2 = 0.0;
  double m_one_plus_alpha = 0.0;      // m_{1+alpha}
  double m_two_plus_two_alpha = 0.0;  // m_{2+2alpha}
  double m_q_plus_one = 0.0;          // m_{q+1}, q = min(2, 1+2 alpha)
};

/// Upper-bound values for the gamma terms of the second-order Poincare
/// inequality applied to (F~_theta - F~_w)/sqrt(2), obtained by integrating
/// the kernel-product majorants of the first and second add-one costs
/// (every G_{t0-r} replaced by G_{t0}). Implicit constants are set to one,
/// so only the scaling in (theta, w) is meaningful.
struct GammaBounds {
  double t1_theta_theta = 0.0;
  double t1_theta_w = 0.0;
  double t1_w_theta = 0.0;
  double t1_w_w = 0.0;
  double g2_theta = 0.0;  ///< gamma_2-type integral for F~_theta alone
  double g2_w = 0.0;
  double g3_theta = 0.0;  ///< 2 int ||D F~_theta||^{q+1} dm majorant
  double g3_w = 0.0;
  double gamma1 = 0.0;  ///< (sum of T1 terms)^{1/(1+alpha)}
  double gamma2 = 0.0;  ///< (g2_theta + g2_w)^{1/(1+alpha)}
  double gamma3 = 0.0;  ///< g3_theta + g3_w
  double q = 2.0;
};

GammaBounds gamma_bound_quadrature(const MomentOracle& oracle,
                                   const BoundMoments& moments, double theta,
                                   double w, double alpha);

/// 1/2 |[-theta, theta] cap (y - t0, y + t0)| = int_{-theta}^{theta}
/// G_{t0}(x - y) dx.
double cone_mass(double theta, double t0, double y);

}  // namespace ham
