#pragma once

// Monte Carlo experiments on the spatial integrals F_theta: CLT distances,
// logarithmic (almost sure) averages, the Ibragimov-Lifshits statistic,
// covariance decay, log-averaged centred test functions and the
// (second-order) Poincare quantities.

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ham/fields.hpp"
#include "ham/levy_noise.hpp"
#include "ham/metrics.hpp"
#include "ham/oracle.hpp"

namespace ham {

/// Noise model, horizon and randomness shared by every experiment.
struct SimulationSetup {
  LevyModel model = LevyModel::two_point(1.0, 5.0);
  double t0 = 1.0;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  MomentOracle oracle() const;
};

/// One trajectory of F~_theta on a geometric grid [1, theta_max].
SpatialIntegralSeries simulate_series(const SimulationSetup& setup,
                                      double theta_max, int per_decade,
                                      std::uint64_t replication);

// ---------------------------------------------------------------------------
// Logarithmic averages

/// Normalized weights proportional to the log-theta cell of each grid point
/// up to T (midpoint rule in log theta, cells clipped to [log theta_0,
/// log T]). Returns one weight per grid point <= T. A single point gets
/// weight one. Throws DomainError when T is below the first grid point or
/// beyond the last.
std::vector<double> log_weights(std::span<const double> theta, double T);

/// nu_T = sum_k w_k delta_{F~_{theta_k}} over theta_k <= T.
WeightedEmpiricalMeasure log_average(const SpatialIntegralSeries& series,
                                     double T);

/// sum_k w_k values_k with the weights of `log_weights`.
double log_average_of(std::span<const double> theta,
                      std::span<const double> values, double T);

/// K_t(s) = (1/log t) int_1^t (e^{i s F~_theta} - e^{-s^2/2}) dtheta/theta on
/// the log-midpoint rule. Requires t > 1; |K_t(s)| <= 2 is asserted.
std::complex<double> il_statistic(const SpatialIntegralSeries& series,
                                  double t, double s);

// ---------------------------------------------------------------------------
// CLT distances

struct CltParams {
  std::vector<double> thetas = {2.0, 8.0, 32.0};
  std::size_t replications = 10000;
  /// Replace F~_theta by exact N(0,1) draws to expose the sampling floor.
  bool calibration = false;
  FortetMourierOptions fm;
};

struct CltRow {
  double theta = 0.0;
  double kolmogorov = 0.0;
  double wasserstein = 0.0;
  double fortet_mourier = 0.0;
  double mean = 0.0;      ///< sample mean of F~_theta
  double variance = 0.0;  ///< sample variance of F~_theta
  std::size_t replications = 0;
  bool saturated = false;  ///< kolmogorov <= noise floor
};

struct CltResult {
  std::vector<CltRow> rows;
  double noise_floor = 0.0;  ///< 2 / sqrt(R)
  /// Log-log slope of d_Kol over non-saturated rows; NaN when fewer than two.
  double kolmogorov_slope = 0.0;
  std::size_t fitted_points = 0;
};

/// Throws DegenerateNoise when the noise has no variance.
CltResult clt_experiment(const SimulationSetup& setup, const CltParams& params);

// ---------------------------------------------------------------------------
// Almost sure CLT

enum class AscltMode {
  kHam,      ///< F~_theta along one solution trajectory
  kIidSums,  ///< S_k / sqrt(k) for Rademacher partial sums, k = 1..N
};

struct AscltParams {
  double theta_max = 2000.0;
  int per_decade = 64;
  std::size_t trajectories = 5;
  /// Horizons at which nu_T is evaluated; empty = 20 and dyadic T up to
  /// theta_max, plus theta_max itself.
  std::vector<double> report_at;
  AscltMode mode = AscltMode::kHam;
  FortetMourierOptions fm;
};

struct AscltCurve {
  std::uint64_t trajectory = 0;
  std::vector<double> T;
  std::vector<double> kolmogorov;
  std::vector<double> wasserstein;
  std::vector<double> fortet_mourier;
};

struct AscltResult {
  std::vector<AscltCurve> curves;
};

AscltResult asclt_experiment(const SimulationSetup& setup,
                             const AscltParams& params);

/// Default report horizons: 20, dyadic 2^k in (1, theta_max], theta_max.
std::vector<double> default_report_horizons(double theta_max);

// ---------------------------------------------------------------------------
// Ibragimov-Lifshits diagnostic

struct IlParams {
  std::size_t replications = 200;
  double s_max = 3.0;
  std::size_t s_points = 61;
  std::vector<double> t_grid = {4, 8, 16, 32, 64, 128, 256, 512, 1024};
  int per_decade = 64;
  /// Use F~ = 0 instead of simulated data (closed-form reference).
  bool zero_series = false;
};

struct IlRow {
  double t = 0.0;
  double sup_mean_abs2 = 0.0;  ///< max_s of the replication mean of |K_t(s)|^2
  double argmax_s = 0.0;
  double standard_error = 0.0;  ///< SE of the mean at argmax_s
  /// Paired SE of |K_t(s*)|^2 - |K_{t_prev}(s*)|^2 at s* = argmax_s (0 on
  /// the first row).
  double step_standard_error = 0.0;
  double partial_integral = 0.0;  ///< sum of sup * d(log log t) so far
};

struct IlResult {
  std::vector<double> s_grid;
  std::vector<IlRow> rows;
  /// Replication means of |K_t(s)|^2, rows follow t_grid, columns s_grid.
  std::vector<std::vector<double>> mean_abs2;
  std::vector<std::vector<double>> se_abs2;
  double max_modulus = 0.0;  ///< largest |K_t(s)| encountered
  /// True when sup_{k+1} <= sup_k + 4 * step_standard_error_{k+1} for all k.
  bool nonincreasing_within_4se = true;
};

IlResult il_criterion_scan(const SimulationSetup& setup, const IlParams& params);

// ---------------------------------------------------------------------------
// Covariance decay

struct CovDecayParams {
  double theta = 1.0;
  std::vector<double> ws = {4, 8, 16, 32, 64, 128, 256};
  std::size_t replications = 1000;
};

struct CovDecayRow {
  double w = 0.0;
  double analytic = 0.0;  ///< Corr(F~_theta, F~_w) from the oracle
  double monte_carlo = 0.0;
  double standard_error = 0.0;
};

struct CovDecayResult {
  std::vector<CovDecayRow> rows;
  double slope = 0.0;     ///< log-log slope of the analytic correlation in w
  double constant = 0.0;  ///< C in corr ~ C (theta / w)^{-slope}
  double mc_max_z = 0.0;  ///< max |MC - analytic| / SE
};

CovDecayResult covariance_decay_experiment(const SimulationSetup& setup,
                                           const CovDecayParams& params);

// ---------------------------------------------------------------------------
// Log-averaged centred test functions

enum class TestFunction {
  kCos,   ///< f(x) = cos x, int f dgamma = e^{-1/2}
  kClip,  ///< f(x) = max(-M, min(M, x)), int f dgamma = 0
};

struct Lemma1Params {
  TestFunction function = TestFunction::kCos;
  double clip = 1.0;
  double theta_max = 2000.0;
  int per_decade = 64;
  std::size_t trajectories = 5;
  std::vector<double> report_at;
};

struct Lemma1Curve {
  std::uint64_t trajectory = 0;
  std::vector<double> T;
  std::vector<double> value;  ///< L_T
  /// Log average of Lip(f) theta^{-alpha/(1+alpha)}: size of the error made
  /// by centring with int f dgamma instead of E f(F~_theta).
  std::vector<double> bias_envelope;
};

struct Lemma1Result {
  double gaussian_mean = 0.0;
  std::vector<Lemma1Curve> curves;
};

double test_function(TestFunction f, double clip, double x);
double gaussian_expectation(TestFunction f, double clip);

Lemma1Result lemma1_demo(const SimulationSetup& setup,
                         const Lemma1Params& params);

// ---------------------------------------------------------------------------
// Poincare and gamma terms

struct PoincareParams {
  std::vector<double> variance_thetas = {1.0, 5.0};
  std::vector<double> gamma3_thetas = {4, 8, 16, 32, 64};
  std::size_t replications = 1000;
  std::size_t probes = 32;  ///< xi samples per configuration
  /// (theta, w) pairs of the bound table.
  std::vector<std::pair<double, double>> claim_pairs = {
      {1, 1}, {1, 4}, {1, 16}, {4, 16}, {4, 64}, {16, 64}, {16, 256}};
};

struct PoincareRow {
  double theta = 0.0;
  double variance = 0.0;          ///< analytic Var(F_theta)
  double derivative_energy = 0.0; ///< MC int E[(D F_theta)^2] dm
  double standard_error = 0.0;
  bool holds = false;  ///< variance <= energy + 4 SE
};

struct Gamma3Row {
  double theta = 0.0;
  double gamma3 = 0.0;  ///< 2 int E|D F~_theta|^{q+1} dm
  double standard_error = 0.0;
  double bound = 0.0;   ///< kernel majorant from gamma_bound_quadrature
};

struct ClaimRow {
  double theta = 0.0;
  double w = 0.0;
  double covariance_term = 0.0;  ///< (2/sqrt(pi)) |Corr(F~_theta, F~_w)|
  GammaBounds gammas;
  double total = 0.0;
};

struct PoincareResult {
  double q = 2.0;
  std::vector<PoincareRow> variance_rows;
  std::vector<Gamma3Row> gamma3_rows;
  double gamma3_slope = 0.0;
  double gamma3_target = 0.0;  ///< -(q - 1) / 2
  std::vector<ClaimRow> claim_rows;
};

PoincareResult poincare_gamma_check(const SimulationSetup& setup,
                                    const PoincareParams& params);

/// Moments of the model entering the bound quadratures.
BoundMoments bound_moments(const LevyModel& model);

}  // namespace ham
