#include "ham/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "ham/errors.hpp"
#include "ham/parallel.hpp"
#include "ham/solver.hpp"
#include "ham/stats.hpp"

namespace ham {
namespace {

void require_variance(const MomentOracle& oracle, const char* what) {
  if (!(oracle.m2() > 0.0)) {
    throw DegenerateNoise(fmt::format(
        "{}: the noise has m2 = 0 (e.g. lambda = 0), so F_theta is identically "
        "zero and F_theta / sigma_theta is undefined",
        what));
  }
}

void require_ascending_positive(std::span<const double> values, const char* what) {
  if (values.empty()) throw ConfigError(fmt::format("{}: empty grid", what));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || (i > 0 && !(values[i] > values[i - 1]))) {
      throw ConfigError(fmt::format("{}: grid must be positive and strictly ascending", what));
    }
  }
}

std::vector<double> column(const std::vector<std::vector<double>>& table, std::size_t j) {
  std::vector<double> out(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) out[r] = table[r][j];
  return out;
}

PiecewiseField simulate_field(const SimulationSetup& setup, double theta_max,
                              std::uint64_t replication) {
  const auto window = SpaceTimeWindow::for_half_width(setup.t0, theta_max);
  const auto config =
      sample_prm(setup.model, window, {setup.seed, replication, StreamPurpose::kNoise});
  return evaluate_field(solve_fast(config));
}

std::vector<double> resolve_horizons(const std::vector<double>& requested,
                                     double theta_max) {
  std::vector<double> out =
      requested.empty() ? default_report_horizons(theta_max) : requested;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (double T : out) {
    if (!(T >= 1.0) || T > theta_max) {
      throw ConfigError(fmt::format("report horizon {} outside [1, {}]", T, theta_max));
    }
  }
  return out;
}

NoiseAtom draw_probe(const LevyModel& model, double t0, double half_width,
                     Philox4x32& gen) {
  NoiseAtom xi;
  xi.s = t0 * uniform01(gen);
  xi.y = -half_width + 2.0 * half_width * uniform01(gen);
  xi.z = model.sample_jump(gen);
  return xi;
}

}  // namespace

MomentOracle SimulationSetup::oracle() const {
  return MomentOracle(t0, model.moment(2.0));
}

SpatialIntegralSeries simulate_series(const SimulationSetup& setup,
                                      double theta_max, int per_decade,
                                      std::uint64_t replication) {
  const auto oracle = setup.oracle();
  require_variance(oracle, "simulate_series");
  const auto field = simulate_field(setup, theta_max, replication);
  const auto grid = geometric_theta_grid(1.0, theta_max, per_decade);
  auto series = standardize(integral_series(field, grid), oracle);
  series.seed = setup.seed;
  series.replication = replication;
  return series;
}

std::vector<double> log_weights(std::span<const double> theta, double T) {
  if (theta.empty()) throw DomainError("log_weights: empty grid");
  if (!(T >= theta.front())) {
    throw DomainError(fmt::format("log_weights: T = {} precedes the first grid point {}",
                                  T, theta.front()));
  }
  if (T > theta.back() * (1.0 + 1e-12)) {
    throw DomainError(fmt::format("log_weights: grid ends at {} < T = {}", theta.back(), T));
  }
  const auto count = static_cast<std::size_t>(
      std::upper_bound(theta.begin(), theta.end(), T) - theta.begin());
  if (count == 1) return {1.0};
  std::vector<double> w(count);
  const double log_t = std::log(T);
  double left = std::log(theta[0]);
  for (std::size_t k = 0; k < count; ++k) {
    const double right =
        k + 1 < count ? 0.5 * (std::log(theta[k]) + std::log(theta[k + 1])) : log_t;
    w[k] = right - left;
    left = right;
  }
  const double total = pairwise_sum(w);
  if (!(total > 0.0)) return std::vector<double>(count, 1.0 / static_cast<double>(count));
  for (double& v : w) v /= total;
  return w;
}

WeightedEmpiricalMeasure log_average(const SpatialIntegralSeries& series, double T) {
  if (series.standardized.size() != series.theta.size()) {
    throw DomainError("log_average: series is not standardized");
  }
  auto w = log_weights(series.theta, T);
  std::vector<double> points(series.standardized.begin(),
                             series.standardized.begin() + static_cast<std::ptrdiff_t>(w.size()));
  return WeightedEmpiricalMeasure::normalized(std::move(points), std::move(w));
}

double log_average_of(std::span<const double> theta, std::span<const double> values,
                      double T) {
  if (values.size() != theta.size()) throw DomainError("log_average_of: size mismatch");
  const auto w = log_weights(theta, T);
  std::vector<double> terms(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) terms[k] = w[k] * values[k];
  return pairwise_sum(terms);
}

std::complex<double> il_statistic(const SpatialIntegralSeries& series, double t, double s) {
  if (!(t > 1.0)) throw DomainError(fmt::format("il_statistic: need t > 1, got {}", t));
  if (series.standardized.size() != series.theta.size()) {
    throw DomainError("il_statistic: series is not standardized");
  }
  const auto w = log_weights(series.theta, t);
  const double gauss = std::exp(-0.5 * s * s);
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double phase = s * series.standardized[k];
    re += w[k] * (std::cos(phase) - gauss);
    im += w[k] * std::sin(phase);
  }
  const std::complex<double> value(re, im);
  if (!(std::abs(value) <= 2.0 + 1e-12)) {
    throw HamError(ErrorCode::kInternal,
                   fmt::format("il_statistic: |K_t(s)| = {} exceeds 2", std::abs(value)));
  }
  return value;
}

// ---------------------------------------------------------------------------

CltResult clt_experiment(const SimulationSetup& setup, const CltParams& params) {
  require_ascending_positive(params.thetas, "clt thetas");
  if (params.replications < 2) throw ConfigError("clt: need at least 2 replications");
  const auto oracle = setup.oracle();
  if (!params.calibration) require_variance(oracle, "clt");
  const double theta_max = params.thetas.back();
  const std::size_t m = params.thetas.size();

  const auto samples = parallel_map<std::vector<double>>(
      params.replications, setup.threads, [&](std::size_t r) {
        std::vector<double> row(m);
        if (params.calibration) {
          Philox4x32 gen({setup.seed, r, StreamPurpose::kCalibration});
          for (auto& v : row) v = normal_quantile(uniform01_open(gen));
          return row;
        }
        const auto field = simulate_field(setup, theta_max, r);
        for (std::size_t j = 0; j < m; ++j) {
          row[j] = spatial_integral(field, params.thetas[j]) / oracle.sigma(params.thetas[j]);
        }
        return row;
      });

  CltResult out;
  out.noise_floor = 2.0 / std::sqrt(static_cast<double>(params.replications));
  std::vector<double> fit_x, fit_y;
  for (std::size_t j = 0; j < m; ++j) {
    const auto values = column(samples, j);
    const auto mu = WeightedEmpiricalMeasure::from_samples(values);
    const auto summary = summarize(values);
    CltRow row;
    row.theta = params.thetas[j];
    row.kolmogorov = kolmogorov(mu);
    row.wasserstein = wasserstein1(mu);
    row.fortet_mourier = fortet_mourier(mu, params.fm);
    row.mean = summary.mean;
    row.variance = summary.variance;
    row.replications = params.replications;
    row.saturated = row.kolmogorov <= out.noise_floor;
    if (!row.saturated) {
      fit_x.push_back(row.theta);
      fit_y.push_back(row.kolmogorov);
    }
    out.rows.push_back(row);
  }
  out.fitted_points = fit_x.size();
  out.kolmogorov_slope = fit_x.size() >= 2 ? fit_log_log(fit_x, fit_y).slope
                                           : std::numeric_limits<double>::quiet_NaN();
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> default_report_horizons(double theta_max) {
  std::vector<double> out;
  if (theta_max >= 20.0) out.push_back(20.0);
  for (double T = 2.0; T <= theta_max; T *= 2.0) out.push_back(T);
  out.push_back(theta_max);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

AscltResult asclt_experiment(const SimulationSetup& setup, const AscltParams& params) {
  if (!(params.theta_max > 1.0)) throw ConfigError("asclt: theta_max must exceed 1");
  if (params.trajectories == 0) throw ConfigError("asclt: need at least one trajectory");
  const auto horizons = resolve_horizons(params.report_at, params.theta_max);

  AscltResult out;
  out.curves = parallel_map<AscltCurve>(
      params.trajectories, setup.threads, [&](std::size_t i) {
        AscltCurve curve;
        curve.trajectory = i;
        SpatialIntegralSeries series;
        std::vector<double> iid_weights;
        if (params.mode == AscltMode::kHam) {
          series = simulate_series(setup, params.theta_max, params.per_decade, i);
        } else {
          const auto n = static_cast<std::size_t>(std::floor(params.theta_max));
          Philox4x32 gen({setup.seed, i, StreamPurpose::kIidSums});
          double sum = 0.0;
          for (std::size_t k = 1; k <= n; ++k) {
            sum += (gen() & 1U) ? 1.0 : -1.0;
            series.theta.push_back(static_cast<double>(k));
            series.standardized.push_back(sum / std::sqrt(static_cast<double>(k)));
            iid_weights.push_back(1.0 / static_cast<double>(k));
          }
        }
        for (double T : horizons) {
          WeightedEmpiricalMeasure mu;
          if (params.mode == AscltMode::kHam) {
            mu = log_average(series, T);
          } else {
            const auto count = static_cast<std::ptrdiff_t>(std::floor(T));
            mu = WeightedEmpiricalMeasure::normalized(
                {series.standardized.begin(), series.standardized.begin() + count},
                {iid_weights.begin(), iid_weights.begin() + count});
          }
          curve.T.push_back(T);
          curve.kolmogorov.push_back(kolmogorov(mu));
          curve.wasserstein.push_back(wasserstein1(mu));
          curve.fortet_mourier.push_back(fortet_mourier(mu, params.fm));
        }
        return curve;
      });
  return out;
}

// ---------------------------------------------------------------------------

IlResult il_criterion_scan(const SimulationSetup& setup, const IlParams& params) {
  require_ascending_positive(params.t_grid, "il t grid");
  if (params.t_grid.front() <= 1.0) throw ConfigError("il: t grid must exceed 1");
  if (params.replications < 2) throw ConfigError("il: need at least 2 replications");
  if (params.s_points < 2 || !(params.s_max > 0.0)) throw ConfigError("il: invalid s grid");
  if (!params.zero_series) require_variance(setup.oracle(), "il");

  IlResult out;
  for (std::size_t j = 0; j < params.s_points; ++j) {
    out.s_grid.push_back(-params.s_max + 2.0 * params.s_max * static_cast<double>(j) /
                                             static_cast<double>(params.s_points - 1));
  }
  const std::size_t nt = params.t_grid.size(), ns = params.s_points;
  const double theta_max = params.t_grid.back();

  struct RepValues {
    std::vector<double> abs2;  // nt * ns
    double max_modulus = 0.0;
  };
  const auto reps = parallel_map<RepValues>(
      params.replications, setup.threads, [&](std::size_t r) {
        SpatialIntegralSeries series;
        if (params.zero_series) {
          series.theta = geometric_theta_grid(1.0, theta_max, params.per_decade);
          series.value.assign(series.theta.size(), 0.0);
          series.standardized.assign(series.theta.size(), 0.0);
        } else {
          series = simulate_series(setup, theta_max, params.per_decade, r);
        }
        RepValues v;
        v.abs2.resize(nt * ns);
        for (std::size_t a = 0; a < nt; ++a) {
          for (std::size_t b = 0; b < ns; ++b) {
            const auto k = il_statistic(series, params.t_grid[a], out.s_grid[b]);
            v.max_modulus = std::max(v.max_modulus, std::abs(k));
            v.abs2[a * ns + b] = std::norm(k);
          }
        }
        return v;
      });

  std::vector<double> buffer(reps.size());
  auto cell = [&](std::size_t a, std::size_t b) {
    for (std::size_t r = 0; r < reps.size(); ++r) buffer[r] = reps[r].abs2[a * ns + b];
    return summarize(buffer);
  };
  for (const auto& rep : reps) out.max_modulus = std::max(out.max_modulus, rep.max_modulus);

  out.mean_abs2.assign(nt, std::vector<double>(ns));
  out.se_abs2.assign(nt, std::vector<double>(ns));
  double partial = 0.0;
  double prev_loglog = std::log(std::log(2.0));
  for (std::size_t a = 0; a < nt; ++a) {
    IlRow row;
    row.t = params.t_grid[a];
    std::size_t best = 0;
    for (std::size_t b = 0; b < ns; ++b) {
      const auto s = cell(a, b);
      out.mean_abs2[a][b] = s.mean;
      out.se_abs2[a][b] = s.standard_error;
      if (s.mean > out.mean_abs2[a][best]) best = b;
    }
    row.sup_mean_abs2 = out.mean_abs2[a][best];
    row.argmax_s = out.s_grid[best];
    row.standard_error = out.se_abs2[a][best];
    if (a > 0) {
      for (std::size_t r = 0; r < reps.size(); ++r) {
        buffer[r] = reps[r].abs2[a * ns + best] - reps[r].abs2[(a - 1) * ns + best];
      }
      row.step_standard_error = summarize(buffer).standard_error;
      const double previous = out.rows.back().sup_mean_abs2;
      // 1e-12 absorbs rounding in the normalized weights.
      if (row.sup_mean_abs2 > previous + 4.0 * row.step_standard_error + 1e-12) {
        out.nonincreasing_within_4se = false;
      }
    }
    const double loglog = std::log(std::log(row.t));
    partial += row.sup_mean_abs2 * (loglog - prev_loglog);
    prev_loglog = loglog;
    row.partial_integral = partial;
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------

CovDecayResult covariance_decay_experiment(const SimulationSetup& setup,
                                           const CovDecayParams& params) {
  require_ascending_positive(params.ws, "cov-decay w grid");
  if (!(params.theta >= 1.0) || params.ws.front() < params.theta) {
    throw ConfigError("cov-decay: need 1 <= theta <= min(w)");
  }
  const auto oracle = setup.oracle();
  require_variance(oracle, "cov-decay");

  CovDecayResult out;
  std::vector<double> analytic;
  for (double w : params.ws) analytic.push_back(oracle.correlation_F(params.theta, w));
  const auto fit = fit_log_log(params.ws, analytic);
  out.slope = fit.slope;
  out.constant = std::exp(fit.intercept) * std::pow(params.theta, fit.slope);

  const std::size_t m = params.ws.size();
  std::vector<std::vector<double>> products;
  if (params.replications >= 2) {
    const double sig_theta = oracle.sigma(params.theta);
    products = parallel_map<std::vector<double>>(
        params.replications, setup.threads, [&](std::size_t r) {
          const auto field = simulate_field(setup, params.ws.back(), r);
          const double f_theta = spatial_integral(field, params.theta) / sig_theta;
          std::vector<double> row(m);
          for (std::size_t j = 0; j < m; ++j) {
            row[j] = f_theta * spatial_integral(field, params.ws[j]) / oracle.sigma(params.ws[j]);
          }
          return row;
        });
  }
  for (std::size_t j = 0; j < m; ++j) {
    CovDecayRow row;
    row.w = params.ws[j];
    row.analytic = analytic[j];
    if (!products.empty()) {
      const auto s = summarize(column(products, j));
      row.monte_carlo = s.mean;
      row.standard_error = s.standard_error;
      if (s.standard_error > 0.0) {
        out.mc_max_z = std::max(out.mc_max_z,
                                std::abs(s.mean - row.analytic) / s.standard_error);
      }
    }
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------

double test_function(TestFunction f, double clip, double x) {
  switch (f) {
    case TestFunction::kCos: return std::cos(x);
    case TestFunction::kClip: return std::clamp(x, -clip, clip);
  }
  return 0.0;
}

double gaussian_expectation(TestFunction f, double /*clip*/) {
  switch (f) {
    case TestFunction::kCos: return std::exp(-0.5);
    case TestFunction::kClip: return 0.0;
  }
  return 0.0;
}

Lemma1Result lemma1_demo(const SimulationSetup& setup, const Lemma1Params& params) {
  if (!(params.theta_max > 1.0)) throw ConfigError("lemma1: theta_max must exceed 1");
  if (params.function == TestFunction::kClip && !(params.clip > 0.0)) {
    throw ConfigError("lemma1: clip level must be > 0");
  }
  const auto horizons = resolve_horizons(params.report_at, params.theta_max);
  const double alpha = setup.model.alpha();
  Lemma1Result out;
  out.gaussian_mean = gaussian_expectation(params.function, params.clip);
  out.curves = parallel_map<Lemma1Curve>(
      params.trajectories, setup.threads, [&](std::size_t i) {
        const auto series = simulate_series(setup, params.theta_max, params.per_decade, i);
        std::vector<double> h(series.size()), envelope(series.size());
        for (std::size_t k = 0; k < series.size(); ++k) {
          h[k] = test_function(params.function, params.clip, series.standardized[k]) -
                 out.gaussian_mean;
          envelope[k] = std::pow(series.theta[k], -alpha / (1.0 + alpha));
        }
        Lemma1Curve curve;
        curve.trajectory = i;
        for (double T : horizons) {
          curve.T.push_back(T);
          curve.value.push_back(log_average_of(series.theta, h, T));
          curve.bias_envelope.push_back(log_average_of(series.theta, envelope, T));
        }
        return curve;
      });
  return out;
}

// ---------------------------------------------------------------------------

BoundMoments bound_moments(const LevyModel& model) {
  const double alpha = model.alpha();
  const double q = std::min(2.0, 1.0 + 2.0 * alpha);
  return {model.moment(2.0), model.moment(1.0 + alpha), model.moment(2.0 + 2.0 * alpha),
          model.moment(q + 1.0)};
}

PoincareResult poincare_gamma_check(const SimulationSetup& setup,
                                    const PoincareParams& params) {
  if (params.replications < 2 || params.probes == 0) {
    throw ConfigError("poincare: need >= 2 replications and >= 1 probe");
  }
  const auto oracle = setup.oracle();
  const double alpha = setup.model.alpha();
  const double lambda = setup.model.total_mass();
  PoincareResult out;
  out.q = std::min(2.0, 1.0 + 2.0 * alpha);
  out.gamma3_target = -(out.q - 1.0) / 2.0;

  // Integrals over m restricted to [0, t0) x [-theta - t0, theta + t0]; D_xi
  // F_theta vanishes outside. Estimator per configuration:
  // lambda * area * mean over probes.
  auto probe_average = [&](double theta, std::size_t r, auto&& transform) {
    const auto window = SpaceTimeWindow::for_half_width(setup.t0, theta);
    const auto solution = solve_fast(
        sample_prm(setup.model, window, {setup.seed, r, StreamPurpose::kNoise}));
    if (lambda == 0.0) return 0.0;
    Philox4x32 gen({setup.seed, r, StreamPurpose::kProbe});
    std::vector<double> terms(params.probes);
    for (auto& term : terms) {
      const auto xi = draw_probe(setup.model, setup.t0, theta + setup.t0, gen);
      term = transform(add_one_cost(solution, xi, SpatialIntegral{theta}));
    }
    return lambda * window.area() * pairwise_sum(terms) /
           static_cast<double>(params.probes);
  };

  for (double theta : params.variance_thetas) {
    if (!(theta > 0.0)) throw ConfigError("poincare: theta must be > 0");
    const auto estimates = parallel_map<double>(
        params.replications, setup.threads,
        [&](std::size_t r) { return probe_average(theta, r, [](double d) { return d * d; }); });
    const auto s = summarize(estimates);
    PoincareRow row;
    row.theta = theta;
    row.variance = oracle.variance_F(theta);
    row.derivative_energy = s.mean;
    row.standard_error = s.standard_error;
    row.holds = row.variance <= row.derivative_energy + 4.0 * row.standard_error;
    out.variance_rows.push_back(row);
  }

  if (!(oracle.m2() > 0.0)) return out;  // F~ undefined; only part (a) applies

  const auto moments = bound_moments(setup.model);
  std::vector<double> fit_x, fit_y;
  for (double theta : params.gamma3_thetas) {
    if (!(theta >= 1.0)) throw ConfigError("poincare: gamma3 thetas must be >= 1");
    const double sigma = oracle.sigma(theta);
    const double power = out.q + 1.0;
    const auto estimates = parallel_map<double>(
        params.replications, setup.threads, [&](std::size_t r) {
          return 2.0 * probe_average(theta, r, [&](double d) {
                   return std::pow(std::abs(d) / sigma, power);
                 });
        });
    const auto s = summarize(estimates);
    Gamma3Row row;
    row.theta = theta;
    row.gamma3 = s.mean;
    row.standard_error = s.standard_error;
    row.bound = gamma_bound_quadrature(oracle, moments, theta, theta, alpha).g3_theta;
    out.gamma3_rows.push_back(row);
    fit_x.push_back(theta);
    fit_y.push_back(row.gamma3);
  }
  out.gamma3_slope = fit_x.size() >= 2 ? fit_log_log(fit_x, fit_y).slope
                                       : std::numeric_limits<double>::quiet_NaN();

  for (const auto& [theta, w] : params.claim_pairs) {
    ClaimRow row;
    row.theta = theta;
    row.w = w;
    row.gammas = gamma_bound_quadrature(oracle, moments, theta, w, alpha);
    row.covariance_term =
        2.0 / std::sqrt(std::numbers::pi) * std::abs(oracle.correlation_F(theta, w));
    row.total = row.covariance_term + row.gammas.gamma1 + row.gammas.gamma2 + row.gammas.gamma3;
    out.claim_rows.push_back(row);
  }
  return out;
}

}  // namespace ham
