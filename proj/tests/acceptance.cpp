// Runs every acceptance criterion at its stated scale and tolerance and
// prints one PASS/FAIL line per criterion. Exit status is nonzero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "ham/cli.hpp"
#include "ham/experiments.hpp"
#include "ham/metrics.hpp"
#include "ham/oracle.hpp"
#include "ham/parallel.hpp"
#include "ham/rng.hpp"
#include "ham/solver.hpp"
#include "ham/stats.hpp"

namespace {

using namespace ham;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  // 0 when the criterion states no runtime bound
  std::function<Outcome()> check;
};

constexpr std::uint64_t kSeed = 1;

// Mean and standard error of a sample, with the sample variance and its SE.
struct Moments {
  double mean = 0, se_mean = 0, variance = 0, se_variance = 0;
};

Moments moments_of(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = pairwise_sum(x) / n;
  std::vector<double> d2(x.size()), d4(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = pairwise_sum(d2) / n;
  const double m4 = pairwise_sum(d4) / n;
  Moments out;
  out.mean = mean;
  out.variance = m2 * n / (n - 1.0);
  out.se_mean = std::sqrt(out.variance / n);
  out.se_variance = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  return out;
}

// 1. Fast solver against the quadratic reference.
Outcome solver_equivalence() {
  double worst = 0.0, worst_pure = 0.0;
  std::size_t largest = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const double lambda = 10.0 + 45.0 * static_cast<double>(rep % 10);
    const double half = 0.5 + 0.1 * static_cast<double>(rep % 6);
    const auto model = LevyModel::uniform(1.5, lambda);
    auto config = sample_prm(model, {1.0, -half, half}, {kSeed, rep, StreamPurpose::kTest});
    if (config.size() > 500) config.atoms.resize(500);
    largest = std::max(largest, config.size());
    const auto naive = solve_naive(config);
    const auto fast = solve_fast(config);
    if (naive.size() != fast.size()) return {false, "size mismatch"};
    for (std::size_t i = 0; i < naive.size(); ++i) {
      const double gap = std::abs(fast.values[i] - naive.values[i]);
      worst = std::max(worst, gap / std::max(1.0, std::abs(naive.values[i])));
      worst_pure = std::max(worst_pure, gap / std::abs(naive.values[i]));
    }
  }
  return {worst <= 1e-10,
          fmt::format("max rel dev {:.3g} (pure relative {:.3g}), largest n={}", worst,
                      worst_pure, largest)};
}

// 2. Monte Carlo E[u(1,0)^2] against cosh(t0 sqrt(m2/2)).
Outcome second_moment() {
  const auto model = LevyModel::two_point(1.0, 5.0);
  const MomentOracle oracle(1.0, model.moment(2.0));
  const double closed = oracle.second_moment(1.0);
  const double quad = oracle.second_moment_quadrature(1.0);
  const double quad_gap = std::abs(closed - quad) / closed;
  const std::size_t reps = 100000;
  const SpaceTimeWindow window{1.0, -1.0, 1.0};
  const auto squares = parallel_map<double>(reps, 1, [&](std::size_t r) {
    const auto config = sample_prm(model, window, {kSeed, r, StreamPurpose::kNoise});
    const double u = field_value_direct(solve_fast(config), 0.0);
    return u * u;
  });
  const auto m = moments_of(squares);
  const double z = (m.mean - closed) / m.se_mean;
  return {std::abs(z) <= 4.0 && quad_gap <= 1e-8,
          fmt::format("MC {:.6f} +- {:.6f}, cosh {:.6f}, z={:.2f}; |cosh - Volterra|/cosh={:.2e}",
                      m.mean, m.se_mean, closed, z, quad_gap)};
}

// 3. Sample variance of F_theta against sigma^2(theta); affine tail.
Outcome variance_law() {
  SimulationSetup setup;
  setup.seed = kSeed;
  const auto oracle = setup.oracle();
  const std::vector<double> thetas = {1.0, 2.0, 5.0, 10.0};
  const std::size_t reps = 10000;
  const auto window = SpaceTimeWindow::for_half_width(setup.t0, thetas.back());
  const auto samples = parallel_map<std::vector<double>>(reps, 1, [&](std::size_t r) {
    const auto config = sample_prm(setup.model, window, {kSeed, r, StreamPurpose::kNoise});
    return integral_series(evaluate_field(solve_fast(config)), thetas).value;
  });
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    std::vector<double> f(reps);
    for (std::size_t r = 0; r < reps; ++r) f[r] = samples[r][k];
    const auto m = moments_of(f);
    const double target = oracle.variance_F(thetas[k]);
    const double z = (m.variance - target) / m.se_variance;
    pass = pass && std::abs(z) <= 4.0;
    detail += fmt::format("theta={}: {:.4f} vs {:.4f} (z={:.2f}); ", thetas[k], m.variance,
                          target, z);
  }
  const double r100 = oracle.variance_F(100.0) / 100.0;
  const double r200 = oracle.variance_F(200.0) / 200.0;
  const double ratio_gap = std::abs(r200 - r100) / r100;
  pass = pass && ratio_gap <= 0.01;
  detail += fmt::format("sigma2/theta at 100 vs 200 differ by {:.3f}%", 100.0 * ratio_gap);
  return {pass, detail};
}

// 4. CLT distances decrease above the noise floor with a negative slope.
Outcome clt_check(const LevyModel& model, std::string& detail) {
  SimulationSetup setup;
  setup.model = model;
  setup.seed = kSeed;
  CltParams params;  // thetas {2, 8, 32}, R = 10^4
  const auto r = clt_experiment(setup, params);
  bool decreasing = true;
  for (std::size_t k = 1; k < r.rows.size(); ++k) {
    if (!r.rows[k].saturated && !(r.rows[k].kolmogorov < r.rows[k - 1].kolmogorov)) {
      decreasing = false;
    }
  }
  const bool slope_ok = r.fitted_points >= 2 && r.kolmogorov_slope < 0.0;
  detail += fmt::format("[{}] d_Kol", model.describe());
  for (const auto& row : r.rows) {
    detail += fmt::format(" {:.4f}{}", row.kolmogorov, row.saturated ? "(sat)" : "");
  }
  detail += fmt::format(", floor {:.3f}, slope {:.3f} over {} pts; ", r.noise_floor,
                        r.kolmogorov_slope, r.fitted_points);
  return {decreasing && slope_ok, {}};
}

Outcome clt_rate() {
  std::string detail;
  const bool symmetric = clt_check(LevyModel::two_point(1.0, 5.0), detail).pass;
  const bool skewed = clt_check(LevyModel::atoms({{3.0, 0.1}, {-0.3, 1.0}}), detail).pass;
  return {symmetric && skewed, detail};
}

// 5. Analytic correlation decay.
Outcome covariance_decay() {
  SimulationSetup setup;
  CovDecayParams params;
  params.replications = 0;  // pure quadrature
  const auto r = covariance_decay_experiment(setup, params);
  return {std::abs(r.slope + 0.5) <= 0.1,
          fmt::format("slope {:.4f}, constant {:.4f}", r.slope, r.constant)};
}

// 6. Almost sure CLT along single trajectories.
Outcome asclt() {
  SimulationSetup setup;
  setup.seed = kSeed;
  AscltParams params;
  params.trajectories = 5;
  params.theta_max = 2000.0;
  params.report_at = {20.0, 2000.0};
  const auto start = std::chrono::steady_clock::now();
  const auto r = asclt_experiment(setup, params);
  const double per_seed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 5.0;
  int improved = 0;
  std::vector<double> finals;
  std::string detail;
  for (const auto& c : r.curves) {
    if (c.kolmogorov[1] < c.kolmogorov[0]) ++improved;
    finals.push_back(c.kolmogorov[1]);
    detail += fmt::format("{:.3f}->{:.3f} ", c.kolmogorov[0], c.kolmogorov[1]);
  }
  std::sort(finals.begin(), finals.end());
  const double median = finals[2];
  detail += fmt::format("; improved {}/5, median at T=2000 {:.3f} (target < 0.15), {:.1f} s/seed",
                        improved, median, per_seed);
  // Reference scale: the same statistic for classical i.i.d. partial sums.
  params.mode = AscltMode::kIidSums;
  std::vector<double> iid;
  for (const auto& c : asclt_experiment(setup, params).curves) iid.push_back(c.kolmogorov[1]);
  std::sort(iid.begin(), iid.end());
  detail += fmt::format("; i.i.d. partial sums at N=2000 give median {:.3f}", iid[2]);
  return {improved >= 4 && median < 0.15 && per_seed < 300.0, detail};
}

// 7. Ibragimov-Lifshits statistic.
Outcome il_diagnostic() {
  SimulationSetup setup;
  setup.seed = kSeed;
  IlParams params;  // R = 200, |s| <= 3, t = 4..1024
  const auto r = il_criterion_scan(setup, params);
  std::string detail = "sup E|K|^2:";
  for (const auto& row : r.rows) {
    detail += fmt::format(" {:.4f}", row.sup_mean_abs2);
  }
  detail += fmt::format("; max |K| {:.3f}", r.max_modulus);
  return {r.nonincreasing_within_4se, detail};
}

// 8. Exact support of first and second add-one costs.
Outcome support_properties() {
  Philox4x32 gen({kSeed, 0, StreamPurpose::kTest});
  const double t0 = 1.0;
  std::size_t first_out = 0, second_out = 0, violations = 0;
  std::size_t first_in_nonzero = 0, first_in = 0;
  for (std::uint64_t rep = 0; rep < 1000; ++rep) {
    const auto model = LevyModel::uniform(1.5, 10.0);
    const auto config = sample_prm(model, {t0, -2.5, 2.5}, {kSeed, rep, StreamPurpose::kNoise});
    const auto sol = solve_fast(config);
    const double x = -0.5 + uniform01(gen);
    const NoiseAtom xi{t0 * uniform01(gen), -1.5 + 3.0 * uniform01(gen), 1.0};
    const double d1 = add_one_cost(sol, xi, PointValue{x});
    if (wave_kernel(t0 - xi.s, x - xi.y) == 0.0) {
      ++first_out;
      if (d1 != 0.0) ++violations;
    } else {
      ++first_in;
      if (d1 != 0.0) ++first_in_nonzero;
    }
    NoiseAtom a{t0 * uniform01(gen), -1.5 + 3.0 * uniform01(gen), -0.7};
    NoiseAtom b{t0 * uniform01(gen), -1.5 + 3.0 * uniform01(gen), 1.3};
    if (a.s > b.s) std::swap(a, b);
    if (wave_kernel(t0 - b.s, x - b.y) * wave_kernel(b.s - a.s, b.y - a.y) == 0.0) {
      ++second_out;
      if (second_add_one_cost(sol, a, b, PointValue{x}) != 0.0) ++violations;
    }
  }
  return {violations == 0 && first_out > 0 && second_out > 0,
          fmt::format("{} first and {} second differences outside the cones, {} nonzero; "
                      "{}/{} first differences inside are nonzero",
                      first_out, second_out, violations, first_in_nonzero, first_in)};
}

PoincareResult poincare_run() {
  SimulationSetup setup;
  setup.seed = kSeed;
  PoincareParams params;  // theta {1, 5}, gamma3 thetas 4..64, R = 1000
  return poincare_gamma_check(setup, params);
}

// 9. Poincare inequality.
Outcome poincare(const PoincareResult& r) {
  bool pass = !r.variance_rows.empty();
  std::string detail;
  for (const auto& row : r.variance_rows) {
    pass = pass && row.holds;
    detail += fmt::format("theta={}: Var {:.4f} <= {:.4f} + 4 * {:.4f}; ", row.theta,
                          row.variance, row.derivative_energy, row.standard_error);
  }
  return {pass, detail};
}

// 10. gamma_3 Monte Carlo slope and bound quadrature slopes.
Outcome gamma_decay(const PoincareResult& r) {
  const bool g3_ok = std::abs(r.gamma3_slope - r.gamma3_target) <= 0.15;
  std::string detail = fmt::format("gamma3 MC slope {:.3f} (target {:.2f}); ", r.gamma3_slope,
                                   r.gamma3_target);
  bool bounds_ok = true;
  const auto model = LevyModel::two_point(1.0, 5.0);
  for (double alpha : {1.0, 0.5}) {
    const MomentOracle oracle(1.0, model.moment(2.0));
    const auto moments = bound_moments(LevyModel::two_point(1.0, 5.0, alpha));
    std::vector<double> x, diag, cross;
    for (double v = 4.0; v <= 256.0; v *= 2.0) {
      x.push_back(v);
      diag.push_back(gamma_bound_quadrature(oracle, moments, v, v, alpha).t1_theta_theta);
      cross.push_back(gamma_bound_quadrature(oracle, moments, 1.0, v, alpha).t1_theta_w);
    }
    const double s_diag = fit_log_log(x, diag).slope;
    const double s_cross = fit_log_log(x, cross).slope;
    const bool ok = std::abs(s_diag + alpha) <= 0.1 &&
                    std::abs(s_cross + (1.0 + alpha) / 2.0) <= 0.1;
    bounds_ok = bounds_ok && ok;
    detail += fmt::format("alpha={}: diagonal slope {:.3f} (target {:.2f}), cross slope {:.3f} "
                          "(target {:.2f}); ",
                          alpha, s_diag, -alpha, s_cross, -(1.0 + alpha) / 2.0);
  }
  return {g3_ok && bounds_ok, detail};
}

// 11. Metric unit oracles.
Outcome metric_oracles() {
  const std::vector<double> zero = {0.0};
  const auto dirac = WeightedEmpiricalMeasure::from_samples(zero);
  const double kol = kolmogorov(dirac);
  const double w1 = wasserstein1(dirac);
  const double w1_gap = std::abs(w1 - std::sqrt(2.0 / std::numbers::pi));

  std::vector<WeightedEmpiricalMeasure> measures = {dirac};
  for (double c : {-40.0, -3.0, 0.5, 2.0, 40.0}) {
    measures.push_back(WeightedEmpiricalMeasure::from_samples(std::vector<double>{c}));
  }
  measures.emplace_back(std::vector<double>{-1.0, 1.0}, std::vector<double>{0.5, 0.5});
  measures.emplace_back(std::vector<double>{-0.2, 0.3, 4.0}, std::vector<double>{0.6, 0.3, 0.1});
  Philox4x32 gen({kSeed, 0, StreamPurpose::kCalibration});
  for (std::size_t n : {10u, 100u, 1000u}) {
    std::vector<double> gauss(n), uni(n);
    for (std::size_t i = 0; i < n; ++i) {
      gauss[i] = normal_quantile(uniform01(gen));
      uni[i] = -3.0 + 6.0 * uniform01(gen);
    }
    measures.push_back(WeightedEmpiricalMeasure::from_samples(gauss));
    measures.push_back(WeightedEmpiricalMeasure::from_samples(uni));
  }
  double worst_excess = -1e300;
  for (const auto& m : measures) {
    const double fm = fortet_mourier(m);
    worst_excess = std::max(worst_excess, fm - std::min(wasserstein1(m), 2.0));
  }
  return {kol == 0.5 && w1_gap <= 1e-6 && worst_excess <= 0.0,
          fmt::format("d_Kol(delta_0)={}, |d_W1 - sqrt(2/pi)|={:.2e}, "
                      "max(d_FM - min(d_W1, 2)) over {} measures = {:.3g}",
                      kol, w1_gap, measures.size(), worst_excess)};
}

// 12. Byte-identical CSV under 1, 4 and 16 threads.
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / fmt::format("ham_acceptance_{}", ::getpid());
  fs::create_directories(root);
  const std::vector<std::vector<std::string>> runs = {
      {"clt", "--reps", "400"},
      {"calibrate", "--reps", "400"},
      {"simulate", "--theta-max", "50"},
      {"asclt", "--theta-max", "200", "--set", "trajectories=3"},
      {"il", "--reps", "20", "--set", "t_grid=4,16,64"},
      {"cov-decay", "--reps", "100"},
      {"lemma1", "--theta-max", "200", "--set", "trajectories=3"},
      {"poincare", "--reps", "40", "--set", "gamma_theta=4,8"},
      {"oracle"}};
  std::size_t files = 0, mismatches = 0;
  for (const auto& args : runs) {
    std::vector<std::string> reference;
    for (const char* threads : {"1", "4", "16"}) {
      const auto out = root / fmt::format("{}_t{}.csv", args[0], threads);
      std::vector<std::string> argv_s = {"hamlab"};
      argv_s.insert(argv_s.end(), args.begin(), args.end());
      argv_s.insert(argv_s.end(), {"--seed", "7", "--threads", threads, "--out", out.string()});
      std::vector<char*> argv;
      for (auto& s : argv_s) argv.push_back(s.data());
      std::ostringstream sink;
      auto* old = std::cout.rdbuf(sink.rdbuf());
      const int rc = ham::run(static_cast<int>(argv.size()), argv.data());
      std::cout.rdbuf(old);
      if (rc != 0) return {false, fmt::format("{} exited with {}", args[0], rc)};
      std::vector<std::string> contents;
      for (const auto& entry : fs::directory_iterator(root)) {
        const auto name = entry.path().filename().string();
        if (name.rfind(fmt::format("{}_t{}.", args[0], threads), 0) == 0 &&
            entry.path().extension() == ".csv") {
          contents.push_back(name.substr(name.find('.')) + "\n" + slurp(entry.path()));
        }
      }
      std::sort(contents.begin(), contents.end());
      if (reference.empty()) {
        reference = contents;
        files += contents.size();
      } else if (contents != reference) {
        ++mismatches;
      }
    }
  }
  fs::remove_all(root);
  return {mismatches == 0 && files > 0,
          fmt::format("{} CSV files over {} subcommands, {} mismatching thread counts", files,
                      runs.size(), mismatches)};
}

}  // namespace

int main() {
  std::optional<PoincareResult> poincare_result;
  auto poincare_cached = [&]() -> const PoincareResult& {
    if (!poincare_result) poincare_result = poincare_run();
    return *poincare_result;
  };
  const std::vector<Criterion> criteria = {
      {1, "solver oracle equivalence", 10.0, solver_equivalence},
      {2, "moment oracle E[u^2]", 60.0, second_moment},
      {3, "variance law", 0.0, variance_law},
      {4, "CLT distance decreases", 0.0, clt_rate},
      {5, "covariance decay slope", 1.0, covariance_decay},
      {6, "almost sure CLT", 0.0, asclt},
      {7, "IL diagnostic", 0.0, il_diagnostic},
      {8, "add-one cost support", 0.0, support_properties},
      {9, "Poincare inequality", 0.0, [&] { return poincare(poincare_cached()); }},
      {10, "gamma decay slopes", 0.0, [&] { return gamma_decay(poincare_cached()); }},
      {11, "metric unit oracles", 0.0, metric_oracles},
      {12, "thread-count determinism", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt::format("{:.2f} s", secs);
    if (c.time_limit_s > 0.0) {
      timing += fmt::format(" (limit {} s)", c.time_limit_s);
      if (secs >= c.time_limit_s) outcome.pass = false;
    }
    if (!outcome.pass) ++failures;
    std::cout << fmt::format("criterion {:2d} {}: {} | {} | {}", c.id,
                             outcome.pass ? "PASS" : "FAIL", c.name, timing, outcome.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures,
                           criteria.size())
            << std::endl;
  return failures == 0 ? 0 : 1;
}
