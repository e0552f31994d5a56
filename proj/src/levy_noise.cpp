#include "ham/levy_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/random/poisson_distribution.hpp>
#include <fmt/format.h>

#include "ham/errors.hpp"

namespace ham {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError(fmt::format("alpha must lie in (0, 1], got {}", alpha));
  }
}

void check_mass(double total_mass) {
  if (!(total_mass >= 0.0) || !std::isfinite(total_mass)) {
    throw DomainError(
        fmt::format("total mass must be finite and >= 0, got {}", total_mass));
  }
}

}  // namespace

LevyModel LevyModel::two_point(double a, double total_mass, double alpha) {
  check_alpha(alpha);
  check_mass(total_mass);
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError(fmt::format("two_point: a must be > 0, got {}", a));
  }
  LevyModel m;
  m.kind_ = LevyKind::kTwoPoint;
  m.scale_ = a;
  m.total_mass_ = total_mass;
  m.alpha_ = alpha;
  return m;
}

LevyModel LevyModel::uniform(double a, double total_mass, double alpha) {
  check_alpha(alpha);
  check_mass(total_mass);
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError(fmt::format("uniform: a must be > 0, got {}", a));
  }
  LevyModel m;
  m.kind_ = LevyKind::kUniform;
  m.scale_ = a;
  m.total_mass_ = total_mass;
  m.alpha_ = alpha;
  return m;
}

LevyModel LevyModel::atoms(std::vector<JumpAtom> atoms, double alpha) {
  check_alpha(alpha);
  if (atoms.empty()) throw DomainError("atoms: at least one atom is required");
  LevyModel m;
  m.kind_ = LevyKind::kAtoms;
  m.alpha_ = alpha;
  double total = 0.0;
  for (const auto& atom : atoms) {
    if (atom.size == 0.0 || !std::isfinite(atom.size)) {
      throw DomainError("atoms: jump sizes must be finite and nonzero");
    }
    if (!(atom.mass > 0.0) || !std::isfinite(atom.mass)) {
      throw DomainError("atoms: masses must be finite and > 0");
    }
    total += atom.mass;
    m.cumulative_.push_back(total);
  }
  m.total_mass_ = total;
  m.atoms_ = std::move(atoms);
  return m;
}

double LevyModel::moment(double p) const {
  if (!(p >= 1.0)) throw DomainError(fmt::format("moment order p={} < 1", p));
  double value = 0.0;
  switch (kind_) {
    case LevyKind::kTwoPoint:
      value = total_mass_ * std::pow(scale_, p);
      break;
    case LevyKind::kUniform:
      value = total_mass_ * std::pow(scale_, p) / (p + 1.0);
      break;
    case LevyKind::kAtoms:
      for (const auto& atom : atoms_) {
        value += std::pow(std::abs(atom.size), p) * atom.mass;
      }
      break;
  }
  if (!std::isfinite(value)) {
    throw DomainError(fmt::format("moment m_{} is not finite", p));
  }
  return value;
}

double LevyModel::drift() const {
  if (kind_ != LevyKind::kAtoms) return 0.0;
  double sum = 0.0;
  for (const auto& atom : atoms_) sum += atom.size * atom.mass;
  return sum;
}

void LevyModel::validate() const {
  const double d = drift();
  // Rounding slack relative to the first absolute moment.
  const double tolerance = 1e-12 * std::max(moment(1.0), 1e-300);
  if (std::abs(d) > tolerance) {
    throw ModelRejected(fmt::format(
        "Levy measure is not centered: drift int z nu(dz) = {} != 0; the exact "
        "solver supports centered measures only",
        d));
  }
  (void)moment(2.0);
  (void)moment(1.0 + alpha_);
  (void)moment(2.0 + 2.0 * alpha_);
}

double LevyModel::sample_jump(Philox4x32& gen) const {
  switch (kind_) {
    case LevyKind::kTwoPoint:
      return (gen() & 1U) ? scale_ : -scale_;
    case LevyKind::kUniform: {
      // (0,1) keeps the jump away from zero.
      return scale_ * (2.0 * uniform01_open(gen) - 1.0);
    }
    case LevyKind::kAtoms: {
      const double target = uniform01(gen) * total_mass_;
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
      if (it == cumulative_.end()) --it;
      return atoms_[static_cast<std::size_t>(it - cumulative_.begin())].size;
    }
  }
  return 0.0;
}

std::string LevyModel::describe() const {
  switch (kind_) {
    case LevyKind::kTwoPoint:
      return fmt::format("two_point:a={},lambda={},alpha={}", scale_,
                         total_mass_, alpha_);
    case LevyKind::kUniform:
      return fmt::format("uniform:a={},lambda={},alpha={}", scale_,
                         total_mass_, alpha_);
    case LevyKind::kAtoms: {
      std::string out = "atoms:";
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (i) out += ',';
        out += fmt::format("{}@{}", atoms_[i].size, atoms_[i].mass);
      }
      out += fmt::format(",alpha={}", alpha_);
      return out;
    }
  }
  return {};
}

double moment(const LevyModel& model, double p) { return model.moment(p); }
double drift(const LevyModel& model) { return model.drift(); }

SpaceTimeWindow SpaceTimeWindow::for_half_width(double t0, double theta) {
  return SpaceTimeWindow{t0, -theta - t0, theta + t0};
}

PointConfiguration sample_prm(const LevyModel& model,
                              const SpaceTimeWindow& window,
                              const StreamKey& key) {
  model.validate();
  if (!(window.t0 > 0.0) || !(window.x_max >= window.x_min)) {
    throw DomainError("sample_prm: invalid window");
  }
  PointConfiguration config;
  config.window = window;
  config.key = key;

  const double mean_count = model.total_mass() * window.area();
  if (!(mean_count > 0.0)) return config;

  Philox4x32 gen(key);
  boost::random::poisson_distribution<long, double> count_dist(mean_count);
  const long count = count_dist(gen);
  config.atoms.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    NoiseAtom atom;
    atom.s = window.t0 * uniform01(gen);
    atom.y = window.x_min + window.width() * uniform01(gen);
    atom.z = model.sample_jump(gen);
    config.atoms.push_back(atom);
  }
  std::stable_sort(
      config.atoms.begin(), config.atoms.end(),
      [](const NoiseAtom& a, const NoiseAtom& b) { return a.s < b.s; });
  return config;
}

std::size_t insert_atom(PointConfiguration& config, const NoiseAtom& atom) {
  auto it = std::upper_bound(
      config.atoms.begin(), config.atoms.end(), atom.s,
      [](double s, const NoiseAtom& a) { return s < a.s; });
  const auto index = static_cast<std::size_t>(it - config.atoms.begin());
  config.atoms.insert(it, atom);
  return index;
}

}  // namespace ham
