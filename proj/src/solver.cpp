#include "ham/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ham/errors.hpp"

namespace ham {
namespace {

bool in_backward_cone(const NoiseAtom& earlier, const NoiseAtom& later) {
  return earlier.s < later.s &&
         std::abs(later.y - earlier.y) < later.s - earlier.s;
}

double overlap_length(double lo1, double hi1, double lo2, double hi2) {
  const double lo = std::max(lo1, lo2), hi = std::min(hi1, hi2);
  return hi > lo ? hi - lo : 0.0;
}

// Weight of an atom at (s, y) in F: F = sum 1/2 z u * weight.
double functional_weight(const Functional& f, double t0, double s, double y) {
  const double reach = t0 - s;
  if (reach <= 0.0) return 0.0;
  if (const auto* point = std::get_if<PointValue>(&f)) {
    return std::abs(point->x - y) < reach ? 1.0 : 0.0;
  }
  const double theta = std::get<SpatialIntegral>(f).theta;
  return overlap_length(-theta, theta, y - reach, y + reach);
}

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0.0) {}
  void add(std::size_t pos, double v) {
    for (++pos; pos < tree_.size(); pos += pos & (~pos + 1)) tree_[pos] += v;
  }
  // Sum over positions [0, count).
  double prefix(std::size_t count) const {
    double s = 0.0;
    for (; count > 0; count -= count & (~count + 1)) s += tree_[count];
    return s;
  }

 private:
  std::vector<double> tree_;
};

class DominanceSolver {
 public:
  explicit DominanceSolver(const std::vector<NoiseAtom>& atoms)
      : atoms_(atoms), a_(atoms.size()), b_(atoms.size()),
        acc_(atoms.size(), 0.0), u_(atoms.size(), 1.0) {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      a_[i] = atoms[i].y + atoms[i].s;
      b_[i] = atoms[i].y - atoms[i].s;
    }
  }

  std::vector<double> run() {
    if (!atoms_.empty()) recurse(0, atoms_.size());
    return std::move(u_);
  }

 private:
  static constexpr std::size_t kLeaf = 48;

  void recurse(std::size_t lo, std::size_t hi) {
    if (hi - lo <= kLeaf) {
      for (std::size_t i = lo; i < hi; ++i) {
        for (std::size_t j = lo; j < i; ++j) {
          if (a_[j] < a_[i] && b_[j] > b_[i]) acc_[i] += atoms_[j].z * u_[j];
        }
        u_[i] = 1.0 + 0.5 * acc_[i];
      }
      return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    recurse(lo, mid);
    cross(lo, mid, hi);
    recurse(mid, hi);
  }

  // Adds contributions of solved atoms [lo, mid) to pending atoms [mid, hi).
  void cross(std::size_t lo, std::size_t mid, std::size_t hi) {
    std::vector<std::size_t> left(mid - lo), right(hi - mid);
    std::iota(left.begin(), left.end(), lo);
    std::iota(right.begin(), right.end(), mid);
    auto by_a = [&](std::size_t x, std::size_t y) { return a_[x] < a_[y]; };
    std::sort(left.begin(), left.end(), by_a);
    std::sort(right.begin(), right.end(), by_a);

    std::vector<double> b_desc(mid - lo);
    for (std::size_t k = 0; k < left.size(); ++k) b_desc[k] = b_[left[k]];
    std::sort(b_desc.begin(), b_desc.end(), std::greater<>());
    auto rank = [&](double b) {
      // Number of left atoms with b_j > b.
      return static_cast<std::size_t>(
          std::lower_bound(b_desc.begin(), b_desc.end(), b, std::greater<>()) -
          b_desc.begin());
    };

    Fenwick tree(left.size());
    std::size_t next = 0;
    for (std::size_t i : right) {
      while (next < left.size() && a_[left[next]] < a_[i]) {
        const std::size_t j = left[next++];
        tree.add(rank(b_[j]), atoms_[j].z * u_[j]);
      }
      acc_[i] += tree.prefix(rank(b_[i]));
    }
  }

  const std::vector<NoiseAtom>& atoms_;
  std::vector<double> a_, b_, acc_, u_;
};

struct ConePropagation {
  double source_value = 1.0;          // u(r-, y) at the new atom
  std::vector<std::size_t> forward;   // atoms inside its forward cone
  std::vector<double> increments;     // u_i' - u_i for those atoms
};

ConePropagation propagate(const SolutionAtoms& solution, const NoiseAtom& xi) {
  const auto& atoms = solution.config.atoms;
  ConePropagation out;
  double acc = 0.0;
  std::size_t i = 0;
  for (; i < atoms.size() && atoms[i].s < xi.s; ++i) {
    if (in_backward_cone(atoms[i], xi)) acc += atoms[i].z * solution.values[i];
  }
  out.source_value = 1.0 + 0.5 * acc;
  const double kick = 0.5 * xi.z * out.source_value;
  for (; i < atoms.size(); ++i) {
    if (!in_backward_cone(xi, atoms[i])) continue;
    double delta = 0.0;
    for (std::size_t k = 0; k < out.forward.size(); ++k) {
      const std::size_t j = out.forward[k];
      if (in_backward_cone(atoms[j], atoms[i])) {
        delta += atoms[j].z * out.increments[k];
      }
    }
    out.forward.push_back(i);
    out.increments.push_back(kick + 0.5 * delta);
  }
  return out;
}

void check_probe(const NoiseAtom& xi) {
  if (!(xi.s >= 0.0) || !std::isfinite(xi.y) || !std::isfinite(xi.z)) {
    throw DomainError("add_one_cost: probe atom must have s >= 0 and finite y, z");
  }
}

}  // namespace

PiecewiseField::PiecewiseField(std::vector<double> breaks,
                               std::vector<double> values,
                               SpaceTimeWindow window)
    : breaks_(std::move(breaks)), values_(std::move(values)), window_(window) {
  if (values_.size() != breaks_.size() + 1) {
    throw DomainError("PiecewiseField: need one more value than breakpoints");
  }
  prefix_.assign(breaks_.size(), 0.0);
  for (std::size_t k = 1; k < breaks_.size(); ++k) {
    prefix_[k] =
        prefix_[k - 1] + (values_[k] - 1.0) * (breaks_[k] - breaks_[k - 1]);
  }
}

double PiecewiseField::at(double x) const {
  const auto k = std::upper_bound(breaks_.begin(), breaks_.end(), x) -
                 breaks_.begin();
  return values_[static_cast<std::size_t>(k)];
}

double PiecewiseField::cumulative(double x) const {
  const auto k = static_cast<std::size_t>(
      std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
  if (k == 0) return 0.0;
  return prefix_[k - 1] + (x - breaks_[k - 1]) * (values_[k] - 1.0);
}

double PiecewiseField::excess_integral(double lo, double hi) const {
  return cumulative(hi) - cumulative(lo);
}

SolutionAtoms solve_naive(const PointConfiguration& config) {
  SolutionAtoms out{config, std::vector<double>(config.size(), 1.0)};
  const auto& atoms = config.atoms;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      if (in_backward_cone(atoms[j], atoms[i])) acc += atoms[j].z * out.values[j];
    }
    out.values[i] = 1.0 + 0.5 * acc;
  }
  return out;
}

SolutionAtoms solve_fast(const PointConfiguration& config) {
  SolutionAtoms out{config, {}};
  out.values = DominanceSolver(config.atoms).run();
  return out;
}

PiecewiseField evaluate_field(const SolutionAtoms& solution) {
  const double t0 = solution.t0();
  struct Event {
    double x;
    double delta;
  };
  std::vector<Event> events;
  events.reserve(2 * solution.size());
  for (std::size_t i = 0; i < solution.size(); ++i) {
    const auto& atom = solution.config.atoms[i];
    const double reach = t0 - atom.s;
    if (reach <= 0.0) continue;
    const double c = 0.5 * atom.z * solution.values[i];
    events.push_back({atom.y - reach, c});
    events.push_back({atom.y + reach, -c});
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& l, const Event& r) { return l.x < r.x; });

  std::vector<double> breaks(events.size());
  std::vector<double> values(events.size() + 1, 1.0);
  // Neumaier-compensated running sum of the active cone coefficients.
  double sum = 0.0, comp = 0.0;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const double v = events[k].delta;
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
    breaks[k] = events[k].x;
    values[k + 1] = 1.0 + (sum + comp);
  }
  values.back() = 1.0;
  return PiecewiseField(std::move(breaks), std::move(values),
                        solution.config.window);
}

double field_value_direct(const SolutionAtoms& solution, double x) {
  return evaluate_functional(solution, PointValue{x});
}

double evaluate_functional(const SolutionAtoms& solution, const Functional& f) {
  const double t0 = solution.t0();
  double acc = 0.0;
  for (std::size_t i = 0; i < solution.size(); ++i) {
    const auto& atom = solution.config.atoms[i];
    const double w = functional_weight(f, t0, atom.s, atom.y);
    if (w != 0.0) acc += atom.z * solution.values[i] * w;
  }
  if (std::holds_alternative<PointValue>(f)) return 1.0 + 0.5 * acc;
  return 0.5 * acc;
}

double add_one_cost(const SolutionAtoms& solution, const NoiseAtom& xi,
                    const Functional& f) {
  check_probe(xi);
  const double t0 = solution.t0();
  if (xi.s >= t0) return 0.0;
  const auto prop = propagate(solution, xi);
  double acc = xi.z * prop.source_value * functional_weight(f, t0, xi.s, xi.y);
  for (std::size_t k = 0; k < prop.forward.size(); ++k) {
    const auto& atom = solution.config.atoms[prop.forward[k]];
    const double w = functional_weight(f, t0, atom.s, atom.y);
    if (w != 0.0) acc += atom.z * prop.increments[k] * w;
  }
  return 0.5 * acc;
}

double add_one_cost(const PointConfiguration& config, const NoiseAtom& xi,
                    const Functional& f) {
  return add_one_cost(solve_fast(config), xi, f);
}

SolutionAtoms with_added_atom(const SolutionAtoms& solution,
                              const NoiseAtom& xi) {
  check_probe(xi);
  const auto prop = propagate(solution, xi);
  SolutionAtoms out = solution;
  for (std::size_t k = 0; k < prop.forward.size(); ++k) {
    out.values[prop.forward[k]] += prop.increments[k];
  }
  const std::size_t index = insert_atom(out.config, xi);
  out.values.insert(out.values.begin() + static_cast<std::ptrdiff_t>(index),
                    prop.source_value);
  return out;
}

double second_add_one_cost(const SolutionAtoms& solution, const NoiseAtom& xi1,
                           const NoiseAtom& xi2, const Functional& f) {
  const bool ordered = xi1.s <= xi2.s;
  const NoiseAtom& first = ordered ? xi1 : xi2;
  const NoiseAtom& second = ordered ? xi2 : xi1;
  const SolutionAtoms extended = with_added_atom(solution, first);
  return add_one_cost(extended, second, f) - add_one_cost(solution, second, f);
}

double second_add_one_cost(const PointConfiguration& config,
                           const NoiseAtom& xi1, const NoiseAtom& xi2,
                           const Functional& f) {
  return second_add_one_cost(solve_fast(config), xi1, xi2, f);
}

}  // namespace ham
