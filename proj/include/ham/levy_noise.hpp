#pragma once

// Finite-activity Levy measures and Poisson random measures on space-time
// windows [0, t0) x [x_min, x_max].

#include <string>
#include <vector>

#include "ham/rng.hpp"

namespace ham {

enum class LevyKind { kTwoPoint, kUniform, kAtoms };

struct JumpAtom {
  double size = 0.0;  ///< jump size z, nonzero
  double mass = 0.0;  ///< nu({z}) > 0
};

/// A finite Levy measure nu on R \ {0} together with the regularity
/// parameter alpha in (0, 1].
///
/// Parametric families: two-point mass lambda/2 at +a and -a; uniform with
/// density lambda / (2a) on [-a, a]. Explicit atoms may be noncentered; such
/// a model can be built and inspected but `validate()` rejects it.
class LevyModel {
 public:
  static LevyModel two_point(double a, double total_mass, double alpha = 1.0);
  static LevyModel uniform(double a, double total_mass, double alpha = 1.0);
  static LevyModel atoms(std::vector<JumpAtom> atoms, double alpha = 1.0);

  LevyKind kind() const { return kind_; }
  double total_mass() const { return total_mass_; }
  double alpha() const { return alpha_; }
  double scale() const { return scale_; }
  const std::vector<JumpAtom>& atom_list() const { return atoms_; }

  /// m_p = int |z|^p nu(dz), p >= 1.
  double moment(double p) const;
  /// int z nu(dz).
  double drift() const;

  /// Throws ModelRejected for a noncentered measure and DomainError when the
  /// moments required downstream (m_2, m_{1+alpha}, m_{2+2alpha}) are not
  /// finite.
  void validate() const;

  /// One jump size drawn from nu / lambda. Requires total_mass() > 0.
  double sample_jump(Philox4x32& gen) const;

  /// Compact textual form, e.g. "two_point:a=1,lambda=5,alpha=1".
  std::string describe() const;

 private:
  LevyModel() = default;

  LevyKind kind_ = LevyKind::kTwoPoint;
  double scale_ = 0.0;
  double total_mass_ = 0.0;
  double alpha_ = 1.0;
  std::vector<JumpAtom> atoms_;
  std::vector<double> cumulative_;  // for kAtoms sampling
};

double moment(const LevyModel& model, double p);
double drift(const LevyModel& model);

/// [0, t0) x [x_min, x_max].
struct SpaceTimeWindow {
  double t0 = 1.0;
  double x_min = 0.0;
  double x_max = 0.0;

  double width() const { return x_max - x_min; }
  double area() const { return t0 * width(); }

  /// True when the backward light cone of {t0} x [a, b] lies inside.
  bool covers(double a, double b) const {
    return x_min <= a - t0 && x_max >= b + t0;
  }

  /// Smallest window whose backward cone contains {t0} x [-theta, theta].
  static SpaceTimeWindow for_half_width(double t0, double theta);
};

struct NoiseAtom {
  double s = 0.0;  ///< time in [0, t0)
  double y = 0.0;  ///< position
  double z = 0.0;  ///< jump size

  friend bool operator==(const NoiseAtom&, const NoiseAtom&) = default;
};

/// Atoms of a Poisson random measure, sorted by time. Equal times keep
/// generation order.
struct PointConfiguration {
  std::vector<NoiseAtom> atoms;
  SpaceTimeWindow window;
  StreamKey key;

  std::size_t size() const { return atoms.size(); }
  bool empty() const { return atoms.empty(); }
};

/// Samples N restricted to the window. The atom count is
/// Poisson(lambda * t0 * width); positions are uniform; sizes follow
/// nu / lambda. Identical keys give bit-identical configurations.
PointConfiguration sample_prm(const LevyModel& model,
                              const SpaceTimeWindow& window,
                              const StreamKey& key);

/// Inserts an atom keeping time order (after existing atoms of equal time).
/// Returns the insertion index.
std::size_t insert_atom(PointConfiguration& config, const NoiseAtom& atom);

}  // namespace ham
