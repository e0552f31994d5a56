#pragma once

// Counter-based random streams (Philox4x32-10, Salmon et al. SC'11).
//
// Every stream is addressed by (global seed, replication index, purpose
// tag). Nothing depends on the order in which streams are created, so the
// replication loop can be scheduled on any number of threads.

#include <array>
#include <cstdint>
#include <limits>

namespace ham {

enum class StreamPurpose : std::uint32_t {
  kNoise = 1,        ///< Poisson random measure atoms
  kProbe = 2,        ///< importance samples xi for add-one-cost estimates
  kCalibration = 3,  ///< Gaussian reference draws
  kIidSums = 4,      ///< classical i.i.d. sanity sequences
  kTest = 99,
};

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  StreamPurpose purpose = StreamPurpose::kNoise;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Philox4x32 with 10 rounds, usable as a UniformRandomBitGenerator.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;

  explicit Philox4x32(const StreamKey& key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Raw block function; exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> buffer_{};
  unsigned index_ = 4;
};

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Philox4x32& gen);

/// Uniform double in (0, 1); never returns 0.
double uniform01_open(Philox4x32& gen);

}  // namespace ham
