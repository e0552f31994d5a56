#include "ham/rng.hpp"

namespace ham {
namespace {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM4x32A) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM4x32B) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW32A;
    key[1] += kPhiloxW32B;
  }
  return ctr;
}

Philox4x32::Philox4x32(const StreamKey& key) {
  // The seed is whitened so that nearby user seeds give unrelated keys; the
  // replication index and purpose live in the counter's upper words.
  const std::uint64_t k = splitmix64(key.seed);
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  const std::uint64_t rep = splitmix64(key.replication ^ 0x5DEECE66DULL);
  counter_ = {0, static_cast<std::uint32_t>(key.purpose),
              static_cast<std::uint32_t>(rep),
              static_cast<std::uint32_t>(rep >> 32)};
}

void Philox4x32::refill() {
  buffer_ = block(counter_, key_);
  // counter_[0] is the block index; 2^32 blocks (2^34 words) per stream.
  ++counter_[0];
  index_ = 0;
}

Philox4x32::result_type Philox4x32::operator()() {
  if (index_ >= 4) refill();
  return buffer_[index_++];
}

double uniform01(Philox4x32& gen) {
  const std::uint64_t hi = gen();
  const std::uint64_t lo = gen();
  const std::uint64_t bits = ((hi << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

double uniform01_open(Philox4x32& gen) {
  const std::uint64_t hi = gen();
  const std::uint64_t lo = gen();
  const std::uint64_t bits = ((hi << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

}  // namespace ham
