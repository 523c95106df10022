#pragma once

#include <cstdint>

namespace podnolab {

// Purpose tags keep independent random streams apart even when they share a
// seed and sample index.
enum class RngPurpose : std::uint64_t {
  DarcyField = 1,
  NlsPackets = 2,
  KpShape = 3,
  Epsilon = 4,
  EpsilonPick = 5,
  Shuffle = 6,
  Init = 7,
  Test = 8,
};

std::uint64_t mix64(std::uint64_t x);

// Counter-based generator: draw number c of stream (seed, index, purpose) is a
// pure function of those four values, so samples can be produced in any order
// or in parallel with identical results.
class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, std::uint64_t index, RngPurpose purpose);

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() { return bits_at(key_, counter_++); }
  // Uniform on the open interval (0, 1).
  double uniform() { return uniform_at(key_, counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

  static std::uint64_t bits_at(std::uint64_t key, std::uint64_t counter);
  static double uniform_at(std::uint64_t key, std::uint64_t counter);
  // Standard normal from draws (2c, 2c+1) via Box-Muller.
  static double normal_at(std::uint64_t key, std::uint64_t counter);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace podnolab
