#include "podnolab/rng.hpp"

#include <cmath>
#include <numbers>

namespace podnolab {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

KeyedRng::KeyedRng(std::uint64_t seed, std::uint64_t index, RngPurpose purpose)
    : key_(mix64(seed ^ mix64(index ^ mix64(static_cast<std::uint64_t>(purpose) * 0xd1b54a32d192ed03ULL)))) {}

std::uint64_t KeyedRng::bits_at(std::uint64_t key, std::uint64_t counter) {
  return mix64(key ^ mix64(counter * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

double KeyedRng::uniform_at(std::uint64_t key, std::uint64_t counter) {
  // 53 random bits, shifted by half an ulp so 0 is never produced.
  return (static_cast<double>(bits_at(key, counter) >> 11) + 0.5) * 0x1.0p-53;
}

double KeyedRng::normal_at(std::uint64_t key, std::uint64_t counter) {
  // Separate key so normals never reuse the uniform draws of the same stream.
  const std::uint64_t nkey = mix64(key ^ 0x5851f42d4c957f2dULL);
  const double u1 = uniform_at(nkey, 2 * counter);
  const double u2 = uniform_at(nkey, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double KeyedRng::normal() {
  const double z = normal_at(key_, counter_);
  ++counter_;
  return z;
}

}  // namespace podnolab
