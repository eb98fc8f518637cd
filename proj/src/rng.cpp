#include "gsest/rng.hpp"

#include "gsest/numerics.hpp"

namespace gsest {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

ReplicateRng::ReplicateRng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t sm = seed ^ (0xD1B54A32D192ED03ull * (stream + 1));
  s0_ = splitmix64(sm);
  s1_ = splitmix64(sm);
  if (s0_ == 0 && s1_ == 0) {
    s1_ = 0x9E3779B97F4A7C15ull;  // the all-zero state is absorbing
  }
}

std::uint64_t ReplicateRng::next_u64() {
  const std::uint64_t t0 = s0_;
  std::uint64_t t1 = s1_;
  const std::uint64_t result = rotl(t0 + t1, 17) + t0;
  t1 ^= t0;
  s0_ = rotl(t0, 49) ^ t1 ^ (t1 << 21);
  s1_ = rotl(t1, 28);
  return result;
}

double ReplicateRng::uniform01() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double ReplicateRng::normal() {
  return numerics::std_normal_quantile(uniform01());
}

}  // namespace gsest
