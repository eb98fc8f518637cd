#pragma once

#include <cstdint>

namespace gsest {

// Deterministic per-replicate random stream: xoroshiro128++ seeded from
// (seed, stream) through the splitmix64 finaliser, so any replicate's
// stream is reproducible in isolation and results do not depend on how
// replicates are distributed over worker threads. Normal variates come
// from the inverse cdf.
class ReplicateRng {
 public:
  ReplicateRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform01();

  // Standard normal draw via std_normal_quantile(uniform01()).
  double normal();

 private:
  std::uint64_t s0_;
  std::uint64_t s1_;
};

inline constexpr const char* kGeneratorName =
    "xoroshiro128++ (splitmix64-seeded per replicate), inverse-cdf normals";

}  // namespace gsest
