// Reproducible random streams.
//
// A stream is identified by (master seed, stream index). Replication r of an
// experiment always draws from stream r, so results do not depend on how
// replications are scheduled across worker threads.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tandem {

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1); 53 random bits.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential with the given rate, by inversion.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser; used to derive stream seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace tandem
