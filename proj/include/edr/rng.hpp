#pragma once

#include <cstdint>
#include <limits>

namespace edr {

/// Counter-based generator: output k is splitmix64(key + k * golden_gamma),
/// with key derived from (seed, stream). Integer and real draws are defined
/// here rather than through <random> distributions so sequences are identical
/// across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent seed for a sub-computation (seed, stream) -> seed'.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  std::uint64_t operator()() { return next(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return std::numeric_limits<std::uint64_t>::max(); }

  /// Unbiased integer in [0, bound); bound must be positive.
  std::uint64_t uniform(std::uint64_t bound);
  /// Real in [0, 1) with 53 random bits.
  double uniform01();
  bool bernoulli(double p);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace edr
