#pragma once

#include <cstdint>
#include <string_view>

namespace ter {

/// Counter-based splittable random generator (splitmix64 core).
/// All outputs are derived from 64-bit integer arithmetic only, so the
/// same seed produces the same sequence on every platform. Copying the
/// generator copies the stream position; `split` derives an independent
/// child stream without advancing the parent.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), from the top 53 bits.
  double next_unit();

  /// Uniform float in [lo, hi].
  float next_uniform(float lo, float hi);

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n);

  /// Child stream keyed by a tag (and optional index), independent of
  /// draws made on this generator after the split point.
  SeededRng split(std::string_view tag, std::uint64_t index = 0) const;

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace ter
