#pragma once

#include <cstdint>
#include <string_view>

namespace mssl {

/// Counter-based generator: output i of a stream is splitmix64_mix(key + (i+1)*gamma),
/// which is exactly the SplitMix64 sequence seeded with `key`. A stream is fully
/// described by (key, counter), so it can be checkpointed, split by name, and
/// replayed by any language that implements the 64-bit finalizer below.
///
/// Derived distributions:
///   uniform()  = (next() >> 11) * 2^-53                       in [0, 1)
///   normal()   = Box-Muller on two uniforms, cosine branch only (no caching)
///   below(n)   = Lemire multiply-shift with rejection
class Rng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit Rng(std::uint64_t seed = 0) : key_(seed) {}
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  static std::uint64_t mix(std::uint64_t z);

  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::uint64_t below(std::uint64_t n);

  /// Independent child stream keyed by this stream's key and a tag. Does not
  /// advance the parent.
  Rng split(std::string_view tag) const;
  Rng split(std::uint64_t tag) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace mssl
