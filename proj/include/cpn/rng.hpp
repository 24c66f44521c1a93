#pragma once

#include <cstdint>
#include <span>

namespace cpn {

// Counter-based generator. Output i of a stream with key k is
//   splitmix64_mix(k + (i + 1) * 0x9E3779B97F4A7C15)
// which is the SplitMix64 sequence seeded with k. Streams are keyed, so
// fork(stream_id) yields an independent child without touching the parent.
// Only integer arithmetic is involved; the stream is identical on every platform.
// std::*_distribution is deliberately not used anywhere: its output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);
  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  Rng fork(std::uint64_t stream_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  Rng(std::uint64_t seed, std::uint64_t key);

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

}  // namespace cpn
