#pragma once

// Deterministic, portable randomness. Every stochastic routine in the library
// draws from an RngStream derived from a master seed plus a token chain, so a
// given (seed, tokens) pair produces the same bytes on any platform and under
// any thread count. Nothing here uses std:: distributions (their sequences
// are implementation-defined).
//
// Fixed algorithms, not configurable:
//   generator        xoshiro256** (Blackman/Vigna), state seeded by four
//                    successive splitmix64 outputs
//   token combiner   h' = splitmix64_mix(h ^ (token + 0x9E3779B97F4A7C15))
//                    where string tokens are first reduced by FNV-1a (64-bit)
//   uniform double   (next() >> 11) * 2^-53, in [0, 1)
//   bounded integer  next() % bound (bias < 2^-53 for desk-scale bounds)
//   shuffle          Fisher-Yates, descending index, bounded draws as above

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mpsqd/errors.hpp"

namespace mpsqd {

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += kGolden;
  return splitmix64_mix(state);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64_next(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53 significant bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound).
  std::uint64_t uniform_int(std::uint64_t bound) {
    if (bound == 0) throw InputError("uniform_int: bound must be positive");
    return next_u64() % bound;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> state_{};
};

// Token chain over a master seed. Value semantics: with() returns a new key,
// so sibling streams derived from a common prefix never interact.
class StreamKey {
 public:
  explicit StreamKey(std::uint64_t master_seed)
      : h_(detail::splitmix64_mix(master_seed ^ detail::kGolden)) {}

  [[nodiscard]] StreamKey with(std::uint64_t token) const {
    StreamKey next = *this;
    next.h_ = detail::splitmix64_mix(h_ ^ (token + detail::kGolden));
    return next;
  }

  [[nodiscard]] StreamKey with(std::string_view token) const {
    return with(detail::fnv1a64(token));
  }

  [[nodiscard]] StreamKey with(int token) const {
    return with(static_cast<std::uint64_t>(token));
  }

  [[nodiscard]] std::uint64_t value() const { return h_; }

  [[nodiscard]] RngStream stream() const { return RngStream(h_); }

 private:
  std::uint64_t h_;
};

// Draws an index from a nonnegative weight table. Walks the cumulative sum
// of the weights in index order, so the result is reproducible bit-for-bit.
inline std::size_t pick_weighted(const std::vector<double>& weights,
                                 RngStream& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InputError("pick_weighted: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw InputError("pick_weighted: zero total weight");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;  // u landed on the rounding tail
}

}  // namespace mpsqd
