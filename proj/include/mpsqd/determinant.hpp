#pragma once

// Slater determinants as per-spin occupation bitmasks.
//
// Bit conventions used across the whole library:
//   - spin orbitals are ordered alpha_0 < alpha_1 < ... < beta_0 < beta_1 < ...
//   - logical bit k (k < M) is alpha orbital k; logical bit M+k is beta orbital k
//   - a measurement string of length 2M renders logical bit 2M-1 leftmost,
//     so the low (alpha) half of the word is the RIGHT half of the text

#include <bit>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mpsqd/errors.hpp"
#include "mpsqd/fcidump.hpp"
#include "mpsqd/rng.hpp"

namespace mpsqd {

struct Determinant {
  std::uint64_t alpha = 0;
  std::uint64_t beta = 0;

  friend bool operator==(const Determinant&, const Determinant&) = default;
  friend auto operator<=>(const Determinant&, const Determinant&) = default;
};

inline std::uint64_t sector_mask(int norb) {
  return norb == 64 ? ~0ULL : (1ULL << norb) - 1;
}

inline void check_determinant(const Determinant& d, int norb) {
  if (norb < 1 || norb > kMaxOrbitals) throw InputError("norb out of range");
  const std::uint64_t mask = sector_mask(norb);
  if ((d.alpha & ~mask) || (d.beta & ~mask))
    throw InputError("determinant has bits beyond norb");
}

inline std::vector<int> occupied_orbitals(std::uint64_t mask) {
  std::vector<int> occ;
  occ.reserve(static_cast<std::size_t>(std::popcount(mask)));
  while (mask) {
    occ.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return occ;
}

inline std::string encode_determinant(const Determinant& d, int norb) {
  check_determinant(d, norb);
  std::string s(static_cast<std::size_t>(2 * norb), '0');
  for (int k = 0; k < 2 * norb; ++k) {
    const bool set = k < norb ? (d.alpha >> k) & 1 : (d.beta >> (k - norb)) & 1;
    if (set) s[static_cast<std::size_t>(2 * norb - 1 - k)] = '1';
  }
  return s;
}

inline Determinant decode_bitstring(const std::string& bits, int norb) {
  if (norb < 1 || norb > kMaxOrbitals) throw InputError("norb out of range");
  if (bits.size() != static_cast<std::size_t>(2 * norb))
    throw InputError("bitstring length " + std::to_string(bits.size()) +
                     " does not match 2*norb = " + std::to_string(2 * norb));
  Determinant d;
  for (int k = 0; k < 2 * norb; ++k) {
    const char c = bits[static_cast<std::size_t>(2 * norb - 1 - k)];
    if (c != '0' && c != '1') throw InputError("bitstring has non-binary character");
    if (c == '1') {
      if (k < norb)
        d.alpha |= 1ULL << k;
      else
        d.beta |= 1ULL << (k - norb);
    }
  }
  return d;
}

// (alpha weight, beta weight) of a 2M-character measurement string.
inline std::pair<int, int> hamming_weights(const std::string& bits, int norb) {
  const Determinant d = decode_bitstring(bits, norb);
  return {std::popcount(d.alpha), std::popcount(d.beta)};
}

// Aufbau filling: the lowest n_alpha / n_beta orbitals occupied.
inline Determinant hartree_fock_det(int norb, int n_alpha, int n_beta) {
  if (norb < 1 || norb > kMaxOrbitals) throw InputError("norb out of range");
  if (n_alpha < 0 || n_alpha > norb || n_beta < 0 || n_beta > norb)
    throw InputError("electron counts must lie in [0, norb]");
  Determinant d;
  d.alpha = n_alpha == 0 ? 0 : sector_mask(n_alpha);
  d.beta = n_beta == 0 ? 0 : sector_mask(n_beta);
  return d;
}

// All spin-conserving single excitations of d; d itself is excluded. Order is
// deterministic: alpha sector first, occupied orbital ascending, target
// orbital ascending.
inline std::vector<Determinant> single_excitations(const Determinant& d, int norb) {
  check_determinant(d, norb);
  std::vector<Determinant> out;
  const std::uint64_t full = sector_mask(norb);
  for (int spin = 0; spin < 2; ++spin) {
    const std::uint64_t occ_mask = spin == 0 ? d.alpha : d.beta;
    for (int p : occupied_orbitals(occ_mask)) {
      for (int a : occupied_orbitals(full & ~occ_mask)) {
        Determinant e = d;
        std::uint64_t& m = spin == 0 ? e.alpha : e.beta;
        m = (m & ~(1ULL << p)) | (1ULL << a);
        out.push_back(e);
      }
    }
  }
  return out;
}

// All determinants of the (n_alpha, n_beta) sector, alpha mask as the major
// key and beta as the minor key, both in ascending numeric order.
inline std::vector<Determinant> sector_basis(int norb, int n_alpha, int n_beta) {
  if (norb < 1 || norb > kMaxOrbitals) throw InputError("norb out of range");
  if (n_alpha < 0 || n_alpha > norb || n_beta < 0 || n_beta > norb)
    throw InputError("electron counts must lie in [0, norb]");
  auto masks = [norb](int count) {
    std::vector<std::uint64_t> out;
    if (count == 0) {
      out.push_back(0);
      return out;
    }
    std::uint64_t v = sector_mask(count);
    const std::uint64_t limit = sector_mask(norb);
    while (v <= limit) {
      out.push_back(v);
      if (v == 0) break;
      // Gosper's hack: next mask with the same popcount.
      const std::uint64_t c = v & (~v + 1);
      const std::uint64_t r = v + c;
      if (r > limit || r < v) break;
      v = (((r ^ v) >> 2) / c) | r;
    }
    return out;
  };
  std::vector<Determinant> basis;
  const auto alphas = masks(n_alpha);
  const auto betas = masks(n_beta);
  basis.reserve(alphas.size() * betas.size());
  for (auto a : alphas)
    for (auto b : betas) basis.push_back({a, b});
  return basis;
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

}  // namespace mpsqd

template <>
struct std::hash<mpsqd::Determinant> {
  std::size_t operator()(const mpsqd::Determinant& d) const noexcept {
    const std::uint64_t a = mpsqd::detail::splitmix64_mix(d.alpha ^ 0x2545F4914F6CDD1DULL);
    return static_cast<std::size_t>(mpsqd::detail::splitmix64_mix(a ^ d.beta));
  }
};
