#pragma once

// Shared test oracles, written independently of the library internals they
// check. The Fock-space oracle applies second-quantized operators literally,
// one creation/annihilation at a time, and never touches the Slater-Condon
// shortcut rules.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mpsqd/determinant.hpp"
#include "mpsqd/fcidump.hpp"
#include "mpsqd/rng.hpp"

namespace oracle {

// Occupation-number state over 2M spin orbitals: bit k < M is alpha orbital
// k, bit M+k is beta orbital k. Same convention as the library.
struct OpResult {
  std::uint64_t state;
  int sign;
};

inline std::optional<OpResult> annihilate(std::uint64_t state, int spin_orbital) {
  if (!((state >> spin_orbital) & 1)) return std::nullopt;
  const std::uint64_t below = spin_orbital == 0 ? 0 : state & ((1ULL << spin_orbital) - 1);
  return OpResult{state & ~(1ULL << spin_orbital), std::popcount(below) % 2 ? -1 : 1};
}

inline std::optional<OpResult> create(std::uint64_t state, int spin_orbital) {
  if ((state >> spin_orbital) & 1) return std::nullopt;
  const std::uint64_t below = spin_orbital == 0 ? 0 : state & ((1ULL << spin_orbital) - 1);
  return OpResult{state | (1ULL << spin_orbital), std::popcount(below) % 2 ? -1 : 1};
}

// Dense Fock-space Hamiltonian, dimension 2^(2M). Row y, column x holds
// <y|H|x>.
inline std::vector<std::vector<double>> fock_hamiltonian(const mpsqd::FermionHamiltonian& ham) {
  const int m = ham.norb();
  const std::size_t dim = 1ULL << (2 * m);
  std::vector<std::vector<double>> h(dim, std::vector<double>(dim, 0.0));

  auto spin_orbital = [m](int p, int spin) { return p + spin * m; };

  for (std::uint64_t x = 0; x < dim; ++x) {
    h[x][x] += ham.e_core();
    // one-body: sum_{pq,sigma} h(p,q) c+_{p sigma} c_{q sigma}
    for (int spin = 0; spin < 2; ++spin)
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
          const double v = ham.one(p, q);
          if (v == 0.0) continue;
          const auto a1 = annihilate(x, spin_orbital(q, spin));
          if (!a1) continue;
          const auto c1 = create(a1->state, spin_orbital(p, spin));
          if (!c1) continue;
          h[c1->state][x] += v * a1->sign * c1->sign;
        }
    // two-body: (1/2) sum_{pqrs,sigma tau} (pq|rs) c+_{p s} c+_{r t} c_{s t} c_{q s}
    for (int sp = 0; sp < 2; ++sp)
      for (int tp = 0; tp < 2; ++tp)
        for (int p = 0; p < m; ++p)
          for (int q = 0; q < m; ++q)
            for (int r = 0; r < m; ++r)
              for (int s = 0; s < m; ++s) {
                const double v = ham.two(p, q, r, s);
                if (v == 0.0) continue;
                const auto a1 = annihilate(x, spin_orbital(q, sp));
                if (!a1) continue;
                const auto a2 = annihilate(a1->state, spin_orbital(s, tp));
                if (!a2) continue;
                const auto c2 = create(a2->state, spin_orbital(r, tp));
                if (!c2) continue;
                const auto c1 = create(c2->state, spin_orbital(p, sp));
                if (!c1) continue;
                h[c1->state][x] += 0.5 * v * a1->sign * a2->sign * c2->sign * c1->sign;
              }
  }
  return h;
}

inline std::uint64_t combined_index(const mpsqd::Determinant& d, int norb) {
  return d.alpha | (d.beta << norb);
}

// Random dense Hamiltonian with every symmetry-distinct integral populated.
inline mpsqd::FermionHamiltonian random_hamiltonian(int norb, int n_alpha, int n_beta,
                                                    std::uint64_t seed) {
  mpsqd::FermionHamiltonian ham(norb, n_alpha, n_beta);
  mpsqd::RngStream rng(seed);
  auto value = [&rng] { return 2.0 * rng.uniform() - 1.0; };
  ham.set_e_core(value());
  for (int p = 0; p < norb; ++p)
    for (int q = 0; q <= p; ++q) ham.set_one(p, q, value());
  for (int p = 0; p < norb; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r <= p; ++r)
        for (int s = 0; s <= r; ++s) {
          if (mpsqd::FermionHamiltonian::tri(r, s) > mpsqd::FermionHamiltonian::tri(p, q))
            continue;
          ham.set_two(p, q, r, s, 0.5 * value());
        }
  return ham;
}

// Plain sort-based statistics, straight from the textbook definitions.
struct PlainStats {
  double mean, stddev, median, q1, q3;
};

inline double plain_quantile(std::vector<double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = (static_cast<double>(n) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline PlainStats plain_stats(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double stddev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  return {mean, stddev, plain_quantile(xs, 0.5), plain_quantile(xs, 0.25),
          plain_quantile(xs, 0.75)};
}

}  // namespace oracle
