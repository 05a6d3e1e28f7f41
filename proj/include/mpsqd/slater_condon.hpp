#pragma once

// Matrix elements of the second-quantized Hamiltonian between Slater
// determinants, and projection onto an explicit determinant subspace.
//
// Sign convention: spin orbitals ordered alpha_0 < ... < beta_0 < ..., with
// the occupation-number state built lowest-index-leftmost, so annihilating
// orbital s picks up (-1)^(number of occupied orbitals below s). With that
// ordering, cross-sector crossings cancel pairwise and every parity reduces
// to counts inside a single spin sector.

#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mpsqd/determinant.hpp"
#include "mpsqd/errors.hpp"
#include "mpsqd/fcidump.hpp"

namespace mpsqd {

namespace detail {

inline std::uint64_t bits_between(int i, int j) {
  const int lo = std::min(i, j), hi = std::max(i, j);
  if (hi - lo < 2) return 0;
  return (sector_mask(hi) ^ sector_mask(lo + 1));
}

// Parity of moving one electron i -> a within a sector, other bits frozen.
inline int single_parity(std::uint64_t occ, int i, int a) {
  return std::popcount(occ & bits_between(i, a)) % 2 ? -1 : 1;
}

inline int parity_below(std::uint64_t occ, int p) {
  return std::popcount(occ & (p == 0 ? 0 : sector_mask(p))) % 2 ? -1 : 1;
}

struct SectorDiff {
  std::vector<int> holes;      // occupied in d1, empty in d2
  std::vector<int> particles;  // empty in d1, occupied in d2
};

inline SectorDiff sector_diff(std::uint64_t m1, std::uint64_t m2) {
  return {occupied_orbitals(m1 & ~m2), occupied_orbitals(m2 & ~m1)};
}

// Parity of a same-sector double excitation via sequential operator
// application: annihilate holes ascending, then create particles descending.
inline int double_parity(std::uint64_t occ, int i, int j, int a, int b) {
  int sign = 1;
  sign *= parity_below(occ, i);
  occ &= ~(1ULL << i);
  sign *= parity_below(occ, j);
  occ &= ~(1ULL << j);
  sign *= parity_below(occ, b);
  occ |= 1ULL << b;
  sign *= parity_below(occ, a);
  return sign;
}

}  // namespace detail

inline double slater_condon_element(const FermionHamiltonian& ham,
                                    const Determinant& d1, const Determinant& d2) {
  const int norb = ham.norb();
  check_determinant(d1, norb);
  check_determinant(d2, norb);
  if (std::popcount(d1.alpha) != std::popcount(d2.alpha) ||
      std::popcount(d1.beta) != std::popcount(d2.beta))
    throw InputError("slater_condon_element: mismatched particle numbers");

  const int deg_a = std::popcount(d1.alpha ^ d2.alpha) / 2;
  const int deg_b = std::popcount(d1.beta ^ d2.beta) / 2;
  const int degree = deg_a + deg_b;
  if (degree > 2) return 0.0;

  const auto occ_a = occupied_orbitals(d1.alpha);
  const auto occ_b = occupied_orbitals(d1.beta);

  if (degree == 0) {
    double e = ham.e_core();
    for (int p : occ_a) e += ham.one(p, p);
    for (int p : occ_b) e += ham.one(p, p);
    for (std::size_t x = 0; x < occ_a.size(); ++x)
      for (std::size_t y = x + 1; y < occ_a.size(); ++y) {
        const int p = occ_a[x], q = occ_a[y];
        e += ham.two(p, p, q, q) - ham.two(p, q, q, p);
      }
    for (std::size_t x = 0; x < occ_b.size(); ++x)
      for (std::size_t y = x + 1; y < occ_b.size(); ++y) {
        const int p = occ_b[x], q = occ_b[y];
        e += ham.two(p, p, q, q) - ham.two(p, q, q, p);
      }
    for (int p : occ_a)
      for (int q : occ_b) e += ham.two(p, p, q, q);
    return e;
  }

  if (degree == 1) {
    const bool in_alpha = deg_a == 1;
    const auto diff = detail::sector_diff(in_alpha ? d1.alpha : d1.beta,
                                          in_alpha ? d2.alpha : d2.beta);
    const int i = diff.holes[0], a = diff.particles[0];
    double v = ham.one(i, a);
    const auto& same = in_alpha ? occ_a : occ_b;
    const auto& other = in_alpha ? occ_b : occ_a;
    for (int j : same) {
      if (j == i) continue;
      v += ham.two(i, a, j, j) - ham.two(i, j, j, a);
    }
    for (int j : other) v += ham.two(i, a, j, j);
    return detail::single_parity(in_alpha ? d1.alpha : d1.beta, i, a) * v;
  }

  // degree == 2
  if (deg_a == 1 && deg_b == 1) {
    const auto da = detail::sector_diff(d1.alpha, d2.alpha);
    const auto db = detail::sector_diff(d1.beta, d2.beta);
    const int i = da.holes[0], a = da.particles[0];
    const int j = db.holes[0], b = db.particles[0];
    const int sign = detail::single_parity(d1.alpha, i, a) *
                     detail::single_parity(d1.beta, j, b);
    return sign * ham.two(i, a, j, b);
  }

  const bool in_alpha = deg_a == 2;
  const auto diff = detail::sector_diff(in_alpha ? d1.alpha : d1.beta,
                                        in_alpha ? d2.alpha : d2.beta);
  const int i = diff.holes[0], j = diff.holes[1];      // ascending
  const int a = diff.particles[0], b = diff.particles[1];
  const int sign =
      detail::double_parity(in_alpha ? d1.alpha : d1.beta, i, j, a, b);
  return sign * (ham.two(i, a, j, b) - ham.two(i, b, j, a));
}

// Symmetric subspace Hamiltonian in row-compressed form. Only pairs
// connected by excitation degree <= 2 are stored.
class SubspaceMatrix {
 public:
  SubspaceMatrix() = default;

  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<Determinant>& basis() const { return basis_; }
  const std::vector<double>& diagonal() const { return diag_; }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(basis_.size(), 0.0);
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      y[i] += diag_[i] * x[i];
      for (const auto& [j, v] : upper_[i]) {
        y[i] += v * x[j];
        y[j] += v * x[i];
      }
    }
  }

  std::vector<std::vector<double>> to_dense() const {
    const std::size_t n = basis_.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      m[i][i] = diag_[i];
      for (const auto& [j, v] : upper_[i]) {
        m[i][static_cast<std::size_t>(j)] = v;
        m[static_cast<std::size_t>(j)][i] = v;
      }
    }
    return m;
  }

  friend SubspaceMatrix project_hamiltonian(const FermionHamiltonian&,
                                            const std::vector<Determinant>&);

 private:
  std::vector<Determinant> basis_;
  std::vector<double> diag_;
  // strictly-upper entries per row: (column > row, value)
  std::vector<std::vector<std::pair<int, double>>> upper_;
};

inline SubspaceMatrix project_hamiltonian(const FermionHamiltonian& ham,
                                          const std::vector<Determinant>& dets) {
  if (dets.empty()) throw InputError("project_hamiltonian: empty basis");
  {
    std::set<Determinant> unique(dets.begin(), dets.end());
    if (unique.size() != dets.size())
      throw InputError("project_hamiltonian: duplicate determinants in basis");
  }
  const int na = std::popcount(dets.front().alpha);
  const int nb = std::popcount(dets.front().beta);
  for (const auto& d : dets) {
    check_determinant(d, ham.norb());
    if (std::popcount(d.alpha) != na || std::popcount(d.beta) != nb)
      throw InputError("project_hamiltonian: mixed particle numbers in basis");
  }

  SubspaceMatrix m;
  m.basis_ = dets;
  const std::size_t n = dets.size();
  m.diag_.resize(n);
  m.upper_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    m.diag_[i] = slater_condon_element(ham, dets[i], dets[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const int degree = (std::popcount(dets[i].alpha ^ dets[j].alpha) +
                          std::popcount(dets[i].beta ^ dets[j].beta)) /
                         2;
      if (degree > 2) continue;
      const double v = slater_condon_element(ham, dets[i], dets[j]);
      if (v != 0.0) m.upper_[i].push_back({static_cast<int>(j), v});
    }
  }
  return m;
}

}  // namespace mpsqd
