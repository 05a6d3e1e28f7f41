#pragma once

// Sample-based subspace diagonalization with self-consistent configuration
// recovery, plus the one-shot singles expansion refinement.
//
// Pipeline implemented by sqd_run:
//   1. postselect: keep sampled strings with the correct per-sector Hamming
//      weights; abort if nothing physical survives.
//   2. Initial occupancies are estimated from the raw physical samples.
//   3. Per iteration t = 1..max_iterations:
//        a. every unphysical shot occurrence is repaired toward the current
//           occupancies (probabilistic flips, exact target weights); the
//           recovered multiset is the physical samples plus the repairs;
//        b. K batches are drawn with replacement from the recovered
//           empirical distribution, deduplicated, and unioned with the
//           previous iteration's carryover set (empty at t = 1);
//        c. each batch is projected onto the Hamiltonian and its lowest
//           eigenpair solved; E_min(t) is the minimum over batches;
//        d. occupancies update to the average over all K batch eigenvectors
//           of <psi|n_k|psi> (diagonal in the determinant basis);
//        e. carryover becomes the argmin batch's determinants with
//           |coefficient| > carryover_threshold.
//      Stopping (checked in this order): |E_min(t) - E_min(t-1)| <
//      energy_tol once t >= 2 ("energy"); max |occ change| < occupancy_tol
//      ("occupancy"); t == max_iterations ("max_iterations").
//
// Stream derivation (see rng.hpp): recovery at iteration t consumes
// StreamKey(seed).with("recover").with(t), one weighted pick per flip,
// strings visited in sorted key order, shot occurrences in sequence. Batch b
// of iteration t draws from StreamKey(seed).with("batch").with(t).with(b),
// one uniform per draw. Everything is deterministic given SqdConfig.seed.
//
// extsqd_expand grows a converged batch basis by the spin-conserving single
// excitations of its dominant determinants (|c| > extsqd_ci_threshold) and
// rediagonalizes once; by subspace nesting its energy never exceeds the
// batch energy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mpsqd/determinant.hpp"
#include "mpsqd/eigensolver.hpp"
#include "mpsqd/errors.hpp"
#include "mpsqd/fcidump.hpp"
#include "mpsqd/rng.hpp"
#include "mpsqd/sample_set.hpp"
#include "mpsqd/slater_condon.hpp"

namespace mpsqd {

struct SqdConfig {
  int n_batches = 10;
  int batch_size = 3000;
  int max_iterations = 5;
  double energy_tol = 1e-8;        // Hartree
  double occupancy_tol = 1e-5;
  double carryover_threshold = 1e-4;
  double extsqd_ci_threshold = 1e-5;
  std::uint64_t seed = 0;

  friend bool operator==(const SqdConfig&, const SqdConfig&) = default;
};

inline void check_config(const SqdConfig& cfg) {
  if (cfg.n_batches < 1) throw InputError("n_batches must be >= 1");
  if (cfg.batch_size < 1) throw InputError("batch_size must be >= 1");
  if (cfg.max_iterations < 1) throw InputError("max_iterations must be >= 1");
  if (!(cfg.energy_tol > 0.0)) throw InputError("energy_tol must be > 0");
  if (!(cfg.occupancy_tol > 0.0)) throw InputError("occupancy_tol must be > 0");
  if (!(cfg.carryover_threshold > 0.0)) throw InputError("carryover_threshold must be > 0");
  if (!(cfg.extsqd_ci_threshold > 0.0)) throw InputError("extsqd_ci_threshold must be > 0");
}

struct PostselectResult {
  SampleSet physical;
  long long discarded = 0;
};

// Keeps exactly the keys whose alpha/beta sector Hamming weights match the
// target sector.
inline PostselectResult postselect(const SampleSet& samples, int norb, int n_alpha,
                                   int n_beta) {
  PostselectResult out;
  out.physical.label = samples.label;
  for (const auto& [key, count] : samples.counts) {
    if (count < 0) throw InputError("negative count in sample set");
    const auto [wa, wb] = hamming_weights(key, norb);
    if (wa == n_alpha && wb == n_beta)
      out.physical.counts[key] += count;
    else
      out.discarded += count;
  }
  out.physical.shots = total_counts(out.physical);
  return out;
}

// Count-weighted fraction of samples with logical bit k set, k = 0..2M-1
// (alpha block then beta block).
inline std::vector<double> estimate_occupancies(const SampleSet& physical, int norb) {
  const std::size_t width = 2 * static_cast<std::size_t>(norb);
  std::vector<double> sums(width, 0.0);
  long long total = 0;
  for (const auto& [key, count] : physical.counts) {
    if (key.size() != width) throw InputError("sample key width does not match 2M");
    for (std::size_t k = 0; k < width; ++k)
      if (key[width - 1 - k] == '1') sums[k] += static_cast<double>(count);
    total += count;
  }
  if (total < 1) throw InputError("no physical samples to estimate occupancies from");
  for (double& s : sums) s /= static_cast<double>(total);
  return sums;
}

namespace detail {

// Repairs one spin sector to its target weight: excess set bits are cleared
// with weights (1 - n) + eps, missing bits are set with weights n + eps,
// picks without replacement (eps = 1e-12). Bits indexed by logical k; the
// sector occupies logical bits [offset, offset + norb).
inline void repair_sector(std::string& bits, const std::vector<double>& occ, int norb,
                          int offset, int target, RngStream& rng) {
  const std::size_t width = bits.size();
  std::vector<int> set_bits;
  std::vector<int> clear_bits;
  for (int p = 0; p < norb; ++p) {
    const int k = offset + p;
    if (bits[width - 1 - static_cast<std::size_t>(k)] == '1')
      set_bits.push_back(k);
    else
      clear_bits.push_back(k);
  }
  constexpr double eps = 1e-12;
  const int have = static_cast<int>(set_bits.size());
  if (have == target) return;
  const bool removing = have > target;
  std::vector<int>& candidates = removing ? set_bits : clear_bits;
  std::vector<double> weights;
  weights.reserve(candidates.size());
  for (int k : candidates)
    weights.push_back(removing ? (1.0 - occ[static_cast<std::size_t>(k)]) + eps
                               : occ[static_cast<std::size_t>(k)] + eps);
  int flips = removing ? have - target : target - have;
  while (flips-- > 0) {
    const std::size_t pick = pick_weighted(weights, rng);
    const int k = candidates[pick];
    std::string::reference ch = bits[width - 1 - static_cast<std::size_t>(k)];
    ch = ch == '0' ? '1' : '0';
    weights[pick] = 0.0;
  }
}

}  // namespace detail

// Probabilistic repair of one sampled string toward the occupancy estimate;
// returns a string with exact (n_alpha, n_beta) sector weights. Physical
// inputs come back unchanged and consume no randomness.
inline std::string recover_configuration(const std::string& bits,
                                         const std::vector<double>& occ, int norb,
                                         int n_alpha, int n_beta, RngStream& rng) {
  if (occ.size() != 2 * static_cast<std::size_t>(norb))
    throw InputError("occupancy vector must hold 2M entries");
  (void)decode_bitstring(bits, norb);  // validates width and characters
  std::string out = bits;
  detail::repair_sector(out, occ, norb, 0, n_alpha, rng);
  detail::repair_sector(out, occ, norb, norb, n_beta, rng);
  return out;
}

// K deduplicated batches of batch_size draws with replacement from the
// recovered empirical distribution, each unioned with the carryover set and
// sorted. Batch b draws from key.with(b).
inline std::vector<std::vector<Determinant>> make_batches(
    const SampleSet& recovered, int norb, const SqdConfig& cfg,
    const std::vector<Determinant>& carryover, const StreamKey& key) {
  check_config(cfg);
  if (recovered.counts.empty()) throw InputError("cannot batch an empty sample set");
  std::vector<Determinant> dets;
  std::vector<double> cumulative;
  double running = 0.0;
  for (const auto& [bits, count] : recovered.counts) {
    if (count < 1) throw InputError("sample counts must be positive");
    dets.push_back(decode_bitstring(bits, norb));
    running += static_cast<double>(count);
    cumulative.push_back(running);
  }
  std::vector<std::vector<Determinant>> batches;
  batches.reserve(static_cast<std::size_t>(cfg.n_batches));
  for (int b = 0; b < cfg.n_batches; ++b) {
    RngStream rng = key.with(b).stream();
    std::set<Determinant> chosen(carryover.begin(), carryover.end());
    for (int s = 0; s < cfg.batch_size; ++s) {
      const double u = rng.uniform() * running;
      std::size_t idx = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      if (idx >= dets.size()) idx = dets.size() - 1;
      chosen.insert(dets[idx]);
    }
    batches.emplace_back(chosen.begin(), chosen.end());
  }
  return batches;
}

struct IterationRecord {
  int iteration = 0;                   // 1-based
  std::vector<double> batch_energies;  // one per batch, batch order
  double e_min = 0.0;
  std::vector<double> occupancies;     // |c|^2-weighted bit averages over all K batches
  std::vector<int> batch_dims;
  int carryover_size = 0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct SqdTrace {
  int norb = 0;
  int n_alpha = 0;
  int n_beta = 0;
  long long total_shots = 0;
  long long physical_shots = 0;
  long long discarded = 0;
  std::vector<IterationRecord> iterations;
  double e_first = 0.0;
  double e_last = 0.0;
  std::optional<double> e_ext;         // filled by the expansion step, if run
  std::string converged_reason;        // "energy" | "occupancy" | "max_iterations"
  std::vector<Determinant> final_basis;  // argmin batch of the last iteration
  std::vector<double> final_vector;

  friend bool operator==(const SqdTrace&, const SqdTrace&) = default;
};

inline SqdTrace sqd_run(const FermionHamiltonian& ham, const SampleSet& samples,
                        const SqdConfig& cfg) {
  check_config(cfg);
  const int norb = ham.norb();
  const int na = ham.n_alpha();
  const int nb = ham.n_beta();

  SqdTrace trace;
  trace.norb = norb;
  trace.n_alpha = na;
  trace.n_beta = nb;
  trace.total_shots = total_counts(samples);

  const PostselectResult selected = postselect(samples, norb, na, nb);
  trace.physical_shots = selected.physical.shots;
  trace.discarded = selected.discarded;
  if (selected.physical.shots < 1)
    throw InputError("no physical samples survived postselection");

  std::vector<double> occ = estimate_occupancies(selected.physical, norb);
  std::vector<Determinant> carryover;
  const StreamKey root(cfg.seed);

  double previous_energy = 0.0;
  for (int t = 1; t <= cfg.max_iterations; ++t) {
    // a. Repair every unphysical shot occurrence toward current occupancies.
    SampleSet recovered;
    recovered.label = samples.label;
    RngStream recover_rng = root.with("recover").with(t).stream();
    for (const auto& [key, count] : samples.counts) {
      const auto [wa, wb] = hamming_weights(key, norb);
      if (wa == na && wb == nb) {
        recovered.counts[key] += count;
      } else {
        for (long long c = 0; c < count; ++c)
          ++recovered.counts[recover_configuration(key, occ, norb, na, nb, recover_rng)];
      }
    }
    recovered.shots = total_counts(recovered);

    // b. Draw batches; c. solve each.
    const std::vector<std::vector<Determinant>> batches =
        make_batches(recovered, norb, cfg, carryover, root.with("batch").with(t));

    IterationRecord record;
    record.iteration = t;
    std::vector<std::vector<double>> vectors;
    vectors.reserve(batches.size());
    int best = -1;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const SubspaceMatrix matrix = project_hamiltonian(ham, batches[b]);
      const EigenResult eig = lowest_eigenpair(matrix);
      record.batch_energies.push_back(eig.energy);
      record.batch_dims.push_back(static_cast<int>(batches[b].size()));
      vectors.push_back(eig.vector);
      if (best < 0 || eig.energy < record.batch_energies[static_cast<std::size_t>(best)])
        best = static_cast<int>(b);
    }
    record.e_min = record.batch_energies[static_cast<std::size_t>(best)];

    // d. Occupancies averaged over all batch eigenvectors.
    std::vector<double> occ_next(2 * static_cast<std::size_t>(norb), 0.0);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      for (std::size_t x = 0; x < batches[b].size(); ++x) {
        const double w = vectors[b][x] * vectors[b][x];
        const Determinant& d = batches[b][x];
        for (int p = 0; p < norb; ++p) {
          if ((d.alpha >> p) & 1ULL) occ_next[static_cast<std::size_t>(p)] += w;
          if ((d.beta >> p) & 1ULL) occ_next[static_cast<std::size_t>(norb + p)] += w;
        }
      }
    }
    for (double& v : occ_next) v /= static_cast<double>(batches.size());
    record.occupancies = occ_next;

    // e. Carryover from the argmin batch.
    carryover.clear();
    for (std::size_t x = 0; x < batches[static_cast<std::size_t>(best)].size(); ++x)
      if (std::fabs(vectors[static_cast<std::size_t>(best)][x]) > cfg.carryover_threshold)
        carryover.push_back(batches[static_cast<std::size_t>(best)][x]);
    record.carryover_size = static_cast<int>(carryover.size());

    double occ_shift = 0.0;
    for (std::size_t k = 0; k < occ_next.size(); ++k)
      occ_shift = std::max(occ_shift, std::fabs(occ_next[k] - occ[k]));

    trace.iterations.push_back(record);
    trace.final_basis = batches[static_cast<std::size_t>(best)];
    trace.final_vector = vectors[static_cast<std::size_t>(best)];

    if (t >= 2 && std::fabs(record.e_min - previous_energy) < cfg.energy_tol) {
      trace.converged_reason = "energy";
    } else if (occ_shift < cfg.occupancy_tol) {
      trace.converged_reason = "occupancy";
    } else if (t == cfg.max_iterations) {
      trace.converged_reason = "max_iterations";
    }
    previous_energy = record.e_min;
    occ = std::move(occ_next);
    if (!trace.converged_reason.empty()) break;
  }

  trace.e_first = trace.iterations.front().e_min;
  trace.e_last = trace.iterations.back().e_min;
  return trace;
}

struct ExtsqdResult {
  double e_ext = 0.0;
  int dimension = 0;

  friend bool operator==(const ExtsqdResult&, const ExtsqdResult&) = default;
};

// Expands the basis by the spin-conserving single excitations of its
// dominant determinants (|c| > extsqd_ci_threshold) and solves the lowest
// eigenpair of the expanded projection once.
inline ExtsqdResult extsqd_expand(const FermionHamiltonian& ham,
                                  const std::vector<Determinant>& basis,
                                  const std::vector<double>& coefficients,
                                  const SqdConfig& cfg) {
  check_config(cfg);
  if (basis.empty()) throw InputError("cannot expand an empty basis");
  if (basis.size() != coefficients.size())
    throw InputError("coefficient list does not match the basis");
  double norm2 = 0.0;
  for (double c : coefficients) norm2 += c * c;
  if (std::fabs(norm2 - 1.0) > 1e-8)
    throw InputError("expansion coefficients must have unit norm");

  std::set<Determinant> expanded(basis.begin(), basis.end());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (std::fabs(coefficients[i]) <= cfg.extsqd_ci_threshold) continue;
    for (const Determinant& d : single_excitations(basis[i], ham.norb()))
      expanded.insert(d);
  }
  const std::vector<Determinant> big(expanded.begin(), expanded.end());
  const SubspaceMatrix matrix = project_hamiltonian(ham, big);
  const EigenResult eig = lowest_eigenpair(matrix);
  return {eig.energy, static_cast<int>(big.size())};
}

}  // namespace mpsqd
