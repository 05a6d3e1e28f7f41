#pragma once

// Measurement sampling stand-in for circuit execution: draws bitstrings from
// a reference wavefunction distribution and corrupts them with readout noise
// and, for co-scheduled experiments, correlated cross-talk flips across
// layout boundaries.
//
// Stream derivation (all streams are independent xoshiro256** streams, see
// rng.hpp):
//   sample_counts(psi, shots, noise, seed, label):
//     draw stream    = StreamKey(seed).with("draw")
//     readout stream = StreamKey(seed).with("readout")
//     Shot-major: one uniform per shot from the draw stream; one uniform per
//     logical bit per shot (bits 0..2M-1) from the readout stream, flipping
//     the bit iff u < p_readout.
//   sample_parallel(psis, plan, shots, noise, job_seed):
//     per-register seed_r   = StreamKey(job_seed).with(layout r's label).value()
//     per-register streams as in sample_counts(seed_r)
//     cross-talk stream     = StreamKey(job_seed).with("xtalk"), one uniform
//     per candidate pair per shot, pairs in ascending (min, max) qubit order.
//     With p_xtalk = 0 every per-register result is byte-identical to a
//     serial sample_counts run seeded with seed_r.
//
// Cross-talk model: for each pair of measured qubits (u, v) from different
// layouts at graph distance d with 1 <= d <= xtalk_max_hops, both measured
// bits flip together with probability p_xtalk * xtalk_decay^(d-1). Ancilla
// qubits are placed but never measured; they shape distances only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mpsqd/circuit.hpp"
#include "mpsqd/determinant.hpp"
#include "mpsqd/errors.hpp"
#include "mpsqd/layout.hpp"
#include "mpsqd/rng.hpp"
#include "mpsqd/sample_set.hpp"

namespace mpsqd {

struct NoiseModel {
  double p_readout = 0.01;   // per-bit symmetric flip probability
  double p_xtalk = 0.01;     // base joint-flip probability at one hop
  double xtalk_decay = 0.25; // per-hop attenuation, in (0, 1]
  int xtalk_max_hops = 3;    // pairs farther than this never interact

  static NoiseModel none() { return {0.0, 0.0, 0.25, 3}; }

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

inline void check_noise(const NoiseModel& noise) {
  if (!(noise.p_readout >= 0.0 && noise.p_readout <= 1.0))
    throw InputError("p_readout must lie in [0, 1]");
  if (!(noise.p_xtalk >= 0.0 && noise.p_xtalk <= 1.0))
    throw InputError("p_xtalk must lie in [0, 1]");
  if (!(noise.xtalk_decay > 0.0 && noise.xtalk_decay <= 1.0))
    throw InputError("xtalk_decay must lie in (0, 1]");
  if (noise.xtalk_max_hops < 1) throw InputError("xtalk_max_hops must be >= 1");
}

// Sparse wavefunction over determinants of `norb` spatial orbitals.
struct Wavefunction {
  int norb = 0;
  std::vector<Determinant> dets;
  std::vector<double> coeffs;
};

// Valid iff shapes agree, determinants fit norb, and sum |c|^2 == 1 within
// 1e-8. Throws InputError otherwise.
inline void check_wavefunction(const Wavefunction& psi) {
  if (psi.norb < 1 || psi.norb > kMaxOrbitals)
    throw InputError("wavefunction orbital count out of range");
  if (psi.dets.empty() || psi.dets.size() != psi.coeffs.size())
    throw InputError("wavefunction needs matching, non-empty determinant and coefficient lists");
  double norm2 = 0.0;
  for (std::size_t i = 0; i < psi.dets.size(); ++i) {
    check_determinant(psi.dets[i], psi.norb);
    norm2 += psi.coeffs[i] * psi.coeffs[i];
  }
  if (std::fabs(norm2 - 1.0) > 1e-8) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "wavefunction norm^2 is %.12f, not 1", norm2);
    throw InputError(msg);
  }
}

namespace detail {

// Cumulative-distribution sampler over a wavefunction's |c|^2 weights with
// pre-rendered bitstrings. Both the serial and the parallel samplers draw
// through this, which is what makes them bit-compatible.
class DeterminantSampler {
 public:
  explicit DeterminantSampler(const Wavefunction& psi) {
    check_wavefunction(psi);
    cumulative_.reserve(psi.coeffs.size());
    double running = 0.0;
    for (std::size_t i = 0; i < psi.coeffs.size(); ++i) {
      running += psi.coeffs[i] * psi.coeffs[i];
      cumulative_.push_back(running);
      keys_.push_back(encode_determinant(psi.dets[i], psi.norb));
    }
    total_ = running;
  }

  const std::string& draw(RngStream& rng) const {
    const double u = rng.uniform() * total_;
    std::size_t idx = static_cast<std::size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
        cumulative_.begin());
    if (idx >= keys_.size()) idx = keys_.size() - 1;
    return keys_[idx];
  }

 private:
  std::vector<double> cumulative_;
  std::vector<std::string> keys_;
  double total_ = 1.0;
};

// Flips (in place) each character of `bits` with probability p, consuming
// one uniform per logical bit (bit k lives at character width-1-k).
inline void apply_readout(std::string& bits, double p, RngStream& rng) {
  const std::size_t width = bits.size();
  for (std::size_t k = 0; k < width; ++k) {
    const double u = rng.uniform();
    if (u < p) {
      std::string::reference ch = bits[width - 1 - k];
      ch = ch == '0' ? '1' : '0';
    }
  }
}

}  // namespace detail

inline SampleSet sample_counts(const Wavefunction& psi, long long shots,
                               const NoiseModel& noise, std::uint64_t seed,
                               std::string label = "exp") {
  check_noise(noise);
  if (shots < 1) throw InputError("shots must be >= 1");
  const detail::DeterminantSampler sampler(psi);
  RngStream draw = StreamKey(seed).with("draw").stream();
  RngStream readout = StreamKey(seed).with("readout").stream();
  SampleSet out{std::move(label), shots, {}};
  for (long long s = 0; s < shots; ++s) {
    std::string bits = sampler.draw(draw);
    detail::apply_readout(bits, noise.p_readout, readout);
    ++out.counts[bits];
  }
  return out;
}

struct CrossPair {
  int qubit_u = -1;        // lower qubit id
  int qubit_v = -1;        // higher qubit id
  int distance = 0;        // graph hops between them
  double probability = 0;  // p_xtalk * xtalk_decay^(distance-1)

  friend bool operator==(const CrossPair&, const CrossPair&) = default;
};

// Every pair of measured (system) qubits from different layouts within
// xtalk_max_hops, sorted ascending by (qubit_u, qubit_v).
inline std::vector<CrossPair> crosstalk_pairs(const PartitionPlan& plan,
                                              const NoiseModel& noise) {
  check_noise(noise);
  std::vector<CrossPair> pairs;
  for (std::size_t i = 0; i < plan.layouts.size(); ++i)
    for (std::size_t j = i + 1; j < plan.layouts.size(); ++j)
      for (int a : plan.layouts[i].system_qubits)
        for (int b : plan.layouts[j].system_qubits) {
          const int d = graph_distance(plan.map, a, b);
          if (d < 1 || d > noise.xtalk_max_hops) continue;
          pairs.push_back({std::min(a, b), std::max(a, b), d,
                           noise.p_xtalk * std::pow(noise.xtalk_decay, d - 1)});
        }
  std::sort(pairs.begin(), pairs.end(), [](const CrossPair& x, const CrossPair& y) {
    return std::pair{x.qubit_u, x.qubit_v} < std::pair{y.qubit_u, y.qubit_v};
  });
  return pairs;
}

namespace detail {

// Character position of each measured physical qubit inside the composite
// key (registers in layout order, first layout least significant, printed
// most-significant bit leftmost).
inline std::map<int, std::size_t> composite_positions(const PartitionPlan& plan) {
  std::size_t width = 0;
  for (const auto& layout : plan.layouts) width += layout.system_qubits.size();
  std::map<int, std::size_t> pos;
  std::size_t offset = 0;
  for (const auto& layout : plan.layouts) {
    for (std::size_t b = 0; b < layout.system_qubits.size(); ++b) {
      if (!pos.emplace(layout.system_qubits[b], width - 1 - (offset + b)).second)
        throw PlanError("qubit " + std::to_string(layout.system_qubits[b]) +
                        " is measured by two layouts");
    }
    offset += layout.system_qubits.size();
  }
  return pos;
}

inline void apply_crosstalk_impl(std::string& joint,
                                 const std::vector<CrossPair>& pairs,
                                 const std::map<int, std::size_t>& positions,
                                 RngStream& rng) {
  for (const CrossPair& pair : pairs) {
    const double u = rng.uniform();
    if (u >= pair.probability) continue;
    for (int q : {pair.qubit_u, pair.qubit_v}) {
      const auto it = positions.find(q);
      if (it == positions.end())
        throw PlanError("cross-talk pair touches unmeasured qubit " + std::to_string(q));
      std::string::reference ch = joint[it->second];
      ch = ch == '0' ? '1' : '0';
    }
  }
}

}  // namespace detail

// Applies one round of correlated pair flips to a composite bitstring.
inline std::string apply_crosstalk(std::string joint, const PartitionPlan& plan,
                                   const NoiseModel& noise, RngStream& rng) {
  std::size_t width = 0;
  for (const auto& layout : plan.layouts) width += layout.system_qubits.size();
  if (joint.size() != width) {
    char msg[112];
    std::snprintf(msg, sizeof msg, "composite string of width %zu does not match %zu measured bits",
                  joint.size(), width);
    throw InputError(msg);
  }
  for (char ch : joint)
    if (ch != '0' && ch != '1')
      throw InputError("composite string holds a character other than 0/1");
  const std::vector<CrossPair> pairs = crosstalk_pairs(plan, noise);
  const std::map<int, std::size_t> positions = detail::composite_positions(plan);
  detail::apply_crosstalk_impl(joint, pairs, positions, rng);
  return joint;
}

// Co-scheduled sampling: psis[i] runs on plan.layouts[i]. Returns one
// SampleSet per layout, labeled by the layout. See the header comment for
// the exact stream derivation and the zero-cross-talk equivalence.
inline std::vector<SampleSet> sample_parallel(const std::vector<Wavefunction>& psis,
                                              const PartitionPlan& plan,
                                              long long shots, const NoiseModel& noise,
                                              std::uint64_t job_seed) {
  check_noise(noise);
  if (shots < 1) throw InputError("shots must be >= 1");
  if (psis.empty()) throw InputError("nothing to sample");
  if (psis.size() != plan.layouts.size())
    throw PlanError("expected one wavefunction per layout");
  {
    PartitionPlan disjointness = plan;
    disjointness.min_buffer = 0;
    const std::vector<Violation> violations = validate_partition(disjointness);
    if (!violations.empty())
      throw PlanError("layouts are not disjoint: " + describe(violations.front()));
    std::set<std::string> labels;
    for (const auto& layout : plan.layouts)
      if (!labels.insert(layout.label).second)
        throw InputError("duplicate layout label '" + layout.label +
                         "' would collide derived sampling streams");
  }

  const std::size_t n = psis.size();
  std::vector<detail::DeterminantSampler> samplers;
  std::vector<RngStream> draws;
  std::vector<RngStream> readouts;
  std::vector<std::size_t> sizes;
  samplers.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const QubitLayout& layout = plan.layouts[r];
    check_layout(plan.map, layout);
    if (layout.system_qubits.size() != 2 * static_cast<std::size_t>(psis[r].norb))
      throw PlanError("layout '" + layout.label + "' provides " +
                      std::to_string(layout.system_qubits.size()) +
                      " measured qubits for a " + std::to_string(2 * psis[r].norb) +
                      "-bit wavefunction");
    samplers.emplace_back(psis[r]);
    // Collapse to a scalar seed and rebuild so the streams match what a
    // serial sample_counts(..., seed_r) run derives, byte for byte.
    const std::uint64_t seed_r = StreamKey(job_seed).with(layout.label).value();
    draws.push_back(StreamKey(seed_r).with("draw").stream());
    readouts.push_back(StreamKey(seed_r).with("readout").stream());
    sizes.push_back(layout.system_qubits.size());
  }
  RngStream xtalk = StreamKey(job_seed).with("xtalk").stream();
  const std::vector<CrossPair> pairs = crosstalk_pairs(plan, noise);
  const std::map<int, std::size_t> positions = detail::composite_positions(plan);

  std::size_t width = 0;
  for (std::size_t s : sizes) width += s;

  std::vector<SampleSet> out;
  out.reserve(n);
  for (std::size_t r = 0; r < n; ++r)
    out.push_back(SampleSet{plan.layouts[r].label, shots, {}});

  std::string joint(width, '0');
  for (long long s = 0; s < shots; ++s) {
    std::size_t offset = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const std::string& bits = samplers[r].draw(draws[r]);
      joint.replace(width - offset - sizes[r], sizes[r], bits);
      offset += sizes[r];
    }
    detail::apply_crosstalk_impl(joint, pairs, positions, xtalk);
    std::size_t consumed = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t begin = width - consumed - sizes[r];
      std::string bits = joint.substr(begin, sizes[r]);
      detail::apply_readout(bits, noise.p_readout, readouts[r]);
      ++out[r].counts[bits];
      consumed += sizes[r];
    }
  }
  return out;
}

}  // namespace mpsqd
