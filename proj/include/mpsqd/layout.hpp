#pragma once

// Qubit layouts on a coupling map, disjoint partition plans with buffer
// distances, a greedy zig-zag chain planner, and bundled two-experiment
// example plans.
//
// Buffer semantics: a plan with min_buffer = n requires every cross-layout
// qubit pair to sit at graph distance >= n + 1 (n idle qubits in between).
//
// plan_zigzag_layout walks from an anchor qubit, repeatedly stepping to the
// smallest-id unused non-faulty neighbor until the chain holds 2M qubits.
// A dead end (or an ancilla shortage) fails over to the next candidate
// anchor: the requested anchor first, then every other qubit id in ascending
// order. Ancilla qubits hang off the chain: at each chain qubit of degree
// >= 3, in chain order, the largest-id free neighbor is taken, at most one
// per attach point. Heavy-hex maps number bridge qubits after row qubits, so
// this picks the bridge qubits dangling from the chain.

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "mpsqd/coupling.hpp"
#include "mpsqd/errors.hpp"

namespace mpsqd {

struct QubitLayout {
  std::string label;
  std::vector<int> system_qubits;   // measurement order == logical bit order
  std::vector<int> ancilla_qubits;  // placed but never measured

  friend bool operator==(const QubitLayout&, const QubitLayout&) = default;
};

inline std::vector<int> layout_qubits(const QubitLayout& layout) {
  std::vector<int> all = layout.system_qubits;
  all.insert(all.end(), layout.ancilla_qubits.begin(), layout.ancilla_qubits.end());
  return all;
}

// Throws InputError unless every id is valid on the map, distinct within the
// layout, and not fault-flagged.
inline void check_layout(const CouplingMap& map, const QubitLayout& layout) {
  std::vector<int> all = layout_qubits(layout);
  if (all.empty()) throw InputError("layout '" + layout.label + "' is empty");
  for (int q : all) {
    map.check_qubit(q);
    if (map.is_faulty(q))
      throw InputError("layout '" + layout.label + "' uses faulty qubit " +
                       std::to_string(q));
  }
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    throw InputError("layout '" + layout.label + "' repeats a qubit id");
}

struct PartitionPlan {
  CouplingMap map;
  std::vector<QubitLayout> layouts;
  int min_buffer = 1;
};

struct Violation {
  enum class Kind { overlap, distance };
  Kind kind = Kind::overlap;
  std::string label_a;
  std::string label_b;
  int qubit_a = -1;
  int qubit_b = -1;
  int distance = 0;  // hops between qubit_a and qubit_b (0 for overlaps)
  int required = 0;  // minimum cross-layout distance the plan demands
};

inline std::string describe(const Violation& v) {
  char msg[192];
  if (v.kind == Violation::Kind::overlap)
    std::snprintf(msg, sizeof msg, "layouts '%s' and '%s' both use qubit %d",
                  v.label_a.c_str(), v.label_b.c_str(), v.qubit_a);
  else
    std::snprintf(msg, sizeof msg,
                  "qubit %d of '%s' sits %d hops from qubit %d of '%s' (plan needs >= %d)",
                  v.qubit_a, v.label_a.c_str(), v.distance, v.qubit_b,
                  v.label_b.c_str(), v.required);
  return msg;
}

// Reports every qubit shared between two layouts and every cross-layout pair
// closer than min_buffer + 1 hops. Violations are data, not errors; the plan
// is valid iff the result is empty.
inline std::vector<Violation> validate_partition(const PartitionPlan& plan) {
  std::vector<Violation> out;
  const int required = plan.min_buffer + 1;
  for (std::size_t i = 0; i < plan.layouts.size(); ++i) {
    const std::vector<int> qa = layout_qubits(plan.layouts[i]);
    for (std::size_t j = i + 1; j < plan.layouts.size(); ++j) {
      const std::vector<int> qb = layout_qubits(plan.layouts[j]);
      for (int a : qa) {
        for (int b : qb) {
          if (a == b) {
            out.push_back({Violation::Kind::overlap, plan.layouts[i].label,
                           plan.layouts[j].label, a, b, 0, required});
            continue;
          }
          const int d = graph_distance(plan.map, a, b);
          if (d >= 0 && d < required)
            out.push_back({Violation::Kind::distance, plan.layouts[i].label,
                           plan.layouts[j].label, a, b, d, required});
        }
      }
    }
  }
  return out;
}

namespace detail {

// Greedy smallest-id walk; may return fewer than `length` qubits on a dead
// end (empty when the anchor itself is faulty).
inline std::vector<int> zigzag_chain(const CouplingMap& map, int length, int anchor) {
  std::vector<int> chain;
  if (map.is_faulty(anchor)) return chain;
  std::vector<char> used(static_cast<std::size_t>(map.num_qubits()), 0);
  chain.push_back(anchor);
  used[static_cast<std::size_t>(anchor)] = 1;
  while (static_cast<int>(chain.size()) < length) {
    int next = -1;
    for (int v : map.neighbors(chain.back()))
      if (!used[static_cast<std::size_t>(v)] && !map.is_faulty(v) && (next < 0 || v < next))
        next = v;
    if (next < 0) break;
    chain.push_back(next);
    used[static_cast<std::size_t>(next)] = 1;
  }
  return chain;
}

// Collects up to `want` ancillas hanging off the chain (see header comment).
inline std::vector<int> chain_ancillas(const CouplingMap& map,
                                       const std::vector<int>& chain, int want) {
  std::vector<char> taken(static_cast<std::size_t>(map.num_qubits()), 0);
  for (int q : chain) taken[static_cast<std::size_t>(q)] = 1;
  std::vector<int> ancillas;
  for (int c : chain) {
    if (static_cast<int>(ancillas.size()) == want) break;
    if (map.degree(c) < 3) continue;
    int pick = -1;
    for (int v : map.neighbors(c))
      if (!taken[static_cast<std::size_t>(v)] && !map.is_faulty(v) && v > pick)
        pick = v;
    if (pick >= 0) {
      ancillas.push_back(pick);
      taken[static_cast<std::size_t>(pick)] = 1;
    }
  }
  return ancillas;
}

}  // namespace detail

inline QubitLayout plan_zigzag_layout(const CouplingMap& map, int num_orbitals,
                                      int n_ancilla, int anchor,
                                      std::string label = "layout") {
  if (num_orbitals < 1) throw InputError("plan_zigzag_layout: need at least one orbital");
  if (n_ancilla < 0) throw InputError("plan_zigzag_layout: negative ancilla count");
  map.check_qubit(anchor);
  const int chain_len = 2 * num_orbitals;

  int healthy = 0;
  for (int q = 0; q < map.num_qubits(); ++q) healthy += map.is_faulty(q) ? 0 : 1;
  if (healthy < chain_len + n_ancilla) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "placement needs %d non-faulty qubits but the map has %d",
                  chain_len + n_ancilla, healthy);
    throw PlanError(msg);
  }

  std::vector<int> anchors;
  anchors.reserve(static_cast<std::size_t>(map.num_qubits()));
  anchors.push_back(anchor);
  for (int q = 0; q < map.num_qubits(); ++q)
    if (q != anchor) anchors.push_back(q);

  int longest_chain = 0;
  int most_ancillas = 0;
  for (int a : anchors) {
    std::vector<int> chain = detail::zigzag_chain(map, chain_len, a);
    longest_chain = std::max(longest_chain, static_cast<int>(chain.size()));
    if (static_cast<int>(chain.size()) < chain_len) continue;
    std::vector<int> ancillas = detail::chain_ancillas(map, chain, n_ancilla);
    most_ancillas = std::max(most_ancillas, static_cast<int>(ancillas.size()));
    if (static_cast<int>(ancillas.size()) < n_ancilla) continue;
    return QubitLayout{std::move(label), std::move(chain), std::move(ancillas)};
  }

  char msg[200];
  if (longest_chain < chain_len)
    std::snprintf(msg, sizeof msg,
                  "no anchor admits a %d-qubit chain (longest greedy walk reached %d qubits)",
                  chain_len, longest_chain);
  else
    std::snprintf(msg, sizeof msg,
                  "chains of %d qubits exist but at most %d of %d requested ancilla attach points are free",
                  chain_len, most_ancillas, n_ancilla);
  throw PlanError(msg);
}

// Bundled two-experiment plans: two 8-qubit zig-zag chains with three
// ancillas each on heavy_hex_map(3, 19), separated by `buffer` idle qubits
// along the middle row (buffer in {1, 2, 3}).
inline PartitionPlan hex_pair_plan(int buffer) {
  if (buffer < 1 || buffer > 3) throw InputError("bundled plans exist for buffer 1, 2, or 3");
  const CouplingMap map = heavy_hex_map(3, 19);

  const QubitLayout first = plan_zigzag_layout(map, 4, 3, 19, "exp0");

  CouplingMap second_map = map;
  for (int q : layout_qubits(first)) second_map.mark_faulty(q);
  const int gap_start = first.system_qubits.back() + 1;
  for (int g = 0; g < buffer; ++g) second_map.mark_faulty(gap_start + g);
  const QubitLayout second =
      plan_zigzag_layout(second_map, 4, 3, gap_start + buffer, "exp1");

  PartitionPlan plan{map, {first, second}, buffer};
  if (!validate_partition(plan).empty())
    throw PlanError("bundled plan construction violated its own buffer rule");
  return plan;
}

}  // namespace mpsqd
