#pragma once

// Opaque gate-level circuits, composition of co-scheduled experiments onto a
// partition plan, near-identity rotation cleanup, and marginalization of
// composite measurement histograms back into per-experiment histograms.
//
// Gates are never interpreted: a gate is a name, an operand tuple, and an
// optional rotation angle. Composition unions subcircuits without remapping
// or routing.
//
// Composite key convention: classical registers concatenate in layout order
// with the FIRST register in the LEAST-significant block. A printed
// composite key of width W (most-significant bit leftmost) therefore shows
// register i of size S at offset O = sum of earlier sizes, occupying
// characters [W - O - S, W - O). Within a register, bit b of the register is
// character S - 1 - b of its chunk.

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mpsqd/errors.hpp"
#include "mpsqd/layout.hpp"
#include "mpsqd/sample_set.hpp"

namespace mpsqd {

struct Gate {
  std::string name;
  std::vector<int> qubits;
  std::optional<double> angle;  // set iff this is a rotation gate

  friend bool operator==(const Gate&, const Gate&) = default;
};

struct ClassicalRegister {
  std::string label;
  int size = 0;

  friend bool operator==(const ClassicalRegister&, const ClassicalRegister&) = default;
};

struct Measurement {
  int qubit = -1;
  std::string register_label;
  int bit = -1;  // register bit index, 0 = least significant

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct AbstractCircuit {
  std::vector<int> qubits;  // physical ids in use
  std::vector<Gate> gates;
  std::vector<ClassicalRegister> registers;  // order defines composite blocks
  std::vector<Measurement> measurements;

  friend bool operator==(const AbstractCircuit&, const AbstractCircuit&) = default;
};

inline int total_measured_bits(const AbstractCircuit& c) {
  int width = 0;
  for (const auto& r : c.registers) width += r.size;
  return width;
}

// Structural invariants: distinct qubit ids; gate operands within the used
// qubits; each measured qubit mapped to exactly one register bit; register
// sizes equal to their measurement counts. Throws InputError on violation.
inline void check_circuit(const AbstractCircuit& c) {
  std::set<int> ids(c.qubits.begin(), c.qubits.end());
  if (ids.size() != c.qubits.size()) throw InputError("circuit repeats a qubit id");
  for (const Gate& g : c.gates) {
    if (g.name.empty()) throw InputError("gate without a name");
    if (g.qubits.empty()) throw InputError("gate '" + g.name + "' has no operands");
    for (int q : g.qubits)
      if (!ids.count(q))
        throw InputError("gate '" + g.name + "' touches unknown qubit " + std::to_string(q));
  }
  std::map<std::string, int> reg_size;
  for (const auto& r : c.registers) {
    if (r.size < 1) throw InputError("register '" + r.label + "' must hold at least one bit");
    if (!reg_size.emplace(r.label, r.size).second)
      throw InputError("duplicate register label '" + r.label + "'");
  }
  std::set<int> measured;
  std::set<std::pair<std::string, int>> slots;
  std::map<std::string, int> per_register;
  for (const auto& m : c.measurements) {
    if (!ids.count(m.qubit))
      throw InputError("measurement on unknown qubit " + std::to_string(m.qubit));
    if (!measured.insert(m.qubit).second)
      throw InputError("qubit " + std::to_string(m.qubit) + " measured twice");
    auto it = reg_size.find(m.register_label);
    if (it == reg_size.end())
      throw InputError("measurement into unknown register '" + m.register_label + "'");
    if (m.bit < 0 || m.bit >= it->second)
      throw InputError("register '" + m.register_label + "' bit " +
                       std::to_string(m.bit) + " out of range");
    if (!slots.insert({m.register_label, m.bit}).second)
      throw InputError("register '" + m.register_label + "' bit " +
                       std::to_string(m.bit) + " written twice");
    ++per_register[m.register_label];
  }
  for (const auto& [label, size] : reg_size)
    if (per_register[label] != size)
      throw InputError("register '" + label + "' has " +
                       std::to_string(per_register[label]) + " measurements for " +
                       std::to_string(size) + " bits");
}

// Measurement-only circuit for one experiment: measures the layout's system
// qubits, in order, into a register named after the layout (system qubit i
// -> register bit i). Ancillas are placed but carry no measurement.
inline AbstractCircuit measurement_circuit(const QubitLayout& layout) {
  AbstractCircuit c;
  c.qubits = layout_qubits(layout);
  c.registers.push_back({layout.label, static_cast<int>(layout.system_qubits.size())});
  for (std::size_t i = 0; i < layout.system_qubits.size(); ++i)
    c.measurements.push_back(
        {layout.system_qubits[i], layout.label, static_cast<int>(i)});
  check_circuit(c);
  return c;
}

// Unions subcircuits onto a validated plan: subs[i] pairs with
// plan.layouts[i]. Gate order is layout order, then original order. Each
// subcircuit must carry exactly one register named after its layout, touch
// only its layout's qubits, and measure only system qubits.
inline AbstractCircuit compose_experiments(const std::vector<AbstractCircuit>& subs,
                                           const PartitionPlan& plan) {
  if (subs.empty()) throw InputError("nothing to compose");
  if (subs.size() != plan.layouts.size())
    throw InputError("expected one subcircuit per layout");
  {
    std::set<std::string> labels;
    for (const auto& layout : plan.layouts)
      if (!labels.insert(layout.label).second)
        throw InputError("duplicate experiment label '" + layout.label + "'");
  }
  const std::vector<Violation> violations = validate_partition(plan);
  if (!violations.empty())
    throw PlanError("plan fails validation (" + std::to_string(violations.size()) +
                    " violations; first: " + describe(violations.front()) + ")");

  AbstractCircuit out;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const QubitLayout& layout = plan.layouts[i];
    check_layout(plan.map, layout);
    const AbstractCircuit& sub = subs[i];
    check_circuit(sub);
    if (sub.registers.size() != 1)
      throw InputError("subcircuit '" + layout.label +
                       "' must carry exactly one classical register");
    if (sub.registers[0].label != layout.label)
      throw InputError("register label '" + sub.registers[0].label +
                       "' does not match layout label '" + layout.label + "'");
    std::set<int> allowed(layout.system_qubits.begin(), layout.system_qubits.end());
    const std::set<int> system = allowed;
    allowed.insert(layout.ancilla_qubits.begin(), layout.ancilla_qubits.end());
    for (int q : sub.qubits)
      if (!allowed.count(q))
        throw PlanError("subcircuit '" + layout.label + "' touches qubit " +
                        std::to_string(q) + " outside its layout");
    for (const auto& m : sub.measurements)
      if (!system.count(m.qubit))
        throw PlanError("subcircuit '" + layout.label + "' measures non-system qubit " +
                        std::to_string(m.qubit));
    for (int q : layout_qubits(layout)) out.qubits.push_back(q);
    out.gates.insert(out.gates.end(), sub.gates.begin(), sub.gates.end());
    out.registers.push_back(sub.registers[0]);
    out.measurements.insert(out.measurements.end(), sub.measurements.begin(),
                            sub.measurements.end());
  }
  check_circuit(out);
  return out;
}

// True when the angle is within tol of a multiple of 2*pi.
inline bool negligible_rotation(double angle, double tol) {
  return std::fabs(std::remainder(angle, 2.0 * std::numbers::pi)) <= tol;
}

// Drops rotation gates whose angle is a multiple of 2*pi within angle_tol and
// folds maximal runs of consecutive rotations with identical name and operand
// tuple into one gate with the summed angle. Runs to a fixpoint, so folded
// runs that become near-identity are dropped too. Gates without an angle are
// never touched and never folded across.
inline AbstractCircuit peephole_simplify(const AbstractCircuit& circuit,
                                         double angle_tol = 1e-8) {
  if (angle_tol < 0) throw InputError("negative angle tolerance");
  AbstractCircuit out = circuit;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Gate> next;
    next.reserve(out.gates.size());
    for (const Gate& g : out.gates) {
      if (g.angle.has_value() && negligible_rotation(*g.angle, angle_tol)) {
        changed = true;
        continue;
      }
      if (!next.empty()) {
        Gate& prev = next.back();
        if (prev.angle.has_value() && g.angle.has_value() && prev.name == g.name &&
            prev.qubits == g.qubits) {
          prev.angle = *prev.angle + *g.angle;
          changed = true;
          continue;
        }
      }
      next.push_back(g);
    }
    out.gates = std::move(next);
  }
  return out;
}

// Marginalizes a composite histogram into one histogram per register, in
// register order. Every composite key must be a 0/1 string exactly as wide
// as the circuit's total measured bits; each output sums to the input total.
inline std::vector<SampleSet> split_results(const SampleSet& composite,
                                            const AbstractCircuit& circuit) {
  check_circuit(circuit);
  const int width = total_measured_bits(circuit);
  std::vector<SampleSet> out;
  out.reserve(circuit.registers.size());
  for (const auto& r : circuit.registers)
    out.push_back(SampleSet{r.label, composite.shots, {}});
  for (const auto& [key, count] : composite.counts) {
    if (static_cast<int>(key.size()) != width) {
      char msg[128];
      std::snprintf(msg, sizeof msg,
                    "composite key of width %zu does not match the %d measured bits",
                    key.size(), width);
      throw InputError(msg);
    }
    for (char ch : key)
      if (ch != '0' && ch != '1')
        throw InputError("composite key holds a character other than 0/1");
    if (count < 0) throw InputError("negative count in composite histogram");
    int offset = 0;
    for (std::size_t i = 0; i < circuit.registers.size(); ++i) {
      const int size = circuit.registers[i].size;
      out[i].counts[key.substr(static_cast<std::size_t>(width - offset - size),
                               static_cast<std::size_t>(size))] += count;
      offset += size;
    }
  }
  return out;
}

}  // namespace mpsqd
