// Coupling maps, zig-zag layout planning, partition validation, circuit
// composition, peephole cleanup, and result splitting.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mpsqd/circuit.hpp"
#include "mpsqd/coupling.hpp"
#include "mpsqd/errors.hpp"
#include "mpsqd/layout.hpp"
#include "mpsqd/rng.hpp"

namespace {

using mpsqd::AbstractCircuit;
using mpsqd::CouplingMap;
using mpsqd::Gate;
using mpsqd::InputError;
using mpsqd::PartitionPlan;
using mpsqd::PlanError;
using mpsqd::QubitLayout;
using mpsqd::SampleSet;
using mpsqd::Violation;

// Independent all-pairs shortest-path oracle.
std::vector<std::vector<int>> floyd_warshall(const CouplingMap& map, int inf) {
  const int n = map.num_qubits();
  std::vector<std::vector<int>> d(static_cast<std::size_t>(n),
                                  std::vector<int>(static_cast<std::size_t>(n), inf));
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0;
  for (const auto& [u, v] : map.edges()) {
    d[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
    d[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::min(
            d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
            d[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                d[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
  return d;
}

std::set<std::pair<int, int>> edge_set(const CouplingMap& map) {
  return {map.edges().begin(), map.edges().end()};
}

std::vector<int> iota_vec(int first, int count) {
  std::vector<int> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = first + i;
  return v;
}

TEST(CouplingMap, RejectsBadEdgesAndIds) {
  EXPECT_THROW(CouplingMap(0), InputError);
  CouplingMap map(3);
  map.add_edge(0, 1);
  EXPECT_THROW(map.add_edge(1, 1), InputError);   // self-loop
  EXPECT_THROW(map.add_edge(1, 0), InputError);   // duplicate (reversed)
  EXPECT_THROW(map.add_edge(0, 3), InputError);   // out of range
  EXPECT_THROW(map.neighbors(-1), InputError);
  EXPECT_THROW(mpsqd::graph_distance(map, 0, 5), InputError);
}

TEST(CouplingMap, SingleRowIsAPath) {
  const CouplingMap map = mpsqd::heavy_hex_map(1, 5);
  EXPECT_EQ(map.num_qubits(), 5);
  const std::set<std::pair<int, int>> want{{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  EXPECT_EQ(edge_set(map), want);
  EXPECT_EQ(mpsqd::graph_distance(map, 0, 4), 4);
  EXPECT_EQ(mpsqd::graph_distance(map, 2, 2), 0);
  EXPECT_EQ(mpsqd::graph_distance(map, 1, 2), 1);
}

TEST(CouplingMap, FrozenThreeByNineConstruction) {
  // Hand-enumerated: 27 row qubits; bridges between rows 0-1 at columns
  // 0,4,8 (ids 27,28,29) and rows 1-2 at columns 2,6 (ids 30,31).
  const CouplingMap map = mpsqd::heavy_hex_map(3, 9);
  EXPECT_EQ(map.num_qubits(), 32);
  EXPECT_EQ(map.edges().size(), 34u);

  std::set<std::pair<int, int>> want;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c + 1 < 9; ++c) want.insert({r * 9 + c, r * 9 + c + 1});
  const std::vector<std::pair<int, std::pair<int, int>>> bridges{
      {27, {0, 9}}, {28, {4, 13}}, {29, {8, 17}}, {30, {11, 20}}, {31, {15, 24}}};
  for (const auto& [bridge, ends] : bridges) {
    want.insert({std::min(bridge, ends.first), std::max(bridge, ends.first)});
    want.insert({std::min(bridge, ends.second), std::max(bridge, ends.second)});
  }
  EXPECT_EQ(edge_set(map), want);
}

TEST(CouplingMap, MaxDegreeThreeAndConnected) {
  const std::vector<std::pair<int, int>> sizes{{1, 2}, {2, 2}, {3, 3}, {3, 9},
                                               {3, 19}, {4, 17}, {5, 12}};
  for (const auto& [rows, cols] : sizes) {
    const CouplingMap map = mpsqd::heavy_hex_map(rows, cols);
    for (int q = 0; q < map.num_qubits(); ++q) {
      EXPECT_LE(map.degree(q), 3) << rows << "x" << cols << " qubit " << q;
      EXPECT_GE(mpsqd::graph_distance(map, 0, q), 0)
          << rows << "x" << cols << " disconnected at " << q;
    }
  }
}

TEST(CouplingMap, SizeGuards) {
  EXPECT_THROW(mpsqd::heavy_hex_map(0, 5), InputError);
  EXPECT_THROW(mpsqd::heavy_hex_map(1, 1), InputError);
  EXPECT_THROW(mpsqd::heavy_hex_map(3, 2), InputError);  // odd-row bridges need col 2
  EXPECT_NO_THROW(mpsqd::heavy_hex_map(2, 2));
}

TEST(CouplingMap, DistanceMatchesFloydWarshallOracle) {
  const int inf = 1 << 20;
  for (const auto& [rows, cols] : std::vector<std::pair<int, int>>{{3, 9}, {2, 6}}) {
    const CouplingMap map = mpsqd::heavy_hex_map(rows, cols);
    const auto oracle = floyd_warshall(map, inf);
    for (int a = 0; a < map.num_qubits(); ++a)
      for (int b = 0; b < map.num_qubits(); ++b) {
        const int got = mpsqd::graph_distance(map, a, b);
        const int want = oracle[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        EXPECT_EQ(got, want == inf ? -1 : want) << a << "," << b;
      }
  }

  // Random sparse graph, possibly disconnected.
  mpsqd::RngStream rng(mpsqd::StreamKey(99).with("graph").stream());
  CouplingMap map(14);
  std::set<std::pair<int, int>> chosen;
  for (int e = 0; e < 16; ++e) {
    const int u = static_cast<int>(rng.uniform_int(14));
    const int v = static_cast<int>(rng.uniform_int(14));
    if (u == v) continue;
    if (!chosen.insert({std::min(u, v), std::max(u, v)}).second) continue;
    map.add_edge(u, v);
  }
  const auto oracle = floyd_warshall(map, inf);
  for (int a = 0; a < 14; ++a)
    for (int b = 0; b < 14; ++b) {
      const int want = oracle[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      EXPECT_EQ(mpsqd::graph_distance(map, a, b), want == inf ? -1 : want);
    }
}

TEST(CouplingMap, DisconnectedPairsReportMinusOne) {
  CouplingMap map(4);
  map.add_edge(0, 1);
  map.add_edge(2, 3);
  EXPECT_EQ(mpsqd::graph_distance(map, 0, 3), -1);
  EXPECT_EQ(mpsqd::graph_distance(map, 0, 1), 1);
}

TEST(Layout, ZigzagOnPathFillsAscending) {
  const CouplingMap map = mpsqd::heavy_hex_map(1, 8);
  const QubitLayout layout = mpsqd::plan_zigzag_layout(map, 4, 0, 0, "p");
  EXPECT_EQ(layout.system_qubits, iota_vec(0, 8));
  EXPECT_TRUE(layout.ancilla_qubits.empty());
  EXPECT_EQ(layout.label, "p");
}

TEST(Layout, ZigzagFailsOverFromDeadEnd) {
  // Greedy from anchor 3 walks 3,2,1,0 and dies at length 4; the next
  // candidate anchor (0) admits the full chain.
  const CouplingMap map = mpsqd::heavy_hex_map(1, 8);
  const QubitLayout layout = mpsqd::plan_zigzag_layout(map, 4, 0, 3);
  EXPECT_EQ(layout.system_qubits, iota_vec(0, 8));
}

TEST(Layout, ZigzagAvoidsFaultyQubits) {
  CouplingMap map = mpsqd::heavy_hex_map(1, 8);
  map.mark_faulty(3);
  const QubitLayout layout = mpsqd::plan_zigzag_layout(map, 2, 0, 0);
  EXPECT_EQ(layout.system_qubits, iota_vec(4, 4));
}

TEST(Layout, ZigzagHeavyHexChainWithAncillas) {
  // Anchors 0..8 admit 8-qubit chains with at most two free attach points;
  // anchor 9 is the first whose chain (row 1, columns 0..7) offers three.
  const CouplingMap map = mpsqd::heavy_hex_map(3, 9);
  const QubitLayout layout = mpsqd::plan_zigzag_layout(map, 4, 3, 0, "hh");
  EXPECT_EQ(layout.system_qubits, iota_vec(9, 8));
  EXPECT_EQ(layout.ancilla_qubits, (std::vector<int>{30, 28, 31}));

  EXPECT_NO_THROW(mpsqd::check_layout(map, layout));
  for (std::size_t i = 0; i + 1 < layout.system_qubits.size(); ++i)
    EXPECT_EQ(mpsqd::graph_distance(map, layout.system_qubits[i],
                                    layout.system_qubits[i + 1]),
              1);
  for (int a : layout.ancilla_qubits) {
    int closest = map.num_qubits();
    for (int s : layout.system_qubits)
      closest = std::min(closest, mpsqd::graph_distance(map, a, s));
    EXPECT_EQ(closest, 1) << "ancilla " << a << " not adjacent to the chain";
  }
}

TEST(Layout, ZigzagAncillaShortageRaises) {
  const CouplingMap map = mpsqd::heavy_hex_map(1, 8);  // a path has no attach points
  try {
    mpsqd::plan_zigzag_layout(map, 2, 1, 0);
    FAIL() << "expected PlanError";
  } catch (const PlanError& e) {
    EXPECT_NE(std::string(e.what()).find("ancilla"), std::string::npos);
  }
}

TEST(Layout, ZigzagCapacityGuard) {
  const CouplingMap map = mpsqd::heavy_hex_map(1, 5);
  EXPECT_THROW(mpsqd::plan_zigzag_layout(map, 3, 0, 0), PlanError);
  EXPECT_THROW(mpsqd::plan_zigzag_layout(map, 2, 2, 0), PlanError);
  EXPECT_THROW(mpsqd::plan_zigzag_layout(map, 0, 0, 0), InputError);
  EXPECT_THROW(mpsqd::plan_zigzag_layout(map, 2, -1, 0), InputError);
  EXPECT_THROW(mpsqd::plan_zigzag_layout(map, 2, 0, 17), InputError);
}

TEST(Layout, CheckLayoutRejects) {
  CouplingMap map = mpsqd::heavy_hex_map(1, 6);
  map.mark_faulty(5);
  EXPECT_NO_THROW(mpsqd::check_layout(map, {"ok", {0, 1}, {2}}));
  EXPECT_THROW(mpsqd::check_layout(map, {"dup", {0, 1}, {1}}), InputError);
  EXPECT_THROW(mpsqd::check_layout(map, {"range", {0, 9}, {}}), InputError);
  EXPECT_THROW(mpsqd::check_layout(map, {"faulty", {4, 5}, {}}), InputError);
  EXPECT_THROW(mpsqd::check_layout(map, {"empty", {}, {}}), InputError);
}

TEST(Partition, OverlapViolationReported) {
  const CouplingMap map = mpsqd::heavy_hex_map(1, 10);
  const PartitionPlan plan{map, {{"a", {4, 5}, {}}, {"b", {5, 6}, {}}}, 0};
  const auto violations = mpsqd::validate_partition(plan);
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].kind, Violation::Kind::overlap);
  EXPECT_EQ(violations[0].qubit_a, 5);
  EXPECT_EQ(violations[0].label_a, "a");
  EXPECT_EQ(violations[0].label_b, "b");
}

TEST(Partition, DistanceViolationsFollowBufferRule) {
  const CouplingMap map = mpsqd::heavy_hex_map(1, 10);
  const QubitLayout a{"a", {0, 1}, {}};
  const QubitLayout adjacent{"b", {2, 3}, {}};
  const QubitLayout gapped{"b", {3, 4}, {}};

  // One idle qubit between the layouts means distance 2: buffer 1 holds.
  EXPECT_TRUE(mpsqd::validate_partition({map, {a, gapped}, 1}).empty());

  // Adjacent layouts violate buffer 1 (need distance >= 2) ...
  const auto violations = mpsqd::validate_partition({map, {a, adjacent}, 1});
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].kind, Violation::Kind::distance);
  EXPECT_EQ(violations[0].qubit_a, 1);
  EXPECT_EQ(violations[0].qubit_b, 2);
  EXPECT_EQ(violations[0].distance, 1);
  EXPECT_EQ(violations[0].required, 2);

  // ... but satisfy buffer 0 (disjointness plus distance >= 1).
  EXPECT_TRUE(mpsqd::validate_partition({map, {a, adjacent}, 0}).empty());
}

TEST(Partition, BundledPlansAreFrozenAndValid) {
  for (int buffer = 1; buffer <= 3; ++buffer) {
    const PartitionPlan plan = mpsqd::hex_pair_plan(buffer);
    EXPECT_EQ(plan.map.num_qubits(), 67);
    EXPECT_EQ(plan.map.edges().size(), 74u);
    EXPECT_EQ(plan.min_buffer, buffer);
    ASSERT_EQ(plan.layouts.size(), 2u);

    EXPECT_EQ(plan.layouts[0].label, "exp0");
    EXPECT_EQ(plan.layouts[0].system_qubits, iota_vec(19, 8));
    EXPECT_EQ(plan.layouts[0].ancilla_qubits, (std::vector<int>{62, 58, 63}));

    EXPECT_EQ(plan.layouts[1].label, "exp1");
    EXPECT_EQ(plan.layouts[1].system_qubits, iota_vec(27 + buffer, 8));
    const std::vector<std::vector<int>> expected_ancillas{
        {64, 60, 65}, {64, 60, 65}, {60, 65, 61}};
    EXPECT_EQ(plan.layouts[1].ancilla_qubits,
              expected_ancillas[static_cast<std::size_t>(buffer - 1)]);

    EXPECT_TRUE(mpsqd::validate_partition(plan).empty());

    int closest = plan.map.num_qubits();
    for (int qa : mpsqd::layout_qubits(plan.layouts[0]))
      for (int qb : mpsqd::layout_qubits(plan.layouts[1]))
        closest = std::min(closest, mpsqd::graph_distance(plan.map, qa, qb));
    EXPECT_EQ(closest, buffer + 1);
  }
  EXPECT_THROW(mpsqd::hex_pair_plan(0), InputError);
  EXPECT_THROW(mpsqd::hex_pair_plan(4), InputError);
}

TEST(Partition, BundledPlanCrossPairsWithinThreeHops) {
  // System-to-system pairs within three hops drive the cross-talk model;
  // freeze them per buffer: buffer 1 has one pair at distance 2 and two at
  // distance 3, buffer 2 one pair at distance 3, buffer 3 none.
  using PairMap = std::map<std::pair<int, int>, int>;
  const std::vector<PairMap> expected{
      {{{26, 28}, 2}, {{25, 28}, 3}, {{26, 29}, 3}},
      {{{26, 29}, 3}},
      {}};
  for (int buffer = 1; buffer <= 3; ++buffer) {
    const PartitionPlan plan = mpsqd::hex_pair_plan(buffer);
    PairMap got;
    for (int qa : plan.layouts[0].system_qubits)
      for (int qb : plan.layouts[1].system_qubits) {
        const int d = mpsqd::graph_distance(plan.map, qa, qb);
        if (d >= 0 && d <= 3) got[{qa, qb}] = d;
      }
    EXPECT_EQ(got, expected[static_cast<std::size_t>(buffer - 1)]) << "buffer " << buffer;
  }
}

TEST(Partition, PerturbedBundledPlanYieldsExactlyOneViolation) {
  PartitionPlan plan = mpsqd::hex_pair_plan(1);
  plan.layouts[0].system_qubits.back() = 27;  // move the chain end into the gap
  const auto violations = mpsqd::validate_partition(plan);
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].kind, Violation::Kind::distance);
  EXPECT_EQ(violations[0].qubit_a, 27);
  EXPECT_EQ(violations[0].qubit_b, 28);
  EXPECT_EQ(violations[0].distance, 1);
  EXPECT_EQ(violations[0].required, 2);
}

QubitLayout small_a() { return {"a", {0, 1}, {}}; }
QubitLayout small_b() { return {"b", {3, 4}, {}}; }

PartitionPlan small_plan() {
  return {mpsqd::heavy_hex_map(1, 7), {small_a(), small_b()}, 1};
}

TEST(Circuit, MeasurementCircuitShape) {
  const QubitLayout layout{"mol", {5, 6, 7, 8}, {11, 12}};
  CouplingMap map(13);
  for (int q = 5; q < 8; ++q) map.add_edge(q, q + 1);
  const AbstractCircuit c = mpsqd::measurement_circuit(layout);
  EXPECT_EQ(c.qubits, (std::vector<int>{5, 6, 7, 8, 11, 12}));
  ASSERT_EQ(c.registers.size(), 1u);
  EXPECT_EQ(c.registers[0].label, "mol");
  EXPECT_EQ(c.registers[0].size, 4);
  ASSERT_EQ(c.measurements.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(c.measurements[static_cast<std::size_t>(i)].qubit, 5 + i);
    EXPECT_EQ(c.measurements[static_cast<std::size_t>(i)].bit, i);
    EXPECT_EQ(c.measurements[static_cast<std::size_t>(i)].register_label, "mol");
  }
}

TEST(Circuit, CheckCircuitRejectsStructuralDefects) {
  AbstractCircuit base = mpsqd::measurement_circuit({"r", {0, 1}, {}});
  EXPECT_NO_THROW(mpsqd::check_circuit(base));

  AbstractCircuit bad = base;
  bad.gates.push_back({"x", {7}, {}});
  EXPECT_THROW(mpsqd::check_circuit(bad), InputError);  // operand off-circuit

  bad = base;
  bad.gates.push_back({"", {0}, {}});
  EXPECT_THROW(mpsqd::check_circuit(bad), InputError);  // unnamed gate

  bad = base;
  bad.measurements.push_back({0, "r", 1});
  EXPECT_THROW(mpsqd::check_circuit(bad), InputError);  // qubit measured twice

  bad = base;
  bad.measurements[1] = {1, "r", 5};
  EXPECT_THROW(mpsqd::check_circuit(bad), InputError);  // bit out of range

  bad = base;
  bad.measurements[1] = {1, "s", 0};
  EXPECT_THROW(mpsqd::check_circuit(bad), InputError);  // unknown register

  bad = base;
  bad.measurements.pop_back();
  EXPECT_THROW(mpsqd::check_circuit(bad), InputError);  // size/count mismatch

  bad = base;
  bad.registers.push_back({"r", 2});
  EXPECT_THROW(mpsqd::check_circuit(bad), InputError);  // duplicate register

  bad = base;
  bad.qubits.push_back(0);
  EXPECT_THROW(mpsqd::check_circuit(bad), InputError);  // repeated qubit id
}

TEST(Circuit, ComposeJoinsLayoutsInOrder) {
  const PartitionPlan plan = small_plan();
  const std::vector<AbstractCircuit> subs{mpsqd::measurement_circuit(plan.layouts[0]),
                                          mpsqd::measurement_circuit(plan.layouts[1])};
  const AbstractCircuit joint = mpsqd::compose_experiments(subs, plan);
  EXPECT_EQ(joint.qubits, (std::vector<int>{0, 1, 3, 4}));
  ASSERT_EQ(joint.registers.size(), 2u);
  EXPECT_EQ(joint.registers[0].label, "a");
  EXPECT_EQ(joint.registers[1].label, "b");
  EXPECT_EQ(mpsqd::total_measured_bits(joint), 4);
  EXPECT_EQ(joint.measurements.size(), 4u);

  // Two 8-qubit experiments with three ancillas each occupy 22 qubits.
  const PartitionPlan pair = mpsqd::hex_pair_plan(1);
  const AbstractCircuit big = mpsqd::compose_experiments(
      {mpsqd::measurement_circuit(pair.layouts[0]), mpsqd::measurement_circuit(pair.layouts[1])},
      pair);
  EXPECT_EQ(big.qubits.size(), 22u);
  ASSERT_EQ(big.registers.size(), 2u);
  EXPECT_EQ(big.registers[0].size, 8);
  EXPECT_EQ(big.registers[1].size, 8);
}

TEST(Circuit, ComposeRejectsDuplicateLabels) {
  PartitionPlan plan = small_plan();
  plan.layouts[1].label = "a";
  AbstractCircuit sub0 = mpsqd::measurement_circuit(plan.layouts[0]);
  AbstractCircuit sub1 = mpsqd::measurement_circuit(plan.layouts[1]);
  EXPECT_THROW(mpsqd::compose_experiments({sub0, sub1}, plan), InputError);
}

TEST(Circuit, ComposeRejectsLayoutMismatch) {
  const PartitionPlan plan = small_plan();
  std::vector<AbstractCircuit> subs{mpsqd::measurement_circuit(plan.layouts[0]),
                                    mpsqd::measurement_circuit(plan.layouts[1])};
  subs[0].qubits.push_back(2);
  subs[0].gates.push_back({"x", {2}, {}});
  EXPECT_THROW(mpsqd::compose_experiments(subs, plan), PlanError);

  // A measurement on an ancilla qubit is also a layout mismatch.
  CouplingMap map = mpsqd::heavy_hex_map(1, 9);
  const QubitLayout with_anc{"a", {0, 1}, {2}};
  const QubitLayout other{"b", {4, 5}, {}};
  AbstractCircuit sub = mpsqd::measurement_circuit(with_anc);
  sub.registers[0].size = 3;
  sub.measurements.push_back({2, "a", 2});
  AbstractCircuit sub_b = mpsqd::measurement_circuit(other);
  EXPECT_THROW(mpsqd::compose_experiments({sub, sub_b}, {map, {with_anc, other}, 1}),
               PlanError);
}

TEST(Circuit, ComposeRejectsInvalidPlan) {
  PartitionPlan plan = small_plan();
  plan.layouts[1].system_qubits = {1, 2};  // overlaps and touches layout a
  const std::vector<AbstractCircuit> subs{mpsqd::measurement_circuit(plan.layouts[0]),
                                          mpsqd::measurement_circuit(plan.layouts[1])};
  EXPECT_THROW(mpsqd::compose_experiments(subs, plan), PlanError);
}

AbstractCircuit gate_bed(std::vector<Gate> gates) {
  AbstractCircuit c;
  c.qubits = {0, 1, 2, 3};
  c.gates = std::move(gates);
  return c;
}

TEST(Circuit, PeepholeRemovesNearIdentityRotations) {
  const double two_pi = 2.0 * std::numbers::pi;
  const AbstractCircuit c = gate_bed({{"rz", {0}, 1e-12},
                                      {"zz", {2, 3}, two_pi + 1e-12},
                                      {"rz", {1}, 0.0},
                                      {"x", {0}, {}},
                                      {"zz", {0, 1}, -2.0 * two_pi}});
  const AbstractCircuit simplified = mpsqd::peephole_simplify(c, 1e-8);
  ASSERT_EQ(simplified.gates.size(), 1u);
  EXPECT_EQ(simplified.gates[0].name, "x");

  // A rotation just above tolerance survives.
  const AbstractCircuit kept = mpsqd::peephole_simplify(gate_bed({{"rz", {0}, 1e-6}}), 1e-8);
  EXPECT_EQ(kept.gates.size(), 1u);
}

TEST(Circuit, PeepholeMergesAdjacentRuns) {
  AbstractCircuit folded =
      mpsqd::peephole_simplify(gate_bed({{"zz", {2, 3}, 0.3}, {"zz", {2, 3}, 0.5}}));
  ASSERT_EQ(folded.gates.size(), 1u);
  EXPECT_NEAR(*folded.gates[0].angle, 0.8, 1e-15);

  const AbstractCircuit separate =
      mpsqd::peephole_simplify(gate_bed({{"zz", {2, 3}, 0.3}, {"zz", {3, 2}, 0.5}}));
  EXPECT_EQ(separate.gates.size(), 2u);  // operand tuples differ

  const AbstractCircuit barrier = mpsqd::peephole_simplify(
      gate_bed({{"zz", {2, 3}, 0.3}, {"x", {2}, {}}, {"zz", {2, 3}, 0.5}}));
  EXPECT_EQ(barrier.gates.size(), 3u);  // non-rotation blocks the fold

  // A run folding to 2*pi disappears entirely, and removal can make the
  // neighbors adjacent so they fold too.
  const double pi = std::numbers::pi;
  const AbstractCircuit chain = mpsqd::peephole_simplify(gate_bed(
      {{"rz", {0}, 0.4}, {"rz", {0}, pi}, {"rz", {0}, pi}, {"rz", {0}, 0.6}}));
  ASSERT_EQ(chain.gates.size(), 1u);
  EXPECT_NEAR(*chain.gates[0].angle, 0.4 + 2.0 * pi + 0.6, 1e-12);
}

TEST(Circuit, PeepholeIsIdempotent) {
  mpsqd::RngStream rng(mpsqd::StreamKey(7).with("peephole").stream());
  const std::vector<std::vector<int>> tuples{{0}, {1}, {0, 1}, {2, 3}};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Gate> gates;
    const int n = 3 + static_cast<int>(rng.uniform_int(12));
    for (int i = 0; i < n; ++i) {
      const auto& qs = tuples[rng.uniform_int(tuples.size())];
      switch (rng.uniform_int(4)) {
        case 0: gates.push_back({"rz", qs, rng.uniform() * 8.0 - 4.0}); break;
        case 1: gates.push_back({"zz", qs, rng.uniform() * 8.0 - 4.0}); break;
        case 2: gates.push_back({"rz", qs, 2.0 * std::numbers::pi}); break;
        default: gates.push_back({"x", qs, {}}); break;
      }
    }
    const AbstractCircuit once = mpsqd::peephole_simplify(gate_bed(gates));
    const AbstractCircuit twice = mpsqd::peephole_simplify(once);
    EXPECT_EQ(once, twice);
  }
}

TEST(Circuit, SplitResultsWorkedExample) {
  const PartitionPlan plan = small_plan();
  const AbstractCircuit joint = mpsqd::compose_experiments(
      {mpsqd::measurement_circuit(plan.layouts[0]), mpsqd::measurement_circuit(plan.layouts[1])},
      plan);
  // First register sits in the least-significant (rightmost) block.
  const SampleSet composite{"joint", 7, {{"0110", 7}}};
  const std::vector<SampleSet> parts = mpsqd::split_results(composite, joint);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].label, "a");
  EXPECT_EQ(parts[0].counts, (std::map<std::string, long long>{{"10", 7}}));
  EXPECT_EQ(parts[1].label, "b");
  EXPECT_EQ(parts[1].counts, (std::map<std::string, long long>{{"01", 7}}));
  EXPECT_EQ(parts[0].shots, 7);
}

TEST(Circuit, SplitResultsPreservesTotals) {
  AbstractCircuit c;
  c.qubits = {0, 1, 2, 3, 4};
  c.registers = {{"lo", 2}, {"hi", 3}};
  c.measurements = {{0, "lo", 0}, {1, "lo", 1}, {2, "hi", 0}, {3, "hi", 1}, {4, "hi", 2}};

  mpsqd::RngStream rng(mpsqd::StreamKey(11).with("split").stream());
  SampleSet composite{"joint", 0, {}};
  for (int k = 0; k < 40; ++k) {
    std::string key;
    for (int b = 0; b < 5; ++b) key += rng.uniform_int(2) ? '1' : '0';
    composite.counts[key] += 1 + static_cast<long long>(rng.uniform_int(50));
  }
  composite.shots = mpsqd::total_counts(composite);

  const auto parts = mpsqd::split_results(composite, c);
  ASSERT_EQ(parts.size(), 2u);
  for (const auto& part : parts) {
    EXPECT_EQ(mpsqd::total_counts(part), composite.shots);
    for (const auto& [key, n] : part.counts) {
      EXPECT_EQ(key.size(), part.label == "lo" ? 2u : 3u);
      EXPECT_GT(n, 0);
    }
  }

  // Single register: identity.
  AbstractCircuit solo;
  solo.qubits = {0, 1};
  solo.registers = {{"only", 2}};
  solo.measurements = {{0, "only", 0}, {1, "only", 1}};
  const SampleSet in{"x", 5, {{"01", 2}, {"11", 3}}};
  const auto out = mpsqd::split_results(in, solo);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].counts, in.counts);
}

TEST(Circuit, SplitResultsRejectsBadKeys) {
  const PartitionPlan plan = small_plan();
  const AbstractCircuit joint = mpsqd::compose_experiments(
      {mpsqd::measurement_circuit(plan.layouts[0]), mpsqd::measurement_circuit(plan.layouts[1])},
      plan);
  EXPECT_THROW(mpsqd::split_results({"j", 1, {{"011", 1}}}, joint), InputError);
  EXPECT_THROW(mpsqd::split_results({"j", 1, {{"01100", 1}}}, joint), InputError);
  EXPECT_THROW(mpsqd::split_results({"j", 1, {{"01x0", 1}}}, joint), InputError);
  EXPECT_THROW(mpsqd::split_results({"j", 1, {{"0110", -1}}}, joint), InputError);
}

TEST(Circuit, ComposePermutationKeepsPerLabelResults) {
  // The same physical outcome encodes differently per register order, but the
  // per-label marginals agree.
  const CouplingMap map = mpsqd::heavy_hex_map(1, 7);
  const QubitLayout a = small_a();
  const QubitLayout b = small_b();
  const std::map<std::string, std::string> content{{"a", "10"}, {"b", "01"}};

  const PartitionPlan plan_ab{map, {a, b}, 1};
  const PartitionPlan plan_ba{map, {b, a}, 1};
  const AbstractCircuit joint_ab = mpsqd::compose_experiments(
      {mpsqd::measurement_circuit(a), mpsqd::measurement_circuit(b)}, plan_ab);
  const AbstractCircuit joint_ba = mpsqd::compose_experiments(
      {mpsqd::measurement_circuit(b), mpsqd::measurement_circuit(a)}, plan_ba);

  // First listed register is the least-significant block.
  const SampleSet counts_ab{"j", 7, {{content.at("b") + content.at("a"), 7}}};
  const SampleSet counts_ba{"j", 7, {{content.at("a") + content.at("b"), 7}}};

  std::map<std::string, std::map<std::string, long long>> by_label_ab, by_label_ba;
  for (const auto& part : mpsqd::split_results(counts_ab, joint_ab))
    by_label_ab[part.label] = part.counts;
  for (const auto& part : mpsqd::split_results(counts_ba, joint_ba))
    by_label_ba[part.label] = part.counts;
  EXPECT_EQ(by_label_ab, by_label_ba);
  EXPECT_EQ(by_label_ab.at("a").begin()->first, "10");
  EXPECT_EQ(by_label_ab.at("b").begin()->first, "01");
}

}  // namespace
