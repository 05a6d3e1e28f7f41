#pragma once

// JSON bindings for the library's value types, built on nlohmann::json.
// Every binding is a plain to_json/from_json pair so the types work directly
// with json j = value; and j.get<T>(). Field names are the snake_case member
// names; optional fields serialize as null. Deserialization validates through
// the same check_* routines the in-memory constructors use.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mpsqd/circuit.hpp"
#include "mpsqd/coupling.hpp"
#include "mpsqd/determinant.hpp"
#include "mpsqd/errors.hpp"
#include "mpsqd/fcidump.hpp"
#include "mpsqd/layout.hpp"
#include "mpsqd/sample_set.hpp"
#include "mpsqd/sampler.hpp"
#include "mpsqd/sqd.hpp"
#include "mpsqd/stats.hpp"

namespace mpsqd {

namespace detail {

// Wraps nlohmann's type errors in the library's input-error type so CLI
// callers see one failure domain for malformed files.
template <typename T>
T get_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key))
    throw InputError(std::string("missing JSON field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad JSON field '") + key + "': " + e.what());
  }
}

}  // namespace detail

// ---- SampleSet --------------------------------------------------------

inline void to_json(nlohmann::json& j, const SampleSet& s) {
  j = nlohmann::json{{"label", s.label}, {"shots", s.shots}, {"counts", s.counts}};
}

inline void from_json(const nlohmann::json& j, SampleSet& s) {
  s.label = detail::get_field<std::string>(j, "label");
  s.shots = detail::get_field<long long>(j, "shots");
  s.counts = detail::get_field<std::map<std::string, long long>>(j, "counts");
}

// ---- NoiseModel -------------------------------------------------------

inline void to_json(nlohmann::json& j, const NoiseModel& n) {
  j = nlohmann::json{{"p_readout", n.p_readout},
                     {"p_xtalk", n.p_xtalk},
                     {"xtalk_decay", n.xtalk_decay},
                     {"xtalk_max_hops", n.xtalk_max_hops}};
}

inline void from_json(const nlohmann::json& j, NoiseModel& n) {
  n.p_readout = detail::get_field<double>(j, "p_readout");
  n.p_xtalk = detail::get_field<double>(j, "p_xtalk");
  n.xtalk_decay = detail::get_field<double>(j, "xtalk_decay");
  n.xtalk_max_hops = detail::get_field<int>(j, "xtalk_max_hops");
  check_noise(n);
}

// ---- SqdConfig --------------------------------------------------------

inline void to_json(nlohmann::json& j, const SqdConfig& c) {
  j = nlohmann::json{{"n_batches", c.n_batches},
                     {"batch_size", c.batch_size},
                     {"max_iterations", c.max_iterations},
                     {"energy_tol", c.energy_tol},
                     {"occupancy_tol", c.occupancy_tol},
                     {"carryover_threshold", c.carryover_threshold},
                     {"extsqd_ci_threshold", c.extsqd_ci_threshold},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, SqdConfig& c) {
  SqdConfig defaults;
  c.n_batches = j.value("n_batches", defaults.n_batches);
  c.batch_size = j.value("batch_size", defaults.batch_size);
  c.max_iterations = j.value("max_iterations", defaults.max_iterations);
  c.energy_tol = j.value("energy_tol", defaults.energy_tol);
  c.occupancy_tol = j.value("occupancy_tol", defaults.occupancy_tol);
  c.carryover_threshold = j.value("carryover_threshold", defaults.carryover_threshold);
  c.extsqd_ci_threshold = j.value("extsqd_ci_threshold", defaults.extsqd_ci_threshold);
  c.seed = j.value("seed", defaults.seed);
  check_config(c);
}

// ---- CouplingMap ------------------------------------------------------

inline void to_json(nlohmann::json& j, const CouplingMap& m) {
  std::vector<int> faulty;
  for (int q = 0; q < m.num_qubits(); ++q)
    if (m.is_faulty(q)) faulty.push_back(q);
  j = nlohmann::json{
      {"num_qubits", m.num_qubits()}, {"edges", m.edges()}, {"faulty", faulty}};
}

inline void from_json(const nlohmann::json& j, CouplingMap& m) {
  m = CouplingMap(detail::get_field<int>(j, "num_qubits"));
  for (const auto& e : detail::get_field<std::vector<std::pair<int, int>>>(j, "edges"))
    m.add_edge(e.first, e.second);
  if (j.contains("faulty"))
    for (int q : detail::get_field<std::vector<int>>(j, "faulty")) m.mark_faulty(q);
}

// ---- QubitLayout / PartitionPlan / Violation --------------------------

inline void to_json(nlohmann::json& j, const QubitLayout& l) {
  j = nlohmann::json{{"label", l.label},
                     {"system_qubits", l.system_qubits},
                     {"ancilla_qubits", l.ancilla_qubits}};
}

inline void from_json(const nlohmann::json& j, QubitLayout& l) {
  l.label = detail::get_field<std::string>(j, "label");
  l.system_qubits = detail::get_field<std::vector<int>>(j, "system_qubits");
  l.ancilla_qubits = detail::get_field<std::vector<int>>(j, "ancilla_qubits");
}

inline void to_json(nlohmann::json& j, const PartitionPlan& p) {
  j = nlohmann::json{
      {"map", p.map}, {"layouts", p.layouts}, {"min_buffer", p.min_buffer}};
}

inline void from_json(const nlohmann::json& j, PartitionPlan& p) {
  p.map = detail::get_field<CouplingMap>(j, "map");
  p.layouts = detail::get_field<std::vector<QubitLayout>>(j, "layouts");
  p.min_buffer = j.value("min_buffer", 1);
  for (const QubitLayout& l : p.layouts) check_layout(p.map, l);
}

inline void to_json(nlohmann::json& j, const Violation& v) {
  j = nlohmann::json{
      {"kind", v.kind == Violation::Kind::overlap ? "overlap" : "distance"},
      {"label_a", v.label_a},
      {"label_b", v.label_b},
      {"qubit_a", v.qubit_a},
      {"qubit_b", v.qubit_b},
      {"distance", v.distance},
      {"required", v.required},
      {"message", describe(v)}};
}

// ---- Circuits ---------------------------------------------------------

inline void to_json(nlohmann::json& j, const Gate& g) {
  j = nlohmann::json{{"name", g.name}, {"qubits", g.qubits}};
  if (g.angle) j["angle"] = *g.angle;
}

inline void from_json(const nlohmann::json& j, Gate& g) {
  g.name = detail::get_field<std::string>(j, "name");
  g.qubits = detail::get_field<std::vector<int>>(j, "qubits");
  g.angle = j.contains("angle") && !j.at("angle").is_null()
                ? std::optional<double>(detail::get_field<double>(j, "angle"))
                : std::nullopt;
}

inline void to_json(nlohmann::json& j, const ClassicalRegister& r) {
  j = nlohmann::json{{"label", r.label}, {"size", r.size}};
}

inline void from_json(const nlohmann::json& j, ClassicalRegister& r) {
  r.label = detail::get_field<std::string>(j, "label");
  r.size = detail::get_field<int>(j, "size");
}

inline void to_json(nlohmann::json& j, const Measurement& m) {
  j = nlohmann::json{
      {"qubit", m.qubit}, {"register", m.register_label}, {"bit", m.bit}};
}

inline void from_json(const nlohmann::json& j, Measurement& m) {
  m.qubit = detail::get_field<int>(j, "qubit");
  m.register_label = detail::get_field<std::string>(j, "register");
  m.bit = detail::get_field<int>(j, "bit");
}

inline void to_json(nlohmann::json& j, const AbstractCircuit& c) {
  j = nlohmann::json{{"qubits", c.qubits},
                     {"gates", c.gates},
                     {"registers", c.registers},
                     {"measurements", c.measurements}};
}

inline void from_json(const nlohmann::json& j, AbstractCircuit& c) {
  c.qubits = detail::get_field<std::vector<int>>(j, "qubits");
  c.gates = detail::get_field<std::vector<Gate>>(j, "gates");
  c.registers = detail::get_field<std::vector<ClassicalRegister>>(j, "registers");
  c.measurements = detail::get_field<std::vector<Measurement>>(j, "measurements");
  check_circuit(c);
}

// ---- FermionHamiltonian -----------------------------------------------
// Canonical sparse form: one-body entries with p >= q, two-body entries with
// (pq) >= (rs) in the flattened pair order and p >= q, r >= s; zeros omitted.

inline void to_json(nlohmann::json& j, const FermionHamiltonian& h) {
  nlohmann::json one = nlohmann::json::array();
  for (int p = 0; p < h.norb(); ++p)
    for (int q = 0; q <= p; ++q)
      if (h.one(p, q) != 0.0) one.push_back({p, q, h.one(p, q)});
  nlohmann::json two = nlohmann::json::array();
  for (int p = 0; p < h.norb(); ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r <= p; ++r)
        for (int s = 0; s <= r; ++s) {
          if (FermionHamiltonian::tri(r, s) > FermionHamiltonian::tri(p, q)) continue;
          if (h.two(p, q, r, s) != 0.0) two.push_back({p, q, r, s, h.two(p, q, r, s)});
        }
  j = nlohmann::json{{"norb", h.norb()},   {"n_alpha", h.n_alpha()},
                     {"n_beta", h.n_beta()}, {"e_core", h.e_core()},
                     {"one_body", one},      {"two_body", two}};
}

inline void from_json(const nlohmann::json& j, FermionHamiltonian& h) {
  h.init(detail::get_field<int>(j, "norb"), detail::get_field<int>(j, "n_alpha"),
         detail::get_field<int>(j, "n_beta"));
  h.set_e_core(j.value("e_core", 0.0));
  if (j.contains("one_body"))
    for (const auto& e : j.at("one_body")) {
      if (!e.is_array() || e.size() != 3)
        throw InputError("one_body entries must be [p, q, value]");
      h.set_one(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>());
    }
  if (j.contains("two_body"))
    for (const auto& e : j.at("two_body")) {
      if (!e.is_array() || e.size() != 5)
        throw InputError("two_body entries must be [p, q, r, s, value]");
      h.set_two(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>(),
                e.at(3).get<int>(), e.at(4).get<double>());
    }
}

// ---- SQD traces -------------------------------------------------------

inline void to_json(nlohmann::json& j, const IterationRecord& r) {
  j = nlohmann::json{{"iteration", r.iteration},
                     {"batch_energies", r.batch_energies},
                     {"e_min", r.e_min},
                     {"occupancies", r.occupancies},
                     {"batch_dims", r.batch_dims},
                     {"carryover_size", r.carryover_size}};
}

inline void from_json(const nlohmann::json& j, IterationRecord& r) {
  r.iteration = detail::get_field<int>(j, "iteration");
  r.batch_energies = detail::get_field<std::vector<double>>(j, "batch_energies");
  r.e_min = detail::get_field<double>(j, "e_min");
  r.occupancies = detail::get_field<std::vector<double>>(j, "occupancies");
  r.batch_dims = detail::get_field<std::vector<int>>(j, "batch_dims");
  r.carryover_size = detail::get_field<int>(j, "carryover_size");
}

inline void to_json(nlohmann::json& j, const SqdTrace& t) {
  std::vector<std::string> basis;
  basis.reserve(t.final_basis.size());
  for (const Determinant& d : t.final_basis)
    basis.push_back(encode_determinant(d, t.norb));
  j = nlohmann::json{{"norb", t.norb},
                     {"n_alpha", t.n_alpha},
                     {"n_beta", t.n_beta},
                     {"total_shots", t.total_shots},
                     {"physical_shots", t.physical_shots},
                     {"discarded", t.discarded},
                     {"iterations", t.iterations},
                     {"e_first", t.e_first},
                     {"e_last", t.e_last},
                     {"e_ext", t.e_ext ? nlohmann::json(*t.e_ext) : nlohmann::json()},
                     {"converged_reason", t.converged_reason},
                     {"final_basis", basis},
                     {"final_vector", t.final_vector}};
}

inline void from_json(const nlohmann::json& j, SqdTrace& t) {
  t.norb = detail::get_field<int>(j, "norb");
  t.n_alpha = detail::get_field<int>(j, "n_alpha");
  t.n_beta = detail::get_field<int>(j, "n_beta");
  t.total_shots = detail::get_field<long long>(j, "total_shots");
  t.physical_shots = detail::get_field<long long>(j, "physical_shots");
  t.discarded = detail::get_field<long long>(j, "discarded");
  t.iterations = detail::get_field<std::vector<IterationRecord>>(j, "iterations");
  t.e_first = detail::get_field<double>(j, "e_first");
  t.e_last = detail::get_field<double>(j, "e_last");
  t.e_ext = j.contains("e_ext") && !j.at("e_ext").is_null()
                ? std::optional<double>(j.at("e_ext").get<double>())
                : std::nullopt;
  t.converged_reason = detail::get_field<std::string>(j, "converged_reason");
  t.final_basis.clear();
  for (const auto& bits : detail::get_field<std::vector<std::string>>(j, "final_basis"))
    t.final_basis.push_back(decode_bitstring(bits, t.norb));
  t.final_vector = detail::get_field<std::vector<double>>(j, "final_vector");
}

inline void to_json(nlohmann::json& j, const ExtsqdResult& r) {
  j = nlohmann::json{{"e_ext", r.e_ext}, {"dimension", r.dimension}};
}

inline void from_json(const nlohmann::json& j, ExtsqdResult& r) {
  r.e_ext = detail::get_field<double>(j, "e_ext");
  r.dimension = detail::get_field<int>(j, "dimension");
}

// ---- StatsSummary -----------------------------------------------------

inline void to_json(nlohmann::json& j, const StatsSummary& s) {
  j = nlohmann::json{{"count", s.count},
                     {"mean", s.mean},
                     {"stddev", s.stddev},
                     {"min", s.minimum},
                     {"q1", s.q1},
                     {"median", s.median},
                     {"q3", s.q3},
                     {"max", s.maximum},
                     {"iqr", s.iqr},
                     {"whisker_low", s.whisker_low},
                     {"whisker_high", s.whisker_high},
                     {"outliers", s.outliers}};
}

inline void from_json(const nlohmann::json& j, StatsSummary& s) {
  s.count = detail::get_field<long long>(j, "count");
  s.mean = detail::get_field<double>(j, "mean");
  s.stddev = detail::get_field<double>(j, "stddev");
  s.minimum = detail::get_field<double>(j, "min");
  s.q1 = detail::get_field<double>(j, "q1");
  s.median = detail::get_field<double>(j, "median");
  s.q3 = detail::get_field<double>(j, "q3");
  s.maximum = detail::get_field<double>(j, "max");
  s.iqr = detail::get_field<double>(j, "iqr");
  s.whisker_low = detail::get_field<double>(j, "whisker_low");
  s.whisker_high = detail::get_field<double>(j, "whisker_high");
  s.outliers = detail::get_field<std::vector<double>>(j, "outliers");
}

}  // namespace mpsqd
