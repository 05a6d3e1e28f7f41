#pragma once

// Randomized-block experiment driver. Each replicate shuffles the order in
// which layout plans execute and, within each plan, the order of the two
// sampling modalities (parallel = all molecules sampled in one shot batch on
// the shared device with cross-talk; serial = each molecule sampled alone on
// the same geometry with cross-talk off). Every run's randomness comes from
// streams pre-derived off the master seed, so neither the schedule nor the
// thread count can change any number:
//
//   parallel job seed   StreamKey(master)("sample")(r)(plan_id).value()
//   serial sample seed  StreamKey(job_seed)(layout.label).value()
//                       -- the same stream the parallel run derives for that
//                          register, which makes serial and parallel samples
//                          byte-identical when p_xtalk = 0
//   sqd seed            StreamKey(master)("sqd")(r)(plan_id)(molecule).value()
//                       -- shared by both modalities on purpose
//   layout order        StreamKey(master)("layout-order")(r)
//   modality order      StreamKey(master)("modality-order")(r)(plan_id)
//
// Records are assembled in canonical order (replicate, plan in spec order,
// parallel before serial, molecule in spec order) regardless of the shuffled
// execution schedule; the schedule itself is returned alongside.
//
// Molecule i is assigned to layout slot i of every plan, so each plan must
// provide exactly one layout per molecule and each layout's system register
// must hold 2 * norb qubits.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mpsqd/eigensolver.hpp"
#include "mpsqd/errors.hpp"
#include "mpsqd/fcidump.hpp"
#include "mpsqd/layout.hpp"
#include "mpsqd/rng.hpp"
#include "mpsqd/sampler.hpp"
#include "mpsqd/serialize.hpp"
#include "mpsqd/sqd.hpp"
#include "mpsqd/stats.hpp"

namespace mpsqd {

struct RbdSpec {
  std::vector<std::pair<std::string, FermionHamiltonian>> molecules;  // label, system
  std::vector<std::pair<std::string, PartitionPlan>> plans;           // id, plan
  NoiseModel noise;
  SqdConfig sqd;  // per-run seeds are derived from master_seed; sqd.seed is ignored
  long long shots = 200000;
  int replicates = 10;
  std::uint64_t master_seed = 0;
};

inline void check_rbd_spec(const RbdSpec& spec) {
  if (spec.molecules.empty()) throw InputError("spec needs at least one molecule");
  if (spec.plans.empty()) throw InputError("spec needs at least one layout plan");
  if (spec.shots < 1) throw InputError("shots must be >= 1");
  if (spec.replicates < 1) throw InputError("replicates must be >= 1");
  check_noise(spec.noise);
  check_config(spec.sqd);
  std::set<std::string> labels;
  for (const auto& [label, ham] : spec.molecules) {
    if (!labels.insert(label).second)
      throw InputError("duplicate molecule label '" + label + "'");
    (void)ham;
  }
  std::set<std::string> ids;
  for (const auto& [id, plan] : spec.plans) {
    if (!ids.insert(id).second) throw InputError("duplicate plan id '" + id + "'");
    if (plan.layouts.size() != spec.molecules.size())
      throw InputError("plan '" + id + "' has " + std::to_string(plan.layouts.size()) +
                       " layouts for " + std::to_string(spec.molecules.size()) +
                       " molecules");
    for (std::size_t i = 0; i < plan.layouts.size(); ++i) {
      const std::size_t want = 2 * static_cast<std::size_t>(spec.molecules[i].second.norb());
      if (plan.layouts[i].system_qubits.size() != want)
        throw InputError("plan '" + id + "' layout '" + plan.layouts[i].label +
                         "' has " + std::to_string(plan.layouts[i].system_qubits.size()) +
                         " system qubits; molecule '" + spec.molecules[i].first +
                         "' needs " + std::to_string(want));
    }
  }
}

struct ReplicateSchedule {
  int replicate = 0;
  std::vector<std::string> layout_order;                 // plan ids, shuffled
  std::vector<std::vector<std::string>> modality_order;  // aligned with layout_order

  friend bool operator==(const ReplicateSchedule&, const ReplicateSchedule&) = default;
};

inline std::vector<ReplicateSchedule> make_schedule(const RbdSpec& spec) {
  check_rbd_spec(spec);
  const StreamKey root(spec.master_seed);
  std::vector<ReplicateSchedule> out;
  out.reserve(static_cast<std::size_t>(spec.replicates));
  for (int r = 0; r < spec.replicates; ++r) {
    ReplicateSchedule s;
    s.replicate = r;
    for (const auto& [id, plan] : spec.plans) s.layout_order.push_back(id);
    RngStream order_rng = root.with("layout-order").with(r).stream();
    order_rng.shuffle(s.layout_order);
    for (const std::string& id : s.layout_order) {
      std::vector<std::string> modalities = {"parallel", "serial"};
      RngStream m_rng = root.with("modality-order").with(r).with(id).stream();
      m_rng.shuffle(modalities);
      s.modality_order.push_back(modalities);
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct ReplicateRecord {
  int replicate = 0;
  std::string layout_id;
  std::string modality;  // "parallel" | "serial"
  std::string molecule;
  double e_first = 0.0;
  double e_last = 0.0;
  double e_ext = 0.0;
  double reference = 0.0;  // exact ground energy of the molecule
  double dev_first = 0.0;  // |e_first - reference| in kcal/mol
  double dev_last = 0.0;
  double dev_ext = 0.0;

  friend bool operator==(const ReplicateRecord&, const ReplicateRecord&) = default;
};

struct RbdResult {
  std::vector<ReplicateSchedule> schedule;
  std::vector<ReplicateRecord> records;  // canonical order

  friend bool operator==(const RbdResult&, const RbdResult&) = default;
};

namespace detail {

inline std::vector<ReplicateRecord> run_rbd_unit(
    const RbdSpec& spec, const std::vector<Wavefunction>& psis,
    const std::vector<double>& references, int r, std::size_t plan_index) {
  const auto& [plan_id, plan] = spec.plans[plan_index];
  const StreamKey master(spec.master_seed);
  const StreamKey sample_key = master.with("sample").with(r).with(plan_id);
  const std::uint64_t job_seed = sample_key.value();

  // Parallel: one joint job over the plan with cross-talk active.
  const std::vector<SampleSet> parallel =
      sample_parallel(psis, plan, spec.shots, spec.noise, job_seed);

  // Serial: same geometry and per-register streams, cross-talk off.
  NoiseModel serial_noise = spec.noise;
  serial_noise.p_xtalk = 0.0;
  std::vector<SampleSet> serial;
  serial.reserve(psis.size());
  for (std::size_t i = 0; i < psis.size(); ++i) {
    const std::string& label = plan.layouts[i].label;
    const std::uint64_t seed = StreamKey(job_seed).with(label).value();
    serial.push_back(sample_counts(psis[i], spec.shots, serial_noise, seed, label));
  }

  std::vector<ReplicateRecord> records;
  for (const std::string& modality : {std::string("parallel"), std::string("serial")}) {
    const std::vector<SampleSet>& samples = modality == "parallel" ? parallel : serial;
    for (std::size_t i = 0; i < spec.molecules.size(); ++i) {
      const auto& [mol_label, ham] = spec.molecules[i];
      SqdConfig cfg = spec.sqd;
      cfg.seed = master.with("sqd").with(r).with(plan_id).with(mol_label).value();
      const SqdTrace trace = sqd_run(ham, samples[i], cfg);
      const ExtsqdResult ext =
          extsqd_expand(ham, trace.final_basis, trace.final_vector, cfg);
      ReplicateRecord rec;
      rec.replicate = r;
      rec.layout_id = plan_id;
      rec.modality = modality;
      rec.molecule = mol_label;
      rec.e_first = trace.e_first;
      rec.e_last = trace.e_last;
      rec.e_ext = ext.e_ext;
      rec.reference = references[i];
      rec.dev_first = to_kcal_per_mol(std::fabs(rec.e_first - rec.reference));
      rec.dev_last = to_kcal_per_mol(std::fabs(rec.e_last - rec.reference));
      rec.dev_ext = to_kcal_per_mol(std::fabs(rec.e_ext - rec.reference));
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace detail

// Runs the full design. `threads` > 1 distributes the (replicate, plan)
// work units across that many workers; results are identical for any count.
inline RbdResult run_rbd(const RbdSpec& spec, int threads = 1) {
  check_rbd_spec(spec);
  if (threads < 1) throw InputError("threads must be >= 1");

  std::vector<Wavefunction> psis;
  std::vector<double> references;
  for (const auto& [label, ham] : spec.molecules) {
    const FciResult fci = fci_ground_state(ham);
    Wavefunction psi;
    psi.norb = ham.norb();
    for (const auto& [det, coeff] : fci.amplitudes) {
      psi.dets.push_back(det);
      psi.coeffs.push_back(coeff);
    }
    psis.push_back(std::move(psi));
    references.push_back(fci.energy);
  }

  const std::size_t units =
      static_cast<std::size_t>(spec.replicates) * spec.plans.size();
  std::vector<std::vector<ReplicateRecord>> slots(units);
  auto worker = [&](std::size_t first) {
    for (std::size_t u = first; u < units; u += static_cast<std::size_t>(threads)) {
      const int r = static_cast<int>(u / spec.plans.size());
      const std::size_t plan_index = u % spec.plans.size();
      slots[u] = detail::run_rbd_unit(spec, psis, references, r, plan_index);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::future<void>> futures;
    for (int t = 0; t < threads; ++t)
      futures.push_back(std::async(std::launch::async, worker, static_cast<std::size_t>(t)));
    for (auto& f : futures) f.get();  // propagates any worker exception
  }

  RbdResult result;
  result.schedule = make_schedule(spec);
  for (auto& unit : slots)
    for (auto& rec : unit) result.records.push_back(std::move(rec));
  return result;
}

// ---- Grouped summaries --------------------------------------------------

struct GroupSummary {
  std::string layout_id;
  std::string modality;
  std::string molecule;
  std::string checkpoint;  // "first" | "last" | "ext"
  StatsSummary stats;

  friend bool operator==(const GroupSummary&, const GroupSummary&) = default;
};

// One summary per (layout, modality, molecule) group and checkpoint, over the
// kcal/mol deviations, groups in first-appearance order of the records.
inline std::vector<GroupSummary> summarize_records(
    const std::vector<ReplicateRecord>& records) {
  if (records.empty()) throw InputError("cannot summarize an empty record set");
  std::vector<std::tuple<std::string, std::string, std::string>> keys;
  std::map<std::tuple<std::string, std::string, std::string>,
           std::vector<const ReplicateRecord*>>
      groups;
  for (const ReplicateRecord& rec : records) {
    const auto key = std::make_tuple(rec.layout_id, rec.modality, rec.molecule);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) keys.push_back(key);
    it->second.push_back(&rec);
  }
  std::vector<GroupSummary> out;
  for (const auto& key : keys) {
    const auto& members = groups.at(key);
    for (const std::string& checkpoint : {std::string("first"), std::string("last"),
                                          std::string("ext")}) {
      std::vector<double> values;
      values.reserve(members.size());
      for (const ReplicateRecord* rec : members)
        values.push_back(checkpoint == "first" ? rec->dev_first
                         : checkpoint == "last" ? rec->dev_last
                                                : rec->dev_ext);
      GroupSummary g;
      std::tie(g.layout_id, g.modality, g.molecule) = key;
      g.checkpoint = checkpoint;
      g.stats = summarize(values);
      out.push_back(std::move(g));
    }
  }
  return out;
}

// ---- CSV emission -------------------------------------------------------

namespace detail {

inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string records_to_csv(const std::vector<ReplicateRecord>& records) {
  std::string out =
      "replicate,layout,modality,molecule,e_first,e_last,e_ext,reference,"
      "dev_first_kcal,dev_last_kcal,dev_ext_kcal\n";
  for (const ReplicateRecord& r : records) {
    out += std::to_string(r.replicate) + ',' + r.layout_id + ',' + r.modality + ',' +
           r.molecule + ',' + detail::csv_double(r.e_first) + ',' +
           detail::csv_double(r.e_last) + ',' + detail::csv_double(r.e_ext) + ',' +
           detail::csv_double(r.reference) + ',' + detail::csv_double(r.dev_first) +
           ',' + detail::csv_double(r.dev_last) + ',' + detail::csv_double(r.dev_ext) +
           '\n';
  }
  return out;
}

inline std::string summaries_to_csv(const std::vector<GroupSummary>& groups) {
  std::string out =
      "layout,modality,molecule,checkpoint,count,mean,stddev,min,q1,median,q3,max,"
      "iqr,whisker_low,whisker_high,outliers\n";
  for (const GroupSummary& g : groups) {
    out += g.layout_id + ',' + g.modality + ',' + g.molecule + ',' + g.checkpoint +
           ',' + std::to_string(g.stats.count) + ',' + detail::csv_double(g.stats.mean) +
           ',' + detail::csv_double(g.stats.stddev) + ',' +
           detail::csv_double(g.stats.minimum) + ',' + detail::csv_double(g.stats.q1) +
           ',' + detail::csv_double(g.stats.median) + ',' +
           detail::csv_double(g.stats.q3) + ',' + detail::csv_double(g.stats.maximum) +
           ',' + detail::csv_double(g.stats.iqr) + ',' +
           detail::csv_double(g.stats.whisker_low) + ',' +
           detail::csv_double(g.stats.whisker_high) + ',';
    for (std::size_t i = 0; i < g.stats.outliers.size(); ++i) {
      if (i) out += ';';
      out += detail::csv_double(g.stats.outliers[i]);
    }
    out += '\n';
  }
  return out;
}

// ---- JSON bindings ------------------------------------------------------

inline void to_json(nlohmann::json& j, const ReplicateRecord& r) {
  j = nlohmann::json{{"replicate", r.replicate}, {"layout", r.layout_id},
                     {"modality", r.modality},   {"molecule", r.molecule},
                     {"e_first", r.e_first},     {"e_last", r.e_last},
                     {"e_ext", r.e_ext},         {"reference", r.reference},
                     {"dev_first_kcal", r.dev_first}, {"dev_last_kcal", r.dev_last},
                     {"dev_ext_kcal", r.dev_ext}};
}

inline void from_json(const nlohmann::json& j, ReplicateRecord& r) {
  r.replicate = detail::get_field<int>(j, "replicate");
  r.layout_id = detail::get_field<std::string>(j, "layout");
  r.modality = detail::get_field<std::string>(j, "modality");
  r.molecule = detail::get_field<std::string>(j, "molecule");
  r.e_first = detail::get_field<double>(j, "e_first");
  r.e_last = detail::get_field<double>(j, "e_last");
  r.e_ext = detail::get_field<double>(j, "e_ext");
  r.reference = detail::get_field<double>(j, "reference");
  r.dev_first = detail::get_field<double>(j, "dev_first_kcal");
  r.dev_last = detail::get_field<double>(j, "dev_last_kcal");
  r.dev_ext = detail::get_field<double>(j, "dev_ext_kcal");
}

inline void to_json(nlohmann::json& j, const ReplicateSchedule& s) {
  j = nlohmann::json{{"replicate", s.replicate},
                     {"layout_order", s.layout_order},
                     {"modality_order", s.modality_order}};
}

inline void from_json(const nlohmann::json& j, ReplicateSchedule& s) {
  s.replicate = detail::get_field<int>(j, "replicate");
  s.layout_order = detail::get_field<std::vector<std::string>>(j, "layout_order");
  s.modality_order =
      detail::get_field<std::vector<std::vector<std::string>>>(j, "modality_order");
}

inline void to_json(nlohmann::json& j, const GroupSummary& g) {
  j = nlohmann::json{{"layout", g.layout_id},
                     {"modality", g.modality},
                     {"molecule", g.molecule},
                     {"checkpoint", g.checkpoint},
                     {"stats", g.stats}};
}

inline void to_json(nlohmann::json& j, const RbdResult& r) {
  j = nlohmann::json{{"schedule", r.schedule}, {"records", r.records}};
}

inline void from_json(const nlohmann::json& j, RbdResult& r) {
  r.schedule = detail::get_field<std::vector<ReplicateSchedule>>(j, "schedule");
  r.records = detail::get_field<std::vector<ReplicateRecord>>(j, "records");
}

// ---- Spec files ---------------------------------------------------------
// Molecules: {"label": ..., "fcidump": path} | {"label", "hubbard": {sites,
// u, t, n_alpha, n_beta}} | {"label", "hamiltonian": inline}. Plans:
// {"id": ..., "hex_pair": {"buffer": 1..3}} | {"id", "plan_file": path} |
// {"id", "plan": inline}. Relative paths resolve against base_dir.

inline RbdSpec load_rbd_spec(const nlohmann::json& j,
                             const std::filesystem::path& base_dir) {
  RbdSpec spec;
  if (!j.contains("molecules") || !j.at("molecules").is_array())
    throw InputError("spec needs a 'molecules' array");
  for (const auto& m : j.at("molecules")) {
    const std::string label = detail::get_field<std::string>(m, "label");
    FermionHamiltonian ham;
    if (m.contains("fcidump")) {
      std::filesystem::path p = detail::get_field<std::string>(m, "fcidump");
      if (p.is_relative()) p = base_dir / p;
      ham = parse_fcidump_file(p.string());
    } else if (m.contains("hubbard")) {
      const auto& h = m.at("hubbard");
      ham = make_hubbard_chain(
          detail::get_field<int>(h, "sites"), detail::get_field<double>(h, "u"),
          detail::get_field<double>(h, "t"), detail::get_field<int>(h, "n_alpha"),
          detail::get_field<int>(h, "n_beta"));
    } else if (m.contains("hamiltonian")) {
      ham = m.at("hamiltonian").get<FermionHamiltonian>();
    } else {
      throw InputError("molecule '" + label +
                       "' needs one of: fcidump, hubbard, hamiltonian");
    }
    spec.molecules.emplace_back(label, std::move(ham));
  }
  if (!j.contains("plans") || !j.at("plans").is_array())
    throw InputError("spec needs a 'plans' array");
  for (const auto& p : j.at("plans")) {
    const std::string id = detail::get_field<std::string>(p, "id");
    PartitionPlan plan;
    if (p.contains("hex_pair")) {
      plan = hex_pair_plan(detail::get_field<int>(p.at("hex_pair"), "buffer"));
    } else if (p.contains("plan_file")) {
      std::filesystem::path path = detail::get_field<std::string>(p, "plan_file");
      if (path.is_relative()) path = base_dir / path;
      std::ifstream in(path);
      if (!in) throw InputError("cannot open plan file " + path.string());
      nlohmann::json pj;
      try {
        in >> pj;
      } catch (const nlohmann::json::exception& e) {
        throw InputError("bad JSON in " + path.string() + ": " + e.what());
      }
      plan = pj.get<PartitionPlan>();
    } else if (p.contains("plan")) {
      plan = p.at("plan").get<PartitionPlan>();
    } else {
      throw InputError("plan '" + id + "' needs one of: hex_pair, plan_file, plan");
    }
    spec.plans.emplace_back(id, std::move(plan));
  }
  if (j.contains("noise")) spec.noise = j.at("noise").get<NoiseModel>();
  if (j.contains("sqd")) spec.sqd = j.at("sqd").get<SqdConfig>();
  spec.shots = j.value("shots", spec.shots);
  spec.replicates = j.value("replicates", spec.replicates);
  spec.master_seed = j.value("master_seed", spec.master_seed);
  check_rbd_spec(spec);
  return spec;
}

}  // namespace mpsqd
