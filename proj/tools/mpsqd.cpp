// Command-line front end: every library stage is reachable as a subcommand
// with JSON files as the interchange format.
//
//   parse    FCIDUMP -> canonical Hamiltonian JSON
//   fci      exact lowest eigenpair of a Hamiltonian (energy + dimension)
//   sample   draw measurement counts from the exact ground state
//   sqd      iterative subspace diagonalization over a sample set
//   extsqd   singles expansion of a converged trace
//   plan     build heavy-hex partition plans or validate an existing one
//   compose  join per-layout measurement circuits into one program
//   split    marginalize composite counts back into per-register sets
//   rbd      full randomized-block experiment from a spec file
//   report   grouped deviation statistics from an rbd result
//
// Exit codes: 0 success, 2 bad input (including command-line errors),
// 3 eigensolver non-convergence, 4 placement/plan violations.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mpsqd/circuit.hpp"
#include "mpsqd/coupling.hpp"
#include "mpsqd/eigensolver.hpp"
#include "mpsqd/errors.hpp"
#include "mpsqd/fcidump.hpp"
#include "mpsqd/layout.hpp"
#include "mpsqd/rbd.hpp"
#include "mpsqd/rng.hpp"
#include "mpsqd/sampler.hpp"
#include "mpsqd/serialize.hpp"
#include "mpsqd/sqd.hpp"
#include "mpsqd/stats.hpp"

namespace {

using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mpsqd::InputError("cannot open " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw mpsqd::InputError("bad JSON in " + path + ": " + e.what());
  }
}

// Hamiltonians arrive either as FCIDUMP text or as the canonical JSON this
// tool emits; sniff the first non-space byte.
mpsqd::FermionHamiltonian load_hamiltonian(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw mpsqd::InputError("cannot open " + path);
  char c = '\0';
  probe >> std::ws;
  probe.get(c);
  if (c == '{') return load_json_file(path).get<mpsqd::FermionHamiltonian>();
  return mpsqd::parse_fcidump_file(path);
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw mpsqd::InputError("cannot write " + out_path);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

void write_json(const json& j, const std::string& out_path) {
  write_output(j.dump(2), out_path);
}

mpsqd::Wavefunction ground_wavefunction(const mpsqd::FermionHamiltonian& ham) {
  const mpsqd::FciResult fci = mpsqd::fci_ground_state(ham);
  mpsqd::Wavefunction psi;
  psi.norb = ham.norb();
  psi.dets.reserve(fci.amplitudes.size());
  psi.coeffs.reserve(fci.amplitudes.size());
  for (const auto& [det, coeff] : fci.amplitudes) {
    psi.dets.push_back(det);
    psi.coeffs.push_back(coeff);
  }
  return psi;
}

struct SqdFlags {
  int batches = 10;
  int batch_size = 3000;
  int max_iters = 5;
  double energy_tol = 1e-8;
  double occ_tol = 1e-5;
  double carryover = 1e-4;
  double ci_threshold = 1e-5;
  std::uint64_t seed = 0;

  mpsqd::SqdConfig to_config() const {
    mpsqd::SqdConfig cfg;
    cfg.n_batches = batches;
    cfg.batch_size = batch_size;
    cfg.max_iterations = max_iters;
    cfg.energy_tol = energy_tol;
    cfg.occupancy_tol = occ_tol;
    cfg.carryover_threshold = carryover;
    cfg.extsqd_ci_threshold = ci_threshold;
    cfg.seed = seed;
    return cfg;
  }
};

void add_sqd_flags(CLI::App* cmd, SqdFlags& f) {
  cmd->add_option("--seed", f.seed, "Stream-derivation seed");
  cmd->add_option("--batches", f.batches, "Subspace batches per iteration")
      ->default_val(10);
  cmd->add_option("--batch-size", f.batch_size, "Draws per batch")->default_val(3000);
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap")->default_val(5);
  cmd->add_option("--energy-tol", f.energy_tol, "Energy stop threshold (Hartree)")
      ->default_val(1e-8);
  cmd->add_option("--occ-tol", f.occ_tol, "Occupancy stop threshold")->default_val(1e-5);
  cmd->add_option("--carryover", f.carryover, "Carryover coefficient threshold")
      ->default_val(1e-4);
  cmd->add_option("--ci-threshold", f.ci_threshold,
                  "Expansion seed coefficient threshold")
      ->default_val(1e-5);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale multi-programmed subspace-diagonalization toolkit"};
  app.require_subcommand(1);

  // parse ------------------------------------------------------------------
  std::string parse_input, parse_out;
  CLI::App* parse_cmd = app.add_subcommand("parse", "FCIDUMP to canonical JSON");
  parse_cmd->add_option("fcidump", parse_input, "FCIDUMP file")->required();
  parse_cmd->add_option("--out", parse_out, "Output path (default stdout)");
  parse_cmd->callback([&] {
    write_json(mpsqd::parse_fcidump_file(parse_input), parse_out);
  });

  // fci --------------------------------------------------------------------
  std::string fci_input, fci_out;
  bool fci_amplitudes = false;
  CLI::App* fci_cmd = app.add_subcommand("fci", "Exact ground energy");
  fci_cmd->add_option("hamiltonian", fci_input, "FCIDUMP or Hamiltonian JSON")
      ->required();
  fci_cmd->add_option("--out", fci_out, "Output path (default stdout)");
  fci_cmd->add_flag("--amplitudes", fci_amplitudes, "Include the ground-state vector");
  fci_cmd->callback([&] {
    const mpsqd::FermionHamiltonian ham = load_hamiltonian(fci_input);
    const mpsqd::FciResult fci = mpsqd::fci_ground_state(ham);
    json j{{"energy", fci.energy},
           {"dimension", static_cast<long long>(fci.amplitudes.size())}};
    if (fci_amplitudes) {
      json amp = json::object();
      for (const auto& [det, coeff] : fci.amplitudes)
        amp[mpsqd::encode_determinant(det, ham.norb())] = coeff;
      j["amplitudes"] = amp;
    }
    write_json(j, fci_out);
  });

  // sample -----------------------------------------------------------------
  std::string sample_input, sample_out, sample_label = "exp";
  long long sample_shots = 200000;
  std::uint64_t sample_seed = 0;
  double sample_p_readout = 0.01;
  CLI::App* sample_cmd =
      app.add_subcommand("sample", "Measurement counts from the exact ground state");
  sample_cmd->add_option("hamiltonian", sample_input, "FCIDUMP or Hamiltonian JSON")
      ->required();
  sample_cmd->add_option("--shots", sample_shots, "Shot count")->default_val(200000);
  sample_cmd->add_option("--seed", sample_seed, "Stream-derivation seed");
  sample_cmd->add_option("--p-readout", sample_p_readout, "Per-bit readout flip rate")
      ->default_val(0.01);
  sample_cmd->add_option("--label", sample_label, "Sample-set label")->default_val("exp");
  sample_cmd->add_option("--out", sample_out, "Output path (default stdout)");
  sample_cmd->callback([&] {
    const mpsqd::FermionHamiltonian ham = load_hamiltonian(sample_input);
    mpsqd::NoiseModel noise = mpsqd::NoiseModel::none();
    noise.p_readout = sample_p_readout;
    const mpsqd::SampleSet counts = mpsqd::sample_counts(
        ground_wavefunction(ham), sample_shots, noise, sample_seed, sample_label);
    write_json(counts, sample_out);
  });

  // sqd --------------------------------------------------------------------
  std::string sqd_ham_path, sqd_samples_path, sqd_out;
  SqdFlags sqd_flags;
  CLI::App* sqd_cmd =
      app.add_subcommand("sqd", "Iterative subspace diagonalization over samples");
  sqd_cmd->add_option("hamiltonian", sqd_ham_path, "FCIDUMP or Hamiltonian JSON")
      ->required();
  sqd_cmd->add_option("samples", sqd_samples_path, "SampleSet JSON")->required();
  add_sqd_flags(sqd_cmd, sqd_flags);
  sqd_cmd->add_option("--out", sqd_out, "Output path (default stdout)");
  sqd_cmd->callback([&] {
    const mpsqd::FermionHamiltonian ham = load_hamiltonian(sqd_ham_path);
    const auto samples = load_json_file(sqd_samples_path).get<mpsqd::SampleSet>();
    const mpsqd::SqdTrace trace = mpsqd::sqd_run(ham, samples, sqd_flags.to_config());
    write_json(trace, sqd_out);
  });

  // extsqd -----------------------------------------------------------------
  std::string ext_ham_path, ext_trace_path, ext_out;
  double ext_ci_threshold = 1e-5;
  CLI::App* ext_cmd =
      app.add_subcommand("extsqd", "Singles expansion of a converged trace");
  ext_cmd->add_option("hamiltonian", ext_ham_path, "FCIDUMP or Hamiltonian JSON")
      ->required();
  ext_cmd->add_option("trace", ext_trace_path, "SqdTrace JSON")->required();
  ext_cmd->add_option("--ci-threshold", ext_ci_threshold,
                      "Expansion seed coefficient threshold")
      ->default_val(1e-5);
  ext_cmd->add_option("--out", ext_out, "Output path (default stdout)");
  ext_cmd->callback([&] {
    const mpsqd::FermionHamiltonian ham = load_hamiltonian(ext_ham_path);
    const auto trace = load_json_file(ext_trace_path).get<mpsqd::SqdTrace>();
    mpsqd::SqdConfig cfg;
    cfg.extsqd_ci_threshold = ext_ci_threshold;
    const mpsqd::ExtsqdResult result =
        mpsqd::extsqd_expand(ham, trace.final_basis, trace.final_vector, cfg);
    json j = result;
    j["e_last"] = trace.e_last;
    write_json(j, ext_out);
  });

  // plan -------------------------------------------------------------------
  std::string plan_validate, plan_out, plan_label = "layout";
  int plan_buffer = 1, plan_rows = 3, plan_cols = 19;
  int plan_orbitals = 0, plan_ancillas = 0, plan_anchor = 0;
  CLI::App* plan_cmd =
      app.add_subcommand("plan", "Build or validate heavy-hex partition plans");
  plan_cmd->add_option("--buffer", plan_buffer, "Idle qubits between layouts (1-3)")
      ->default_val(1);
  plan_cmd->add_option("--rows", plan_rows, "Heavy-hex rows")->default_val(3);
  plan_cmd->add_option("--cols", plan_cols, "Heavy-hex row length")->default_val(19);
  plan_cmd->add_option("--orbitals", plan_orbitals,
                       "Plan one zigzag layout for this many orbitals instead of the "
                       "two-experiment bundle");
  plan_cmd->add_option("--ancillas", plan_ancillas, "Ancilla count for --orbitals");
  plan_cmd->add_option("--anchor", plan_anchor, "Preferred start qubit for --orbitals");
  plan_cmd->add_option("--label", plan_label, "Layout label for --orbitals")
      ->default_val("layout");
  plan_cmd->add_option("--validate", plan_validate,
                       "Validate this plan JSON instead of building one");
  plan_cmd->add_option("--out", plan_out, "Output path (default stdout)");
  plan_cmd->callback([&] {
    if (!plan_validate.empty()) {
      const auto plan = load_json_file(plan_validate).get<mpsqd::PartitionPlan>();
      const std::vector<mpsqd::Violation> violations = mpsqd::validate_partition(plan);
      write_json(json{{"violations", violations}}, plan_out);
      if (!violations.empty())
        throw mpsqd::PlanError(std::to_string(violations.size()) +
                               " partition violation(s); see report");
      return;
    }
    if (plan_orbitals > 0) {
      const mpsqd::CouplingMap map = mpsqd::heavy_hex_map(plan_rows, plan_cols);
      const mpsqd::QubitLayout layout = mpsqd::plan_zigzag_layout(
          map, plan_orbitals, plan_ancillas, plan_anchor, plan_label);
      mpsqd::PartitionPlan plan{map, {layout}, plan_buffer};
      write_json(plan, plan_out);
      return;
    }
    write_json(mpsqd::hex_pair_plan(plan_buffer), plan_out);
  });

  // compose ----------------------------------------------------------------
  std::string compose_plan_path, compose_out;
  CLI::App* compose_cmd = app.add_subcommand(
      "compose", "Join per-layout measurement circuits into one program");
  compose_cmd->add_option("plan", compose_plan_path, "PartitionPlan JSON")->required();
  compose_cmd->add_option("--out", compose_out, "Output path (default stdout)");
  compose_cmd->callback([&] {
    const auto plan = load_json_file(compose_plan_path).get<mpsqd::PartitionPlan>();
    std::vector<mpsqd::AbstractCircuit> subs;
    subs.reserve(plan.layouts.size());
    for (const mpsqd::QubitLayout& layout : plan.layouts)
      subs.push_back(mpsqd::measurement_circuit(layout));
    write_json(mpsqd::compose_experiments(subs, plan), compose_out);
  });

  // split ------------------------------------------------------------------
  std::string split_samples_path, split_circuit_path, split_out;
  CLI::App* split_cmd = app.add_subcommand(
      "split", "Marginalize composite counts into per-register sample sets");
  split_cmd->add_option("samples", split_samples_path, "Composite SampleSet JSON")
      ->required();
  split_cmd->add_option("circuit", split_circuit_path, "Composite circuit JSON")
      ->required();
  split_cmd->add_option("--out", split_out, "Output path (default stdout)");
  split_cmd->callback([&] {
    const auto composite = load_json_file(split_samples_path).get<mpsqd::SampleSet>();
    const auto circuit = load_json_file(split_circuit_path).get<mpsqd::AbstractCircuit>();
    write_json(mpsqd::split_results(composite, circuit), split_out);
  });

  // rbd --------------------------------------------------------------------
  std::string rbd_spec_path, rbd_out;
  int rbd_threads = 1;
  CLI::App* rbd_cmd =
      app.add_subcommand("rbd", "Randomized-block experiment from a spec file");
  rbd_cmd->add_option("spec", rbd_spec_path, "Experiment spec JSON")->required();
  rbd_cmd->add_option("--threads", rbd_threads, "Worker threads")->default_val(1);
  rbd_cmd->add_option("--out", rbd_out,
                      "Output prefix; writes <prefix>_records.csv, "
                      "<prefix>_summary.csv, <prefix>_result.json");
  rbd_cmd->callback([&] {
    const std::filesystem::path spec_path(rbd_spec_path);
    const mpsqd::RbdSpec spec =
        mpsqd::load_rbd_spec(load_json_file(rbd_spec_path),
                             spec_path.has_parent_path() ? spec_path.parent_path()
                                                         : std::filesystem::path("."));
    const mpsqd::RbdResult result = mpsqd::run_rbd(spec, rbd_threads);
    const std::vector<mpsqd::GroupSummary> groups =
        mpsqd::summarize_records(result.records);
    if (rbd_out.empty()) {
      write_json(result, "");
      return;
    }
    write_output(mpsqd::records_to_csv(result.records), rbd_out + "_records.csv");
    write_output(mpsqd::summaries_to_csv(groups), rbd_out + "_summary.csv");
    json j = result;
    j["summaries"] = groups;
    write_json(j, rbd_out + "_result.json");
  });

  // report -----------------------------------------------------------------
  std::string report_input, report_out;
  bool report_json = false;
  CLI::App* report_cmd =
      app.add_subcommand("report", "Grouped deviation statistics from rbd records");
  report_cmd->add_option("records", report_input,
                         "RbdResult JSON or a bare records array")
      ->required();
  report_cmd->add_flag("--json", report_json, "Emit JSON instead of CSV");
  report_cmd->add_option("--out", report_out, "Output path (default stdout)");
  report_cmd->callback([&] {
    const json j = load_json_file(report_input);
    std::vector<mpsqd::ReplicateRecord> records;
    if (j.is_array())
      records = j.get<std::vector<mpsqd::ReplicateRecord>>();
    else if (j.contains("records"))
      records = j.at("records").get<std::vector<mpsqd::ReplicateRecord>>();
    else
      throw mpsqd::InputError("input holds neither a records array nor a result object");
    const std::vector<mpsqd::GroupSummary> groups = mpsqd::summarize_records(records);
    if (report_json)
      write_json(json(groups), report_out);
    else
      write_output(mpsqd::summaries_to_csv(groups), report_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const mpsqd::PlanError& e) {
    std::cerr << "plan error: " << e.what() << '\n';
    return 4;
  } catch (const mpsqd::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << '\n';
    return 3;
  } catch (const mpsqd::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
