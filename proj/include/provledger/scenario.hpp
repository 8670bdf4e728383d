// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/simulation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace provledger::scenario {

// Malformed scenario or config; the CLI maps it to exit status 2.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Control commands (no actor needed): crash_peer{peer}, recover_peer{peer},
// drop_confirmation{op}, diverge_endorser{peer}.
// Query commands (never committed, result goes to the trace): ls{dir},
// history{file}, opstat{op}.
// Everything else must be a mutating processor name.
//
// Argument references resolved at execution time:
//   dir, parent             absolute path ("/a/b") or "$label" of an mkdir
//   file, program           absolute path or "$label" of an upload/copy/process
//   inputs                  comma list of file references
//   storage                 storage name from the config
//   op                      "$label" of a requestOp
//   group                   "$label" of a group create
//   member, read, write,
//   exec, entries, members  "participant:<name>" / "group:$label", comma lists
//   asset                   "file:<ref>" or "dir:<ref>"
struct ScenarioStep {
  std::uint64_t step = 0;
  std::string actor;  // participant name
  std::string command;
  std::map<std::string, std::string> args;
  std::optional<Bytes> bytes;  // bytes_b64 in JSON
  std::string label;

  nlohmann::json to_json() const;
};

struct Scenario {
  std::vector<ScenarioStep> steps;
  std::uint64_t max_steps = 5000;

  // Validates commands, actors, peers, label references and ordering.
  static Scenario from_json(const nlohmann::json& j, const NetworkConfig& config);
  // Syntax errors carry line and column.
  static Scenario load(const std::filesystem::path& path, const NetworkConfig& config);
  nlohmann::json to_json() const;
};

bool is_control_command(std::string_view command);
bool is_query_command(std::string_view command);

// Executes scenario steps against a simulation, resolving references.
class ScenarioRunner {
 public:
  explicit ScenarioRunner(Simulation& sim) : sim_(sim) {}

  // Submits (or applies) one step; does not advance the simulation. Returns
  // the submission for processor commands.
  std::optional<network::SubmitResult> execute(const ScenarioStep& step);

  // Ids recorded for a label, or nullptr.
  struct LabelInfo {
    std::string tx_id;
    std::string command;
    std::string op_type;
  };
  const LabelInfo* label(const std::string& name) const;

 private:
  ledger::Payload resolve(const ScenarioStep& step) const;
  std::string resolve_ref(const std::string& field, const std::string& value) const;
  std::string file_ref(const std::string& value) const;
  std::string dir_ref(const std::string& value) const;
  std::string acl_ref(const std::string& value) const;
  std::string acl_list(const std::string& value) const;
  void run_query(const ScenarioStep& step, const ledger::Payload& args);

  Simulation& sim_;
  std::map<std::string, LabelInfo> labels_;
};

struct RunOutcome {
  int exit_code = 0;
  std::string message;
  network::SimulationReport report;
  std::vector<InvariantResult> invariants;
};

// Issues every step once the clock reaches its step number, continues to
// quiescence within max_steps, then sweeps the invariants.
RunOutcome run(Simulation& sim, const Scenario& scenario);

// The tail of run(): quiescence within max_steps total, then the sweeps.
RunOutcome finish(Simulation& sim, std::uint64_t max_steps);

// Same, and writes the artifacts to out_dir: ledger.bin, ledger.jsonl,
// trace.jsonl, audit.json, digests.json, report.json.
RunOutcome run_to_directory(const NetworkConfig& config, const Scenario& scenario, const std::filesystem::path& out_dir);

void write_artifacts(const Simulation& sim, const RunOutcome& outcome, const std::filesystem::path& out_dir);

}  // namespace provledger::scenario
