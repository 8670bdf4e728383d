// SPDX-License-Identifier: Apache-2.0

#include "provledger/scenario.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace provledger::scenario {

using chaincode::ChaincodeError;
using chaincode::Errc;

namespace {

constexpr std::array<std::string_view, 4> kControl = {"crash_peer", "recover_peer", "drop_confirmation",
                                                      "diverge_endorser"};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find(sep, start);
    if (pos == std::string::npos) pos = text.size();
    if (pos > start) out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

// "$name" references anywhere in an argument value.
std::vector<std::string> label_refs(const std::string& value) {
  std::vector<std::string> out;
  for (std::size_t pos = value.find('$'); pos != std::string::npos; pos = value.find('$', pos + 1)) {
    auto end = value.find_first_of(",:/ ", pos + 1);
    out.push_back(value.substr(pos + 1, end == std::string::npos ? std::string::npos : end - pos - 1));
  }
  return out;
}

std::string arg_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::vector<std::string> parts;
    for (const auto& e : v) parts.push_back(arg_string(e));
    return join(parts);
  }
  return v.dump();
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

}  // namespace

bool is_control_command(std::string_view command) {
  return std::find(kControl.begin(), kControl.end(), command) != kControl.end();
}

bool is_query_command(std::string_view command) {
  return std::find(chaincode::kQueryKinds.begin(), chaincode::kQueryKinds.end(), command) !=
         chaincode::kQueryKinds.end();
}

nlohmann::json ScenarioStep::to_json() const {
  nlohmann::json j;
  j["step"] = step;
  if (!actor.empty()) j["actor"] = actor;
  j["command"] = command;
  j["args"] = args;
  if (bytes) j["bytes_b64"] = base64_encode(*bytes);
  if (!label.empty()) j["label"] = label;
  return j;
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json j;
  j["max_steps"] = max_steps;
  auto& arr = j["steps"] = nlohmann::json::array();
  for (const auto& s : steps) arr.push_back(s.to_json());
  return j;
}

Scenario Scenario::from_json(const nlohmann::json& j, const NetworkConfig& config) {
  if (!j.is_object() || !j.contains("steps") || !j.at("steps").is_array())
    throw ScenarioError("scenario: top level must be an object with a \"steps\" array");
  Scenario sc;
  if (j.contains("max_steps")) {
    if (!j.at("max_steps").is_number_unsigned()) throw ScenarioError("scenario: max_steps must be a non-negative integer");
    sc.max_steps = j.at("max_steps").get<std::uint64_t>();
  }
  std::map<std::string, std::string> labels;  // label -> command
  std::uint64_t last = 0;
  std::size_t index = 0;
  for (const auto& s : j.at("steps")) {
    const std::string where = "scenario step #" + std::to_string(index++);
    if (!s.is_object()) throw ScenarioError(where + ": must be an object");
    ScenarioStep st;
    if (!s.contains("step") || !s.at("step").is_number_unsigned()) throw ScenarioError(where + ": missing integer \"step\"");
    st.step = s.at("step").get<std::uint64_t>();
    if (st.step == 0 || st.step <= last) throw ScenarioError(where + ": step numbers must be positive and strictly increasing");
    last = st.step;
    if (!s.contains("command") || !s.at("command").is_string()) throw ScenarioError(where + ": missing \"command\"");
    st.command = s.at("command").get<std::string>();
    if (s.contains("actor")) {
      if (!s.at("actor").is_string()) throw ScenarioError(where + ": actor must be a string");
      st.actor = s.at("actor").get<std::string>();
    }
    if (s.contains("args")) {
      if (!s.at("args").is_object()) throw ScenarioError(where + ": args must be an object");
      for (const auto& [k, v] : s.at("args").items()) st.args[k] = arg_string(v);
    }
    if (s.contains("bytes_b64")) {
      try {
        st.bytes = base64_decode(s.at("bytes_b64").get<std::string>());
      } catch (const std::exception& e) {
        throw ScenarioError(where + ": bytes_b64: " + e.what());
      }
    }
    if (s.contains("label")) st.label = s.at("label").get<std::string>();

    const bool control = is_control_command(st.command);
    if (!control && !is_query_command(st.command) && !chaincode::is_mutating_kind(st.command))
      throw ScenarioError(where + ": unknown command '" + st.command + "'");
    if (!control) {
      if (st.actor.empty()) throw ScenarioError(where + ": command '" + st.command + "' needs an actor");
      if (!config.find_participant(st.actor)) throw ScenarioError(where + ": unknown actor '" + st.actor + "'");
    } else if (st.command != "drop_confirmation") {
      const auto peer = st.args.contains("peer") ? st.args.at("peer") : std::string{};
      const auto peers = config.all_peers();
      if (std::find(peers.begin(), peers.end(), peer) == peers.end())
        throw ScenarioError(where + ": unknown peer '" + peer + "'");
    } else if (!st.args.contains("op")) {
      throw ScenarioError(where + ": drop_confirmation needs args.op");
    }
    if (st.args.contains("storage") && !config.find_storage(st.args.at("storage")) && !is_uuid(st.args.at("storage")))
      throw ScenarioError(where + ": unknown storage '" + st.args.at("storage") + "'");
    for (const auto& [k, v] : st.args) {
      for (const auto& ref : label_refs(v))
        if (!labels.contains(ref)) throw ScenarioError(where + ": undefined label '$" + ref + "' in args." + k);
    }
    if (!st.label.empty()) {
      if (labels.contains(st.label)) throw ScenarioError(where + ": duplicate label '" + st.label + "'");
      labels[st.label] = st.command;
    }
    sc.steps.push_back(std::move(st));
  }
  return sc;
}

Scenario Scenario::load(const std::filesystem::path& path, const NetworkConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const auto text = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto line = line_of(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ScenarioError(path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
  try {
    return from_json(j, config);
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Runner

const ScenarioRunner::LabelInfo* ScenarioRunner::label(const std::string& name) const {
  auto it = labels_.find(name);
  return it == labels_.end() ? nullptr : &it->second;
}

std::string ScenarioRunner::file_ref(const std::string& value) const {
  if (value.starts_with('$')) {
    const auto* l = label(value.substr(1));
    if (!l || l->command != chaincode::kind::kRequestOp) throw ChaincodeError(Errc::not_found, "label " + value);
    if (l->op_type == "upload") return chaincode::file_id_for_tx(l->tx_id);
    return chaincode::output_file_id_for_tx(l->tx_id);
  }
  if (value.starts_with('/')) return chaincode::resolve_file(sim_.state(), value);
  return value;
}

std::string ScenarioRunner::dir_ref(const std::string& value) const {
  if (value.starts_with('$')) {
    const auto* l = label(value.substr(1));
    if (!l || l->command != chaincode::kind::kMkdir) throw ChaincodeError(Errc::not_found, "label " + value);
    return chaincode::dir_id_for_tx(l->tx_id);
  }
  if (value.starts_with('/')) return chaincode::resolve_directory(sim_.state(), value);
  return value;
}

std::string ScenarioRunner::acl_ref(const std::string& value) const {
  const auto colon = value.find(':');
  if (colon == std::string::npos) throw ChaincodeError(Errc::bad_request, "bad ACL entry " + value);
  const auto kind = value.substr(0, colon);
  const auto who = value.substr(colon + 1);
  if (kind == "participant") {
    const auto id = sim_.network().resolve_participant(who);
    return "participant:" + (id.empty() ? who : id);
  }
  if (kind == "group" && who.starts_with('$')) {
    const auto* l = label(who.substr(1));
    if (!l) throw ChaincodeError(Errc::not_found, "label " + who);
    return "group:" + chaincode::group_id_for_tx(l->tx_id);
  }
  return value;
}

std::string ScenarioRunner::acl_list(const std::string& value) const {
  std::vector<std::string> parts;
  for (const auto& p : split(value, ',')) parts.push_back(acl_ref(p));
  return join(parts);
}

std::string ScenarioRunner::resolve_ref(const std::string& field, const std::string& value) const {
  if (field == "dir" || field == "parent") return dir_ref(value);
  if (field == "file" || field == "program") return file_ref(value);
  if (field == "inputs") {
    std::vector<std::string> ids;
    for (const auto& p : split(value, ',')) ids.push_back(file_ref(p));
    return join(ids);
  }
  if (field == "storage") {
    if (sim_.network().config().find_storage(value)) return storage_id_for(value);
    return value;
  }
  if (field == "op" || field == "group") {
    if (!value.starts_with('$')) return value;
    const auto* l = label(value.substr(1));
    if (!l) throw ChaincodeError(Errc::not_found, "label " + value);
    return field == "op" ? chaincode::op_id_for_tx(l->tx_id) : chaincode::group_id_for_tx(l->tx_id);
  }
  if (field == "member") return acl_ref(value);
  if (field == "read" || field == "write" || field == "exec" || field == "entries" || field == "members")
    return acl_list(value);
  if (field == "asset") {
    const auto colon = value.find(':');
    if (colon == std::string::npos) return value;
    const auto kind = value.substr(0, colon);
    const auto ref = value.substr(colon + 1);
    if (kind == "file") return assets::make_key(assets::tag::kFile, file_ref(ref));
    if (kind == "dir") return assets::make_key(assets::tag::kDirectory, dir_ref(ref));
    return value;
  }
  return value;
}

ledger::Payload ScenarioRunner::resolve(const ScenarioStep& step) const {
  ledger::Payload out;
  for (const auto& [k, v] : step.args) out[k] = resolve_ref(k, v);
  return out;
}

void ScenarioRunner::run_query(const ScenarioStep& step, const ledger::Payload& args) {
  auto& net = sim_.network();
  const auto requester = net.resolve_participant(step.actor);
  std::string detail;
  if (step.command == chaincode::kind::kLs) {
    const auto dir = args.contains("dir") ? args.at("dir") : root_directory_id();
    for (const auto& f : chaincode::query_directory(sim_.state(), dir, requester))
      detail += (detail.empty() ? "" : " ") + f.name;
  } else if (step.command == chaincode::kind::kHistory) {
    for (const auto& h : chaincode::query_history(sim_.ledger(), args.at("file")))
      detail += (detail.empty() ? "" : " ") + h.kind + "@" + std::to_string(h.block_height);
  } else {
    const auto s = chaincode::query_operation(sim_.state(), &sim_.ledger(), args.at("op"));
    detail = std::string(assets::to_string(s.op.state));
    if (!s.op.error_info.empty()) detail += "(" + s.op.error_info + ")";
  }
  net.log(step.actor, step.command, detail);
}

std::optional<network::SubmitResult> ScenarioRunner::execute(const ScenarioStep& step) {
  auto& net = sim_.network();
  if (is_control_command(step.command)) {
    network::Fault f;
    f.at_step = net.now();
    if (step.command == "crash_peer") {
      f.kind = network::Fault::Kind::crash_peer;
    } else if (step.command == "recover_peer") {
      f.kind = network::Fault::Kind::recover_peer;
    } else if (step.command == "drop_confirmation") {
      f.kind = network::Fault::Kind::drop_confirmation;
    } else {
      f.kind = network::Fault::Kind::diverge_endorser;
    }
    try {
      f.target = step.command == "drop_confirmation" ? resolve_ref("op", step.args.at("op")) : step.args.at("peer");
      net.inject_fault(f);
    } catch (const std::exception& e) {
      net.log("fault", "rejected", step.command + ": " + e.what());
    }
    return std::nullopt;
  }

  ledger::Payload args;
  try {
    args = resolve(step);
  } catch (const std::exception& e) {
    net.log(step.actor, "resolve-failed", step.command + ": " + e.what());
    return network::SubmitResult{{}, false, e.what()};
  }

  if (is_query_command(step.command)) {
    try {
      run_query(step, args);
    } catch (const std::exception& e) {
      net.log(step.actor, step.command, std::string("error: ") + e.what());
    }
    return std::nullopt;
  }

  auto r = sim_.submit(step.actor, step.command, args, step.bytes);
  if (!step.label.empty()) {
    labels_[step.label] = {r.tx_id, step.command, args.contains("op_type") ? args.at("op_type") : std::string{}};
  }
  return r;
}

RunOutcome run(Simulation& sim, const Scenario& scenario) {
  ScenarioRunner runner(sim);
  auto& net = sim.network();
  for (const auto& st : scenario.steps) {
    while (net.now() < st.step) sim.step();
    runner.execute(st);
  }
  return finish(sim, scenario.max_steps);
}

RunOutcome finish(Simulation& sim, std::uint64_t max_steps) {
  auto& net = sim.network();
  RunOutcome out;
  const auto budget = max_steps > net.now() ? max_steps - net.now() : 0;
  out.report = sim.run_until_quiescent(budget);
  try {
    out.invariants = check_invariants(sim);
  } catch (const std::exception& e) {
    out.invariants.push_back({"invariant-sweep", false, e.what()});
  }
  if (!out.report.quiescent) {
    out.exit_code = 1;
    out.message = "invariant failed: quiescence: not quiescent after " + std::to_string(out.report.final_step) + " steps";
    return out;
  }
  for (const auto& inv : out.invariants) {
    if (!inv.ok) {
      out.exit_code = 1;
      out.message = "invariant failed: " + inv.name + ": " + inv.detail;
      return out;
    }
  }
  out.message = "ok: quiescent at step " + std::to_string(out.report.final_step) + ", height " +
                std::to_string(out.report.blocks - 1);
  return out;
}

void write_artifacts(const Simulation& sim, const RunOutcome& outcome, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto write = [&](const std::string& name, const auto& data) {
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (out_dir / name).string());
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  };
  const auto& ledger = sim.ledger();
  write("ledger.bin", ledger::dump_ledger(ledger));
  write("ledger.jsonl", ledger::export_json_lines(ledger));
  write("trace.jsonl", sim.network().trace_jsonl());
  write("audit.json", storage::audit_json(sim.audit()).dump(2) + "\n");

  auto digests = nlohmann::json::array();
  for (const auto& p : outcome.report.peers)
    digests.push_back({{"peer", p.peer_id},
                       {"up", p.up},
                       {"height", p.height},
                       {"tip", p.tip.hex()},
                       {"state_digest", p.state_digest.hex()}});
  write("digests.json", digests.dump(2) + "\n");

  auto report = outcome.report.to_json();
  report["exit_code"] = outcome.exit_code;
  report["message"] = outcome.message;
  auto& inv = report["invariants"] = nlohmann::json::array();
  for (const auto& i : outcome.invariants) inv.push_back({{"name", i.name}, {"ok", i.ok}, {"detail", i.detail}});
  write("report.json", report.dump(2) + "\n");
}

RunOutcome run_to_directory(const NetworkConfig& config, const Scenario& scenario, const std::filesystem::path& out_dir) {
  Simulation sim(config);
  auto outcome = run(sim, scenario);
  write_artifacts(sim, outcome, out_dir);
  return outcome;
}

}  // namespace provledger::scenario
