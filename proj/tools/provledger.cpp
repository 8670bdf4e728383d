// SPDX-License-Identifier: Apache-2.0
//
// provledger run    --config C --scenario S --seed N --out DIR
// provledger query  ls|history|opstat|verify --dump D ...
// provledger tamper --dump D --height H --offset O

#include "provledger/queries.hpp"
#include "provledger/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace provledger;

struct Exit {
  int code;
};

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << path << "\n";
    throw Exit{2};
  }
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, const Bytes& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    throw Exit{2};
  }
}

struct Replayed {
  ledger::Ledger ledger;
  ledger::WorldState state;
};

Replayed replay_dump(const std::string& path) {
  const auto dump = read_file(path);
  try {
    Replayed r;
    r.ledger = ledger::load_ledger(dump);
    r.state = ledger::replay(r.ledger, chaincode::index_registry());
    return r;
  } catch (const std::exception& e) {
    std::cerr << "error: dump does not parse: " << e.what() << "\n";
    throw Exit{2};
  }
}

int not_found(const std::exception& e) {
  std::cout << "not found\n";
  std::cerr << e.what() << "\n";
  return 1;
}

int cmd_run(const std::string& config_path, const std::string& scenario_path, std::uint64_t seed,
            const std::string& out_dir) {
  NetworkConfig config;
  scenario::Scenario sc;
  try {
    config = NetworkConfig::load(config_path);
    config.seed = seed;
    config.validate();
    sc = scenario::Scenario::load(scenario_path, config);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const scenario::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const auto outcome = scenario::run_to_directory(config, sc, out_dir);
  for (const auto& p : outcome.report.peers) {
    std::cout << p.peer_id << (p.up ? "" : " (down)") << " height=" << p.height << " tip=" << p.tip.hex()
              << " state=" << p.state_digest.hex() << "\n";
  }
  std::cout << outcome.message << "\n";
  return outcome.exit_code;
}

int cmd_ls(const std::string& dump, const std::string& dir, const std::string& as) {
  const auto r = replay_dump(dump);
  try {
    const auto dir_id = is_uuid(dir) ? dir : chaincode::resolve_directory(r.state, dir);
    std::string requester = as.empty() ? std::string{} : participant_id_for(as);
    if (requester.empty()) {
      const auto d = assets::StateView(r.state).load<assets::DirectoryAsset>(dir_id);
      if (!d) throw chaincode::ChaincodeError(chaincode::Errc::not_found, "directory " + dir);
      requester = d->owner;
    }
    for (const auto& f : chaincode::query_directory(r.state, dir_id, requester))
      std::cout << f.name << "\t" << f.file_id << "\t" << f.size_bytes << "\t" << f.content_digest.hex() << "\t"
                << f.home_storage << "\n";
  } catch (const chaincode::ChaincodeError& e) {
    if (e.code() != chaincode::Errc::not_found) {
      std::cerr << e.what() << "\n";
      return 1;
    }
    return not_found(e);
  }
  return 0;
}

int cmd_history(const std::string& dump, const std::string& file) {
  const auto r = replay_dump(dump);
  try {
    const auto id = is_uuid(file) ? file : chaincode::resolve_file(r.state, file);
    for (const auto& h : chaincode::query_history(r.ledger, id))
      std::cout << h.block_height << "\t" << h.tx_index << "\t" << h.kind << "\t" << h.tx_id << "\t"
                << (h.op_id.empty() ? "-" : h.op_id) << "\t" << h.summary << "\n";
  } catch (const chaincode::ChaincodeError& e) {
    return not_found(e);
  }
  return 0;
}

int cmd_opstat(const std::string& dump, const std::string& op_id) {
  const auto r = replay_dump(dump);
  try {
    const auto s = chaincode::query_operation(r.state, &r.ledger, op_id);
    const auto coord = [](const std::optional<chaincode::TxCoordinate>& c) {
      return c ? std::to_string(c->block_height) + ":" + std::to_string(c->tx_index) : std::string("-");
    };
    std::cout << "op_id\t" << s.op.op_id << "\n"
              << "op_type\t" << assets::to_string(s.op.op_type) << "\n"
              << "state\t" << assets::to_string(s.op.state) << "\n"
              << "requester\t" << s.op.requester << "\n"
              << "delegate\t" << s.op.delegate.value_or("-") << "\n"
              << "request_tx\t" << s.op.request_tx << "\t" << coord(s.request_at) << "\n"
              << "ack_tx\t" << s.op.ack_tx.value_or("-") << "\t" << coord(s.ack_at) << "\n"
              << "response_tx\t" << s.op.response_tx.value_or("-") << "\t" << coord(s.response_at) << "\n";
    if (!s.op.error_info.empty()) std::cout << "error_info\t" << s.op.error_info << "\n";
  } catch (const chaincode::ChaincodeError& e) {
    return not_found(e);
  }
  return 0;
}

int cmd_verify(const std::string& dump) {
  const auto report = ledger::verify_dump(read_file(dump));
  std::cout << report.summary() << "\n";
  return report.intact ? 0 : 1;
}

int cmd_tamper(const std::string& dump, std::uint64_t height, std::uint64_t offset) {
  auto data = read_file(dump);
  std::vector<ledger::FrameRef> frames;
  try {
    frames = ledger::split_frames(data);
  } catch (const std::exception& e) {
    std::cerr << "error: dump does not parse: " << e.what() << "\n";
    return 2;
  }
  if (height >= frames.size()) {
    std::cerr << "error: height " << height << " beyond tip " << frames.size() - 1 << "\n";
    return 2;
  }
  if (offset >= frames[height].length) {
    std::cerr << "error: offset " << offset << " beyond block size " << frames[height].length << "\n";
    return 2;
  }
  data[frames[height].offset + offset] ^= 0xff;
  write_file(dump, data);
  std::cout << "flipped byte " << offset << " of block " << height << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Provenance ledger simulator"};
  app.require_subcommand(1);

  std::string config_path, scenario_path, out_dir, dump, dir = "/", as, file, op;
  std::uint64_t seed = 0, height = 0, offset = 0;

  auto* run = app.add_subcommand("run", "Run a scenario and write artifacts");
  run->add_option("--config", config_path, "Network config (JSON)")->required();
  run->add_option("--scenario", scenario_path, "Scenario (JSON)")->required();
  run->add_option("--seed", seed, "Simulation seed")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* query = app.add_subcommand("query", "Query a ledger dump");
  query->require_subcommand(1);
  auto* ls = query->add_subcommand("ls", "List committed files of a directory");
  ls->add_option("--dump", dump)->required();
  ls->add_option("--dir", dir, "Directory path or id");
  ls->add_option("--as", as, "Requesting participant name");
  auto* history = query->add_subcommand("history", "Provenance history of a file");
  history->add_option("--dump", dump)->required();
  history->add_option("--file", file, "File path or id")->required();
  auto* opstat = query->add_subcommand("opstat", "Operation record");
  opstat->add_option("--dump", dump)->required();
  opstat->add_option("--op", op, "Operation id")->required();
  auto* verify = query->add_subcommand("verify", "Verify the hash chain");
  verify->add_option("--dump", dump)->required();

  auto* tamper = app.add_subcommand("tamper", "Flip one byte of a serialized block");
  tamper->add_option("--dump", dump)->required();
  tamper->add_option("--height", height)->required();
  tamper->add_option("--offset", offset)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config_path, scenario_path, seed, out_dir);
    if (*ls) return cmd_ls(dump, dir, as);
    if (*history) return cmd_history(dump, file);
    if (*opstat) return cmd_opstat(dump, op);
    if (*verify) return cmd_verify(dump);
    if (*tamper) return cmd_tamper(dump, height, offset);
  } catch (const Exit& e) {
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
