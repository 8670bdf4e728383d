// SPDX-License-Identifier: Apache-2.0

#include "provledger/simulation.hpp"

#include <algorithm>

namespace provledger {

using assets::FileAsset;
using assets::OperationAsset;
using assets::OpState;

Simulation::Simulation(NetworkConfig config) : network_(std::make_unique<network::Network>(std::move(config))) {
  const auto& cfg = network_->config();
  for (const auto& s : cfg.storages) {
    const auto id = cfg.storage_id(s.name);
    stores_.emplace(id, storage::PhysicalStore(id, s.capacity_bytes));
  }
  for (const auto& s : cfg.storages) {
    agents_.push_back(std::make_unique<storage::DmsAgent>(*network_, s.dms, cfg.storage_id(s.name), stores_, channel_));
    network_->add_actor(agents_.back().get());
  }
}

storage::DmsAgent* Simulation::agent_for_storage(const std::string& storage_id) {
  for (auto& a : agents_)
    if (a->storage_id() == storage_id) return a.get();
  return nullptr;
}

network::SubmitResult Simulation::submit(const std::string& actor, std::string kind, ledger::Payload payload,
                                         std::optional<Bytes> upload) {
  const bool is_request = kind == chaincode::kind::kRequestOp;
  auto r = network_->submit({actor, std::move(kind), std::move(payload)});
  if (r.accepted && is_request && upload) channel_.uploads[chaincode::op_id_for_tx(r.tx_id)] = std::move(*upload);
  return r;
}

namespace {

template <class T>
std::vector<T> all_of(const ledger::WorldState& state) {
  std::vector<T> out;
  const std::string prefix = std::string(T::kTag) + "/";
  const auto& entries = state.entries();
  for (auto it = entries.lower_bound(prefix); it != entries.end() && it->first.starts_with(prefix); ++it)
    out.push_back(assets::decode<T>(it->second.value));
  return out;
}

bool committed(const ledger::Ledger& ledger, const std::optional<std::string>& tx_id) {
  return tx_id && chaincode::locate_transaction(ledger, *tx_id).has_value();
}

}  // namespace

std::size_t listing_mismatches(const ledger::WorldState& state) {
  const auto files = all_of<FileAsset>(state);
  std::size_t bad = 0;
  for (const auto& dir : all_of<assets::DirectoryAsset>(state)) {
    std::vector<std::pair<std::string, std::string>> expected;
    for (const auto& f : files)
      if (f.directory_id == dir.dir_id && !f.temporary) expected.emplace_back(f.name, f.file_id);
    std::sort(expected.begin(), expected.end());
    std::vector<std::pair<std::string, std::string>> got;
    for (const auto& s : chaincode::query_directory(state, dir.dir_id, dir.owner)) got.emplace_back(s.name, s.file_id);
    if (got != expected) ++bad;
  }
  return bad;
}

std::size_t two_record_violations(const ledger::WorldState& state, const ledger::Ledger& ledger) {
  std::size_t bad = 0;
  for (const auto& op : all_of<OperationAsset>(state)) {
    if (op.state != OpState::completed) continue;
    const bool ok = committed(ledger, op.request_tx) && committed(ledger, op.response_tx) && op.response_tx &&
                    *op.response_tx != op.request_tx;
    if (!ok) ++bad;
  }
  return bad;
}

std::vector<InvariantResult> check_invariants(const Simulation& sim) {
  std::vector<InvariantResult> out;
  const auto& net = sim.network();
  const auto& state = sim.state();
  const auto& ledger = sim.ledger();
  const auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, ok ? std::string{} : std::move(detail)});
  };

  add("replica-consistency", net.report().consistent(), "up peers disagree on (height, tip, state digest)");

  {
    std::string detail;
    for (const auto& p : net.peers()) {
      if (!p.serving()) continue;
      try {
        if (!(ledger::replay(p.ledger, chaincode::index_registry()) == p.state)) detail += p.peer_id + " ";
      } catch (const std::exception& e) {
        detail += p.peer_id + " (" + e.what() + ") ";
      }
    }
    add("replay-equality", detail.empty(), "state differs from replay on " + detail);
  }

  {
    const auto n = two_record_violations(state, ledger);
    add("lifecycle-completeness", n == 0, std::to_string(n) + " completed operations lack two committed records");
  }

  {
    std::size_t leaked = 0;
    for (const auto& dir : all_of<assets::DirectoryAsset>(state))
      for (const auto& s : chaincode::query_directory(state, dir.dir_id, dir.owner)) {
        const auto f = assets::StateView(state).load<FileAsset>(s.file_id);
        if (!f || f->temporary) ++leaked;
      }
    add("temporary-invisibility", leaked == 0, std::to_string(leaked) + " temporary files listed");
  }

  {
    const auto n = listing_mismatches(state);
    add("directory-listing-equivalence", n == 0, std::to_string(n) + " directories differ from the full scan");
  }

  {
    const auto entries = sim.audit();
    const auto n = storage::audit_failures(entries);
    std::string detail = std::to_string(n) + " audit failures";
    for (const auto& e : entries)
      if (e.status != "ok") {
        detail += "; first: " + e.status + " " + e.file_id + " on " + e.storage_id;
        break;
      }
    add("audit", n == 0, detail);
  }

  {
    std::size_t bad = 0;
    std::map<std::string, OpState> last_state;
    for (const auto& block : ledger.blocks()) {
      for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        if (!block.validity_flags[i]) continue;
        const auto& tx = block.transactions[i];
        for (const auto& [key, value] : tx.write_set) {
          if (!key.starts_with("op/") || !value) continue;
          const auto op = assets::decode<OperationAsset>(*value);
          if ((tx.kind == chaincode::kind::kAckOp || tx.kind == chaincode::kind::kConfirmOp) &&
              (!op.delegate || *op.delegate != tx.submitter))
            ++bad;
          auto prev = last_state.find(op.op_id);
          if (prev != last_state.end() && prev->second != op.state) {
            const bool walk = prev->second == OpState::started && op.state == OpState::completed && op.ack_tx &&
                              op.ack_tx == op.response_tx;
            if (!assets::is_allowed_transition(prev->second, op.state) && !walk) ++bad;
          }
          last_state[op.op_id] = op.state;
        }
      }
    }
    add("dms-delegation", bad == 0, std::to_string(bad) + " ack/confirm or transition violations");
  }

  {
    const auto& ref = net.reference_peer();
    std::string detail;
    for (const auto& a : sim.agents()) {
      std::uint64_t expected = 0;
      for (const auto& block_events : ref.events)
        for (const auto& ev : block_events)
          if (ev.get("delegate") == a->participant_id()) ++expected;
      if (a->stats().events_seen != expected)
        detail += a->name() + " saw " + std::to_string(a->stats().events_seen) + " of " + std::to_string(expected) + "; ";
    }
    add("exactly-once-events", detail.empty(), detail);
  }
  return out;
}

}  // namespace provledger
