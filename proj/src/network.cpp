// SPDX-License-Identifier: Apache-2.0

#include "provledger/network.hpp"

#include <algorithm>
#include <sstream>

namespace provledger::network {

std::string_view to_string(TxState s) {
  switch (s) {
    case TxState::queued:
      return "queued";
    case TxState::valid:
      return "valid";
    case TxState::invalidated:
      return "invalidated";
    case TxState::rejected:
      return "rejected";
    case TxState::dropped:
      return "dropped";
  }
  return "?";
}

std::string_view to_string(Fault::Kind k) {
  switch (k) {
    case Fault::Kind::crash_peer:
      return "crash_peer";
    case Fault::Kind::recover_peer:
      return "recover_peer";
    case Fault::Kind::drop_confirmation:
      return "drop_confirmation";
    case Fault::Kind::diverge_endorser:
      return "diverge_endorser";
  }
  return "?";
}

nlohmann::json TraceRecord::to_json() const {
  return {{"step", step}, {"actor", actor}, {"action", action}, {"detail", detail}};
}

bool SimulationReport::consistent() const {
  const PeerReport* first = nullptr;
  for (const auto& p : peers) {
    if (!p.up || p.halted) continue;
    if (!first) {
      first = &p;
      continue;
    }
    if (p.height != first->height || p.tip != first->tip || p.state_digest != first->state_digest) return false;
  }
  return first != nullptr;
}

nlohmann::json SimulationReport::to_json() const {
  nlohmann::json j;
  j["steps"] = steps;
  j["final_step"] = final_step;
  j["quiescent"] = quiescent;
  j["consistent"] = consistent();
  j["blocks"] = blocks;
  j["submitted"] = submitted;
  j["rejected"] = rejected;
  j["invalidated"] = invalidated;
  j["event_counts"] = event_counts;
  auto& ps = j["peers"] = nlohmann::json::array();
  for (const auto& p : peers) {
    ps.push_back({{"peer", p.peer_id},
                  {"up", p.up},
                  {"halted", p.halted},
                  {"height", p.height},
                  {"tip", p.tip.hex()},
                  {"state_digest", p.state_digest.hex()}});
  }
  return j;
}

std::vector<assets::OperationAsset> open_operations(const ledger::WorldState& state) {
  std::vector<assets::OperationAsset> out;
  const std::string prefix = std::string(assets::tag::kOperation) + "/";
  const auto& entries = state.entries();
  for (auto it = entries.lower_bound(prefix); it != entries.end() && it->first.starts_with(prefix); ++it) {
    auto op = assets::decode<assets::OperationAsset>(it->second.value);
    if (assets::is_open(op.state)) out.push_back(std::move(op));
  }
  return out;
}

std::vector<std::string> expirable_operations(const ledger::WorldState& state, std::uint64_t timeout) {
  std::vector<std::string> out;
  if (timeout == 0) return out;
  const auto now = state.height();
  for (const auto& op : open_operations(state))
    if (now >= op.requested_height && now - op.requested_height > timeout) out.push_back(op.op_id);
  return out;
}

namespace {

// Submits expireOp for overdue operations and keeps the block clock moving
// while any operation is open.
class TimeoutSweeper : public Actor {
 public:
  explicit TimeoutSweeper(std::string admin) : admin_(std::move(admin)) {}

  std::string name() const override { return admin_; }
  bool busy() const override { return false; }

  void on_step(Network& net) override {
    const auto timeout = net.chaincode_config().op_timeout_blocks;
    if (timeout == 0) return;
    const PeerNode* host = nullptr;
    for (const auto& p : net.peers())
      if (p.serving()) {
        host = &p;
        break;
      }
    if (!host) return;
    for (const auto& op_id : expirable_operations(host->state, timeout)) {
      auto it = in_flight_.find(op_id);
      if (it != in_flight_.end()) {
        const auto* st = net.tx_status(it->second);
        if (st && (st->state == TxState::queued || st->state == TxState::valid)) continue;
      }
      auto r = net.submit({admin_, std::string(chaincode::kind::kExpireOp), {{"op", op_id}}});
      if (r.accepted) in_flight_[op_id] = r.tx_id;
    }
    if (!open_operations(host->state).empty()) net.request_heartbeat();
  }

 private:
  std::string admin_;
  std::map<std::string, std::string> in_flight_;
};

}  // namespace

Network::Network(NetworkConfig config) : config_(std::move(config)) {
  config_.validate();
  cc_config_.op_timeout_blocks = config_.op_timeout;
  for (const auto& p : config_.participants) names_by_id_[config_.participant_id(p.name)] = p.name;

  const auto genesis = make_genesis(config_);
  archive_.append(genesis);
  for (const auto& org : config_.organizations) {
    for (const auto& id : org.peers) {
      PeerNode peer;
      peer.peer_id = id;
      peer.org_id = org.id;
      peer.state = ledger::WorldState(chaincode::index_registry());
      peers_.push_back(std::move(peer));
    }
  }
  for (auto& p : peers_) commit(p, genesis);

  for (const auto& p : config_.participants) {
    if (p.roles.contains(assets::Role::orderer_admin)) {
      sweeper_ = std::make_unique<TimeoutSweeper>(p.name);
      break;
    }
  }
  log("network", "genesis", "peers=" + std::to_string(peers_.size()) + " txs=" +
                                std::to_string(genesis.transactions.size()));
}

Network::~Network() = default;

void Network::log(std::string actor, std::string action, std::string detail) {
  trace_.push_back({step_, std::move(actor), std::move(action), std::move(detail)});
}

std::string Network::trace_jsonl() const {
  std::string out;
  for (const auto& r : trace_) out += r.to_json().dump() + "\n";
  return out;
}

std::string Network::resolve_participant(std::string_view who) const {
  if (config_.find_participant(who)) return config_.participant_id(who);
  if (names_by_id_.contains(std::string(who))) return std::string(who);
  return {};
}

const PeerNode& Network::peer(std::string_view peer_id) const {
  for (const auto& p : peers_)
    if (p.peer_id == peer_id) return p;
  throw NetworkError("unknown peer " + std::string(peer_id));
}

PeerNode& Network::mutable_peer(std::string_view peer_id) {
  for (auto& p : peers_)
    if (p.peer_id == peer_id) return p;
  throw NetworkError("unknown peer " + std::string(peer_id));
}

const PeerNode& Network::reference_peer() const {
  for (const auto& p : peers_)
    if (p.serving()) return p;
  throw NetworkError("no peer is up");
}

const TxStatus* Network::tx_status(const std::string& tx_id) const {
  auto it = statuses_.find(tx_id);
  return it == statuses_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Endorsement

EndorseOutcome Network::endorse(const std::string& peer_id, const Transaction& proposal) const {
  EndorseOutcome out;
  const auto& p = peer(peer_id);
  if (!p.serving()) {
    out.error = "peer " + peer_id + " is down";
    return out;
  }
  const assets::StateView view(p.state);
  const auto submitter = view.load<assets::Participant>(proposal.submitter);
  if (!submitter) {
    out.error = "not-found: submitter " + proposal.submitter;
    return out;
  }
  if (Digest::keyed(as_bytes(submitter->verify_token), proposal.proposal_bytes()) != proposal.signature) {
    out.error = "access-denied: bad submitter signature";
    return out;
  }
  try {
    auto r = chaincode::execute(p.state, proposal.submitter, proposal.tx_id, proposal.kind, proposal.payload,
                                cc_config_);
    out.tx = proposal;
    out.tx.read_set = std::move(r.read_set);
    out.tx.range_reads = std::move(r.range_reads);
    out.tx.write_set = std::move(r.write_set);
    out.tx.events = std::move(r.events);
  } catch (const std::exception& e) {
    out.error = e.what();
    return out;
  }
  if (p.divergent) out.tx.write_set["divergence/" + peer_id] = Bytes{1};
  const auto secret = config_.peer_secret(peer_id);
  out.endorsement = {peer_id, Digest::keyed(secret.bytes(), out.tx.response_bytes())};
  out.ok = true;
  return out;
}

std::vector<EndorseOutcome> Network::endorse_all(const std::vector<std::string>& peers,
                                                 const Transaction& proposal) const {
  std::vector<EndorseOutcome> outs(peers.size());
  const auto n = static_cast<long>(peers.size());
  if (config_.parallel_endorsement && n > 1) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) outs[i] = endorse(peers[i], proposal);
  } else {
    for (long i = 0; i < n; ++i) outs[i] = endorse(peers[i], proposal);
  }
  return outs;
}

std::vector<std::string> Network::endorsing_peers_of(const std::string& org) const {
  std::vector<std::string> out;
  for (const auto& p : peers_)
    if (p.org_id == org && p.serving()) out.push_back(p.peer_id);
  return out;
}

std::optional<std::string> Network::acting_org(const EndorseOutcome& first) const {
  const assets::StateView view(peer(first.endorsement.peer_id).state);
  const std::string prefix = std::string(assets::tag::kOperation) + "/";
  for (const auto& [key, value] : first.tx.write_set) {
    if (!key.starts_with(prefix) || !value) continue;
    const auto op = assets::decode<assets::OperationAsset>(*value);
    if (!op.delegate) continue;
    if (auto dms = view.load<assets::Participant>(*op.delegate)) return dms->org_id;
  }
  return std::nullopt;
}

void Network::reject(const std::string& tx_id, const std::string& submitter, const std::string& why) {
  statuses_[tx_id] = {TxState::rejected, why, 0, 0};
  ++rejected_;
  log(submitter, "reject", tx_id + " " + why);
}

SubmitResult Network::submit(const Proposal& proposal) {
  ++submitted_;
  SubmitResult result;
  result.tx_id = uuid_from("tx/" + std::to_string(config_.seed) + "/" + std::to_string(tx_counter_++));
  const auto fail = [&](const std::string& why) {
    reject(result.tx_id, proposal.submitter, proposal.kind + ": " + why);
    result.diagnostic = why;
    return result;
  };

  const auto pid = resolve_participant(proposal.submitter);
  if (pid.empty()) return fail("unknown participant " + proposal.submitter);
  const auto& name = names_by_id_.at(pid);

  Transaction tx;
  tx.tx_id = result.tx_id;
  tx.kind = proposal.kind;
  tx.submitter = pid;
  tx.payload = proposal.payload;
  const auto token = config_.verify_token(name);
  tx.signature = Digest::keyed(as_bytes(token), tx.proposal_bytes());

  if (!chaincode::is_mutating_kind(tx.kind)) return fail("bad-request: not a mutating processor");
  if (tx.kind == chaincode::kind::kConfirmOp) {
    auto op = proposal.payload.find("op");
    if (op != proposal.payload.end() && dropped_ops_.contains(op->second)) {
      statuses_[tx.tx_id] = {TxState::dropped, "confirmation dropped", 0, 0};
      log("fault", "drop", name + " " + tx.kind + " op=" + op->second);
      result.accepted = true;
      result.diagnostic = "dropped";
      return result;
    }
  }

  std::vector<EndorseOutcome> outs;
  const auto check = [&](const std::vector<EndorseOutcome>& batch) -> std::optional<std::string> {
    for (const auto& o : batch)
      if (!o.ok) return o.error;
    const auto reference = (outs.empty() ? batch.front() : outs.front()).tx.response_bytes();
    for (const auto& o : batch)
      if (o.tx.response_bytes() != reference) return std::string("endorsement mismatch");
    return std::nullopt;
  };

  if (config_.endorsement.mode == EndorsementPolicyConfig::Mode::per_org) {
    const auto* pc = config_.find_participant(name);
    auto targets = endorsing_peers_of(pc->org);
    if (targets.empty()) return fail("insufficient endorsements");
    auto batch = endorse_all(targets, tx);
    if (auto err = check(batch)) return fail(*err);
    outs = std::move(batch);
    if (auto org = acting_org(outs.front()); org && *org != pc->org) {
      auto more = endorsing_peers_of(*org);
      if (more.empty()) return fail("insufficient endorsements");
      auto second = endorse_all(more, tx);
      if (auto err = check(second)) return fail(*err);
      outs.insert(outs.end(), second.begin(), second.end());
    }
  } else {
    std::vector<std::string> targets;
    for (const auto& e : config_.endorsement.endorsers) {
      std::string chosen;
      if (config_.find_org(e)) {
        auto ps = endorsing_peers_of(e);
        if (!ps.empty()) chosen = ps.front();
      } else if (peer(e).serving()) {
        chosen = e;
      }
      if (!chosen.empty() && std::find(targets.begin(), targets.end(), chosen) == targets.end())
        targets.push_back(chosen);
    }
    if (targets.size() < config_.endorsement.k) return fail("insufficient endorsements");
    auto batch = endorse_all(targets, tx);
    if (auto err = check(batch)) return fail(*err);
    outs = std::move(batch);
  }

  Transaction endorsed = outs.front().tx;
  for (const auto& o : outs) endorsed.endorsements.push_back(o.endorsement);
  queue_.push_back(std::move(endorsed));
  statuses_[tx.tx_id] = {TxState::queued, {}, 0, 0};
  if (tx.kind == chaincode::kind::kRequestOp) known_ops_.insert(chaincode::op_id_for_tx(tx.tx_id));
  log(name, "submit", tx.kind + " " + tx.tx_id + " endorsements=" + std::to_string(outs.size()));
  result.accepted = true;
  return result;
}

// ---------------------------------------------------------------------------
// Ordering and delivery

std::optional<Block> Network::order_batch() {
  if (queue_.empty() && !heartbeat_) return std::nullopt;
  std::vector<Transaction> txs;
  while (!queue_.empty() && txs.size() < config_.batch_size) {
    txs.push_back(std::move(queue_.front()));
    queue_.pop_front();
  }
  auto block = Block::make(archive_.size(), archive_.tip().block_hash, std::move(txs));
  archive_.append(block);
  heartbeat_ = false;
  log("orderer", "cut", "height=" + std::to_string(block.height) + " txs=" + std::to_string(block.transactions.size()));
  for (auto& p : peers_)
    if (p.serving()) deliver(p, block);
  return block;
}

void Network::deliver(PeerNode& peer, const Block& block) {
  const auto next = peer.state.next_height();
  if (block.height < next) return;
  if (block.height > next) {
    peer.buffered.emplace(block.height, block);
    return;
  }
  commit(peer, block);
  for (auto it = peer.buffered.begin(); it != peer.buffered.end();) {
    if (it->first < peer.state.next_height()) {
      it = peer.buffered.erase(it);
    } else if (it->first == peer.state.next_height() && !peer.halted) {
      commit(peer, it->second);
      it = peer.buffered.erase(it);
    } else {
      break;
    }
  }
}

void Network::commit(PeerNode& peer, const Block& block) {
  if (peer.halted) return;
  const auto halt = [&](const std::string& why) {
    peer.halted = true;
    peer.alarm = why;
    log("peer:" + peer.peer_id, "halt", why);
  };
  if (block.recompute_hash() != block.block_hash) return halt("block hash mismatch at " + std::to_string(block.height));
  if (!peer.ledger.empty() && block.prev_hash != peer.ledger.tip().block_hash)
    return halt("prev_hash mismatch at " + std::to_string(block.height));
  Block committed = block;
  try {
    auto r = peer.state.apply(committed);
    committed.validity_flags = std::move(r.validity_flags);
    peer.ledger.append(committed);
    peer.events.push_back(std::move(r.events));
  } catch (const ledger::ChainBreakError& e) {
    return halt(e.what());
  }
  record_statuses(peer, peer.ledger.tip());
}

void Network::record_statuses(const PeerNode& peer, const Block& block) {
  (void)peer;
  if (block.height != status_height_) return;
  ++status_height_;
  for (std::size_t i = 0; i < block.transactions.size(); ++i) {
    const bool valid = block.validity_flags[i];
    const auto& tx = block.transactions[i];
    statuses_[tx.tx_id] = {valid ? TxState::valid : TxState::invalidated, valid ? "" : "mvcc", block.height, i};
    if (!valid) {
      ++invalidated_;
      log("peer:" + peer.peer_id, "invalidate", tx.kind + " " + tx.tx_id + " at " + std::to_string(block.height));
    }
  }
}

void Network::catch_up(PeerNode& peer) {
  for (auto h = peer.state.next_height(); h < archive_.size() && !peer.halted; ++h) deliver(peer, archive_.at(h));
}

// ---------------------------------------------------------------------------
// Subscriptions

SubscriptionId Network::subscribe(EventFilter filter, std::string host_org) {
  Subscription sub{std::move(filter), std::move(host_org), 0, {}};
  if (const auto* host = host_for(sub)) sub.next_height = host->events.size();
  subscriptions_.push_back(std::move(sub));
  return subscriptions_.size() - 1;
}

std::vector<Event> Network::drain(SubscriptionId id) {
  auto& sub = subscriptions_.at(id);
  std::vector<Event> out(sub.pending.begin(), sub.pending.end());
  sub.pending.clear();
  return out;
}

const PeerNode* Network::host_for(const Subscription& sub) const {
  if (!sub.host_org.empty()) {
    for (const auto& p : peers_)
      if (p.org_id == sub.host_org && p.serving()) return &p;
  }
  for (const auto& p : peers_)
    if (p.serving()) return &p;
  return nullptr;
}

void Network::pull_subscriptions() {
  for (auto& sub : subscriptions_) {
    const auto* host = host_for(sub);
    if (!host) continue;
    for (; sub.next_height < host->events.size(); ++sub.next_height)
      for (const auto& ev : host->events[sub.next_height])
        if (!sub.filter || sub.filter(ev)) sub.pending.push_back(ev);
  }
}

// ---------------------------------------------------------------------------
// Faults

void Network::inject_fault(Fault fault) {
  switch (fault.kind) {
    case Fault::Kind::crash_peer:
    case Fault::Kind::recover_peer:
    case Fault::Kind::diverge_endorser:
      (void)peer(fault.target);
      break;
    case Fault::Kind::drop_confirmation: {
      bool known = known_ops_.contains(fault.target);
      if (!known) {
        for (const auto& p : peers_)
          if (p.state.find(assets::make_key(assets::tag::kOperation, fault.target))) known = true;
      }
      if (!known) throw NetworkError("unknown operation " + fault.target);
      break;
    }
  }
  if (fault.at_step <= step_) {
    apply_fault(fault);
  } else {
    pending_faults_.push_back(std::move(fault));
  }
}

void Network::apply_fault(const Fault& fault) {
  log("fault", std::string(to_string(fault.kind)), fault.target);
  switch (fault.kind) {
    case Fault::Kind::crash_peer:
      mutable_peer(fault.target).up = false;
      break;
    case Fault::Kind::recover_peer: {
      auto& p = mutable_peer(fault.target);
      p.up = true;
      catch_up(p);
      break;
    }
    case Fault::Kind::drop_confirmation:
      dropped_ops_.insert(fault.target);
      break;
    case Fault::Kind::diverge_endorser:
      mutable_peer(fault.target).divergent = true;
      break;
  }
}

// ---------------------------------------------------------------------------
// Event loop

void Network::step() {
  ++step_;
  std::vector<Fault> due;
  std::erase_if(pending_faults_, [&](const Fault& f) {
    if (f.at_step > step_) return false;
    due.push_back(f);
    return true;
  });
  for (const auto& f : due) apply_fault(f);

  if (sweeper_) sweeper_->on_step(*this);
  for (auto* a : actors_) a->on_step(*this);

  while (queue_.size() >= config_.batch_size) order_batch();
  if (step_ % config_.batch_timer == 0 && (!queue_.empty() || heartbeat_)) order_batch();
  pull_subscriptions();
}

bool Network::has_open_operations() const {
  const PeerNode* ref = nullptr;
  for (const auto& p : peers_)
    if (p.serving()) {
      ref = &p;
      break;
    }
  return !ref || !open_operations(ref->state).empty();
}

bool Network::quiescent() const {
  if (!queue_.empty() || heartbeat_ || !pending_faults_.empty()) return false;
  for (const auto& p : peers_)
    if (p.serving() && p.state.next_height() != archive_.size()) return false;
  for (const auto& sub : subscriptions_) {
    if (!sub.pending.empty()) return false;
    const auto* host = host_for(sub);
    if (host && sub.next_height < host->events.size()) return false;
  }
  for (const auto* a : actors_)
    if (a->busy()) return false;
  return !has_open_operations();
}

SimulationReport Network::run_until_quiescent(std::uint64_t max_steps) {
  std::uint64_t taken = 0;
  while (!quiescent() && taken < max_steps) {
    step();
    ++taken;
  }
  auto r = report();
  r.steps = taken;
  return r;
}

SimulationReport Network::report() const {
  SimulationReport r;
  r.final_step = step_;
  r.quiescent = quiescent();
  r.blocks = archive_.size();
  r.submitted = submitted_;
  r.rejected = rejected_;
  r.invalidated = invalidated_;
  for (const auto& p : peers_) {
    PeerReport pr;
    pr.peer_id = p.peer_id;
    pr.up = p.up;
    pr.halted = p.halted;
    pr.height = p.ledger.empty() ? 0 : p.ledger.tip().height;
    if (!p.ledger.empty()) pr.tip = p.ledger.tip().block_hash;
    pr.state_digest = p.state.digest();
    r.peers.push_back(pr);
  }
  for (const auto& p : peers_) {
    if (!p.serving()) continue;
    for (const auto& block_events : p.events)
      for (const auto& ev : block_events) ++r.event_counts[ev.name];
    break;
  }
  return r;
}

}  // namespace provledger::network
