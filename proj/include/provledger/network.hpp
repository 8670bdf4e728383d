// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/chaincode.hpp"
#include "provledger/config.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace provledger::network {

using ledger::Block;
using ledger::Event;
using ledger::Payload;
using ledger::Transaction;

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Proposal {
  std::string submitter;  // participant name or participant id
  std::string kind;
  Payload payload;
};

enum class TxState { queued, valid, invalidated, rejected, dropped };
std::string_view to_string(TxState s);

struct TxStatus {
  TxState state = TxState::queued;
  std::string detail;
  std::uint64_t block_height = 0;
  std::uint64_t tx_index = 0;
};

struct SubmitResult {
  std::string tx_id;
  bool accepted = false;
  std::string diagnostic;
};

struct EndorseOutcome {
  bool ok = false;
  Transaction tx;  // proposal plus simulated results
  ledger::Endorsement endorsement;
  std::string error;
};

struct TraceRecord {
  std::uint64_t step = 0;
  std::string actor;
  std::string action;
  std::string detail;
  nlohmann::json to_json() const;
};

struct PeerNode {
  std::string peer_id;
  std::string org_id;
  ledger::Ledger ledger;
  ledger::WorldState state;
  std::vector<std::vector<Event>> events;  // per committed height
  std::map<std::uint64_t, Block> buffered;
  bool up = true;
  bool halted = false;
  bool divergent = false;
  std::string alarm;

  bool serving() const { return up && !halted; }
};

struct Fault {
  enum class Kind { crash_peer, recover_peer, drop_confirmation, diverge_endorser };
  Kind kind = Kind::crash_peer;
  std::string target;  // peer id, or op id for drop_confirmation
  std::uint64_t at_step = 0;
};
std::string_view to_string(Fault::Kind k);

struct PeerReport {
  std::string peer_id;
  bool up = true;
  bool halted = false;
  std::uint64_t height = 0;
  Digest tip;
  Digest state_digest;
};

struct SimulationReport {
  std::uint64_t steps = 0;  // executed by this call
  std::uint64_t final_step = 0;
  bool quiescent = false;
  std::vector<PeerReport> peers;
  std::map<std::string, std::uint64_t> event_counts;
  std::uint64_t blocks = 0;
  std::uint64_t submitted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t invalidated = 0;

  // All up, non-halted peers agree on (height, tip, state digest).
  bool consistent() const;
  nlohmann::json to_json() const;
};

class Network;

// Something that reacts once per simulation step (DMS agents, sweepers).
class Actor {
 public:
  virtual ~Actor() = default;
  virtual std::string name() const = 0;
  virtual void on_step(Network& net) = 0;
  // True while the actor still has work in flight.
  virtual bool busy() const = 0;
};

using EventFilter = std::function<bool(const Event&)>;
using SubscriptionId = std::size_t;

class Network {
 public:
  explicit Network(NetworkConfig config);
  ~Network();
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  const NetworkConfig& config() const { return config_; }
  std::uint64_t now() const { return step_; }

  // Endorses per policy and queues at the orderer. Rejections are recorded
  // and returned, never queued.
  SubmitResult submit(const Proposal& proposal);

  // Runs the processor on one peer's current snapshot.
  EndorseOutcome endorse(const std::string& peer_id, const Transaction& proposal) const;

  // Cuts one block from the queue (FIFO, up to batch_size) and delivers it.
  // Empty queue without a heartbeat request cuts nothing.
  std::optional<Block> order_batch();
  void request_heartbeat() { heartbeat_ = true; }

  SubscriptionId subscribe(EventFilter filter, std::string host_org = {});
  std::vector<Event> drain(SubscriptionId id);

  // Applies immediately when at_step <= now(). Throws NetworkError for an
  // unknown entity.
  void inject_fault(Fault fault);

  // Non-owning; actors run in registration order.
  void add_actor(Actor* actor) { actors_.push_back(actor); }

  void step();
  bool quiescent() const;
  SimulationReport run_until_quiescent(std::uint64_t max_steps);
  SimulationReport report() const;

  const std::vector<PeerNode>& peers() const { return peers_; }
  const PeerNode& peer(std::string_view peer_id) const;
  // First serving peer; throws NetworkError when none is up.
  const PeerNode& reference_peer() const;
  const ledger::Ledger& archive() const { return archive_; }
  std::size_t queued() const { return queue_.size(); }

  const TxStatus* tx_status(const std::string& tx_id) const;
  const std::vector<TraceRecord>& trace() const { return trace_; }
  std::string trace_jsonl() const;
  void log(std::string actor, std::string action, std::string detail);

  // Participant name or id -> participant id; empty when unknown.
  std::string resolve_participant(std::string_view who) const;
  const chaincode::ChaincodeConfig& chaincode_config() const { return cc_config_; }

 private:
  struct Subscription {
    EventFilter filter;
    std::string host_org;
    std::uint64_t next_height = 0;
    std::deque<Event> pending;
  };

  PeerNode& mutable_peer(std::string_view peer_id);
  void apply_fault(const Fault& fault);
  void deliver(PeerNode& peer, const Block& block);
  void commit(PeerNode& peer, const Block& block);
  void catch_up(PeerNode& peer);
  void record_statuses(const PeerNode& peer, const Block& block);
  void pull_subscriptions();
  const PeerNode* host_for(const Subscription& sub) const;
  std::vector<std::string> endorsing_peers_of(const std::string& org) const;
  std::vector<EndorseOutcome> endorse_all(const std::vector<std::string>& peers, const Transaction& proposal) const;
  std::optional<std::string> acting_org(const EndorseOutcome& first) const;
  bool has_open_operations() const;
  void reject(const std::string& tx_id, const std::string& submitter, const std::string& why);

  NetworkConfig config_;
  chaincode::ChaincodeConfig cc_config_;
  std::vector<PeerNode> peers_;
  ledger::Ledger archive_;
  std::deque<Transaction> queue_;
  bool heartbeat_ = false;
  std::uint64_t step_ = 0;
  std::uint64_t tx_counter_ = 0;
  std::uint64_t status_height_ = 1;  // next block height whose statuses are unset
  std::vector<Fault> pending_faults_;
  std::set<std::string> dropped_ops_;
  std::vector<Subscription> subscriptions_;
  std::vector<Actor*> actors_;
  std::unique_ptr<Actor> sweeper_;
  std::map<std::string, TxStatus> statuses_;
  std::map<std::string, std::string> names_by_id_;
  std::set<std::string> known_ops_;
  std::vector<TraceRecord> trace_;
  std::uint64_t submitted_ = 0;
  std::uint64_t rejected_ = 0;
  std::uint64_t invalidated_ = 0;
};

// Open operations whose expiry would be accepted on this snapshot.
std::vector<std::string> expirable_operations(const ledger::WorldState& state, std::uint64_t timeout);
std::vector<assets::OperationAsset> open_operations(const ledger::WorldState& state);

}  // namespace provledger::network
