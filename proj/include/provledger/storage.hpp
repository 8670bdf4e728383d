// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/network.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace provledger::storage {

class StoreError : public std::runtime_error {
 public:
  enum class Code { not_found, capacity };
  StoreError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// Blob store of one storage site. used_bytes is always the sum of blob
// lengths and never exceeds capacity.
class PhysicalStore {
 public:
  PhysicalStore(std::string storage_id, std::uint64_t capacity_bytes)
      : storage_id_(std::move(storage_id)), capacity_(capacity_bytes) {}

  const std::string& storage_id() const { return storage_id_; }
  std::uint64_t used_bytes() const { return used_; }
  std::uint64_t capacity_bytes() const { return capacity_; }
  bool fits(std::uint64_t extra) const { return extra <= capacity_ - used_; }

  // Replaces an existing blob. Throws StoreError(capacity).
  void put(const std::string& file_id, Bytes bytes);
  // Throws StoreError(not_found).
  const Bytes& get(const std::string& file_id) const;
  bool contains(const std::string& file_id) const { return blobs_.contains(file_id); }
  void copy(const std::string& src_id, const std::string& dst_id);
  // Throws StoreError(not_found).
  void remove(const std::string& file_id);
  Bytes transfer_out(const std::string& file_id);
  void transfer_in(const std::string& file_id, Bytes bytes) { put(file_id, std::move(bytes)); }

  std::optional<Digest> digest_of(const std::string& file_id) const;
  const std::map<std::string, Bytes>& blobs() const { return blobs_; }

 private:
  std::string storage_id_;
  std::uint64_t capacity_;
  std::uint64_t used_ = 0;
  std::map<std::string, Bytes> blobs_;
};

using StoreSet = std::map<std::string, PhysicalStore>;

class ProgramError : public std::runtime_error {
 public:
  ProgramError() : std::runtime_error("bad program") {}
};

// Built-in transforms, selected by the program blob's text (surrounding
// whitespace ignored): "reverse", "uppercase", "digest-stamp".
Bytes process_blob(ByteSpan program, ByteSpan input);

// Bytes that travel outside the ledger: client uploads keyed by op id, and
// bytes handed back to clients for downloads.
struct OutOfBand {
  std::map<std::string, Bytes> uploads;
  std::map<std::string, Bytes> downloads;
};

// Scripted failure for one op: the agent confirms failure(reason) instead of
// acting.
using FailureScript = std::map<std::string, std::string>;

struct AgentStats {
  std::uint64_t acks = 0;
  std::uint64_t confirms = 0;
  std::uint64_t retries = 0;
  std::uint64_t events_seen = 0;
};

// Data-management service of one storage site. Acts only on operations
// whose recorded delegate is this agent, processes events in commit order.
class DmsAgent : public network::Actor {
 public:
  DmsAgent(network::Network& net, std::string participant_name, std::string storage_id, StoreSet& stores,
           OutOfBand& channel);

  std::string name() const override { return name_; }
  void on_step(network::Network& net) override;
  bool busy() const override { return !outstanding_.empty() || !retry_.empty(); }

  // Handles one committed event; returns the tx ids it submitted.
  std::vector<std::string> handle_event(network::Network& net, const ledger::Event& ev);

  const std::string& participant_id() const { return participant_id_; }
  const std::string& storage_id() const { return storage_id_; }
  const AgentStats& stats() const { return stats_; }
  FailureScript& failure_script() { return script_; }

 private:
  struct Pending {
    std::string kind;
    ledger::Payload payload;
    std::string op_id;
    unsigned attempts = 0;
  };
  struct Staged {
    std::string storage_id;
    std::string file_id;
  };

  void act(network::Network& net, const ledger::Event& ev);
  void finalize(const ledger::Event& ev);
  void release(const std::string& op_id);
  std::string send(network::Network& net, Pending p);
  std::optional<ledger::Payload> perform(const network::PeerNode& host, const ledger::Event& ev, std::string& reason);
  const network::PeerNode* host(const network::Network& net) const;
  PhysicalStore& store(const std::string& storage_id);

  std::string name_;
  std::string participant_id_;
  std::string storage_id_;
  std::string org_id_;
  StoreSet& stores_;
  OutOfBand& channel_;
  network::SubscriptionId subscription_;
  FailureScript script_;
  std::map<std::string, Pending> outstanding_;  // tx id -> request
  std::vector<Pending> retry_;
  std::map<std::string, std::vector<Staged>> staged_;  // op id -> blobs written
  AgentStats stats_;
};

struct AuditEntry {
  std::string file_id;
  std::string storage_id;
  std::string expected_digest;
  std::string actual_digest;
  std::string status;  // ok | mismatch | missing | orphan
  friend bool operator==(const AuditEntry&, const AuditEntry&) = default;
};

// On/off-chain comparison over a committed world state: every replica of
// every committed file, plus blobs that no committed file accounts for.
std::vector<AuditEntry> audit(const ledger::WorldState& state, const StoreSet& stores);
std::size_t audit_failures(const std::vector<AuditEntry>& entries);
nlohmann::json audit_json(const std::vector<AuditEntry>& entries);

}  // namespace provledger::storage
