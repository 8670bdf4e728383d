// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/network.hpp"
#include "provledger/queries.hpp"
#include "provledger/storage.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace provledger {

// A network plus one physical store and DMS agent per configured storage.
class Simulation {
 public:
  explicit Simulation(NetworkConfig config);

  network::Network& network() { return *network_; }
  const network::Network& network() const { return *network_; }
  storage::StoreSet& stores() { return stores_; }
  const storage::StoreSet& stores() const { return stores_; }
  storage::OutOfBand& channel() { return channel_; }
  const std::vector<std::unique_ptr<storage::DmsAgent>>& agents() const { return agents_; }
  storage::DmsAgent* agent_for_storage(const std::string& storage_id);

  // Upload bytes, when given, are handed to the acting DMS out of band.
  network::SubmitResult submit(const std::string& actor, std::string kind, ledger::Payload payload,
                               std::optional<Bytes> upload = std::nullopt);

  void step() { network_->step(); }
  network::SimulationReport run_until_quiescent(std::uint64_t max_steps) {
    return network_->run_until_quiescent(max_steps);
  }

  const ledger::WorldState& state() const { return network_->reference_peer().state; }
  const ledger::Ledger& ledger() const { return network_->reference_peer().ledger; }
  std::vector<storage::AuditEntry> audit() const { return storage::audit(state(), stores_); }

 private:
  std::unique_ptr<network::Network> network_;
  storage::StoreSet stores_;
  storage::OutOfBand channel_;
  std::vector<std::unique_ptr<storage::DmsAgent>> agents_;
};

struct InvariantResult {
  std::string name;
  bool ok = true;
  std::string detail;
};

// Every sweep below, over the simulation's current state.
//   replica-consistency, replay-equality, lifecycle-completeness,
//   temporary-invisibility, directory-listing-equivalence, audit,
//   dms-delegation, exactly-once-events
std::vector<InvariantResult> check_invariants(const Simulation& sim);

// query_directory versus the full-scan filter for every directory; returns
// the number of mismatching directories.
std::size_t listing_mismatches(const ledger::WorldState& state);

// Completed operations lacking two distinct committed transactions.
std::size_t two_record_violations(const ledger::WorldState& state, const ledger::Ledger& ledger);

}  // namespace provledger
