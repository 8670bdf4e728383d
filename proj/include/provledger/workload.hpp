// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/scenario.hpp"

#include <cstdint>
#include <random>

namespace provledger::workload {

struct NetworkShape {
  std::size_t organizations = 4;
  std::size_t peers_per_org = 2;
  std::size_t users_per_org = 2;
};

// Orgs "org<i>" with peers "peer<i><letter>", users "user<i>_<j>", one DMS
// "dms<i>" and storage "s<i>" per org, and "admin" (orderer-admin) in org0.
// Batch size and timer are drawn from the seed.
NetworkConfig random_network(std::uint64_t seed, const NetworkShape& shape = {});

struct WorkloadOptions {
  std::uint64_t seed = 1;
  std::size_t operations = 120;  // requestOp proposals to issue
  std::uint64_t max_steps = 20000;
  // Optional fault: crash `crash_peer` at crash_at and recover it at
  // recover_at (0 = never).
  std::string crash_peer;
  std::uint64_t crash_at = 0;
  std::uint64_t recover_at = 0;
};

// Adaptive random client: each step inspects the reference peer's state and
// issues one plausible command by path, through a ScenarioRunner. The
// issued steps are recorded so the run can be replayed as a scenario file.
class RandomClient {
 public:
  RandomClient(Simulation& sim, std::uint64_t seed);

  scenario::ScenarioStep next();
  std::size_t operations_issued() const { return operations_; }

 private:
  struct FileInfo {
    std::string path;
    std::string id;
    std::string owner;  // participant name
    std::string home;   // storage name
    bool program = false;
  };

  std::uint64_t pick(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }
  bool chance(unsigned percent) { return pick(100) < percent; }
  std::string any_user();
  std::string acl_subset(const std::string& also = {});
  std::string other_storage(const std::string& storage);

  Simulation& sim_;
  std::mt19937_64 rng_;
  std::vector<std::string> users_;
  std::vector<std::string> storages_;
  std::map<std::string, std::string> names_by_id_;
  std::vector<std::string> groups_;  // labels
  std::size_t counter_ = 0;
  std::size_t operations_ = 0;
};

struct WorkloadRun {
  scenario::RunOutcome outcome;
  scenario::Scenario recorded;
  std::size_t operations = 0;
};

WorkloadRun run_random(Simulation& sim, const WorkloadOptions& options);

}  // namespace provledger::workload
