// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/assets.hpp"
#include "provledger/block.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace provledger {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OrgConfig {
  std::string id;
  std::vector<std::string> peers;
};

struct ParticipantConfig {
  std::string name;
  std::string org;
  std::set<assets::Role> roles;
};

struct StorageConfig {
  std::string name;
  std::string org;
  std::string dms;  // participant name
  std::uint64_t capacity_bytes = 1ull << 30;
};

struct EndorsementPolicyConfig {
  enum class Mode { per_org, k_of_n };
  Mode mode = Mode::per_org;
  std::size_t k = 1;
  std::vector<std::string> endorsers;  // peer ids or org ids
};

struct RootDirConfig {
  std::optional<std::string> owner;  // participant name
  // nullopt: every configured participant
  std::optional<std::vector<std::string>> read;
  std::optional<std::vector<std::string>> write;
};

// JSON schema (all keys optional unless noted):
//   organizations   [{id, peers: [peer ids]}]                    required
//   participants    [{name, org, roles: ["user"|"dms-service"|"orderer-admin"]}]
//   storages        [{name, org, dms, capacity}]
//   endorsement     {"policy": "per_org"} | {"k": K, "endorsers": [...]}
//   root            {owner, read: [names], write: [names]}
//   batch_size, batch_timer, op_timeout, seed, parallel_endorsement
struct NetworkConfig {
  std::vector<OrgConfig> organizations;
  std::vector<ParticipantConfig> participants;
  std::vector<StorageConfig> storages;
  EndorsementPolicyConfig endorsement;
  RootDirConfig root;
  std::size_t batch_size = 10;
  std::uint64_t batch_timer = 1;
  std::uint64_t op_timeout = 10;  // committed blocks; 0 disables expiry
  std::uint64_t seed = 0;
  bool parallel_endorsement = false;

  static NetworkConfig from_json(const nlohmann::json& j);
  static NetworkConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // Throws ConfigError; "empty network" when nothing is configured.
  void validate() const;

  const ParticipantConfig* find_participant(std::string_view name) const;
  const StorageConfig* find_storage(std::string_view name) const;
  const OrgConfig* find_org(std::string_view id) const;
  // Org owning the peer, or nullptr.
  const OrgConfig* org_of_peer(std::string_view peer_id) const;
  std::vector<std::string> all_peers() const;

  std::string participant_id(std::string_view name) const;
  std::string storage_id(std::string_view name) const;
  std::string verify_token(std::string_view name) const;
  Digest peer_secret(std::string_view peer_id) const;
  std::string root_owner_name() const;
};

std::string participant_id_for(std::string_view name);
std::string storage_id_for(std::string_view name);
std::string root_directory_id();

// Height-0 block: one genesis transaction per participant, per storage
// site, and one for the root directory "/".
ledger::Block make_genesis(const NetworkConfig& config);

}  // namespace provledger
