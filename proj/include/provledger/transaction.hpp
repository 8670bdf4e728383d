// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/codec.hpp"
#include "provledger/digest.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace provledger::ledger {

// Commit coordinate of the last write to a key. (0,0) doubles as "absent".
struct Version {
  std::uint64_t block_height = 0;
  std::uint64_t tx_index = 0;

  bool is_absent() const { return block_height == 0 && tx_index == 0; }
  friend auto operator<=>(const Version&, const Version&) = default;
};

using Payload = std::map<std::string, std::string>;

// Declared by a transaction processor; coordinates are stamped at commit.
struct Event {
  std::string name;
  Payload payload;
  std::uint64_t block_height = 0;
  std::uint64_t tx_index = 0;

  std::string get(const std::string& field) const {
    auto it = payload.find(field);
    return it == payload.end() ? std::string{} : it->second;
  }
  friend bool operator==(const Event&, const Event&) = default;
};

// A read over a world-state secondary index. At commit the index is
// re-evaluated; a differing digest invalidates the transaction (phantoms).
struct RangeRead {
  std::string index;
  std::string arg;
  Digest result;
  friend bool operator==(const RangeRead&, const RangeRead&) = default;
};

struct Endorsement {
  std::string peer_id;
  Digest signature;
  friend bool operator==(const Endorsement&, const Endorsement&) = default;
};

using ReadSet = std::map<std::string, Version>;
// nullopt is a tombstone (key removed from world state).
using WriteSet = std::map<std::string, std::optional<Bytes>>;

struct Transaction {
  std::string tx_id;
  std::string kind;
  std::string submitter;
  Payload payload;
  ReadSet read_set;
  std::vector<RangeRead> range_reads;
  WriteSet write_set;
  std::vector<Event> events;
  Digest signature;
  std::vector<Endorsement> endorsements;

  // Bytes the submitter signs.
  Bytes proposal_bytes() const;
  // Bytes each endorser signs: the proposal plus the simulated results.
  Bytes response_bytes() const;

  void encode(Writer& w) const;
  static Transaction decode(Reader& r);

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

inline constexpr char kGenesisKind[] = "genesis";

}  // namespace provledger::ledger
