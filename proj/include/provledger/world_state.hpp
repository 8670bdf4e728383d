// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/block.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace provledger::ledger {

// A secondary index over world-state entries. `extract` maps one entry to
// the (argument, summary bytes) pairs it contributes. The index for a given
// argument is the key-ordered map of contributing entries.
struct IndexSpec {
  std::string name;
  std::function<std::vector<std::pair<std::string, Bytes>>(std::string_view key, ByteSpan value)> extract;
};

class IndexRegistry {
 public:
  void add(IndexSpec spec) { specs_.push_back(std::move(spec)); }
  const std::vector<IndexSpec>& specs() const { return specs_; }
  bool has(std::string_view name) const;

 private:
  std::vector<IndexSpec> specs_;
};

using IndexEntries = std::map<std::string, Bytes>;

// Digest over (u32 count, then key and summary bytes per entry).
Digest digest_index_entries(const IndexEntries& entries);

struct Entry {
  Bytes value;
  Version version;
  friend bool operator==(const Entry&, const Entry&) = default;
};

struct ApplyResult {
  std::vector<bool> validity_flags;
  std::vector<Event> events;
};

// Versioned key -> asset map. Single writer; copies are independent
// snapshots.
class WorldState {
 public:
  explicit WorldState(std::shared_ptr<const IndexRegistry> indexes = std::make_shared<IndexRegistry>());

  const Entry* find(std::string_view key) const;
  Version version_of(std::string_view key) const;
  const std::map<std::string, Entry, std::less<>>& entries() const { return entries_; }

  // Number of blocks applied so far; the next block must have this height.
  std::uint64_t next_height() const { return next_height_; }
  // Height of the last applied block; only meaningful when next_height() > 0.
  std::uint64_t height() const { return next_height_ == 0 ? 0 : next_height_ - 1; }

  const IndexEntries& index(std::string_view name, std::string_view arg) const;
  Digest index_digest(std::string_view name, std::string_view arg) const {
    return digest_index_entries(index(name, arg));
  }
  const std::shared_ptr<const IndexRegistry>& registry() const { return registry_; }

  // Processes the block in order with the MVCC check. Throws ChainBreakError
  // on a height mismatch.
  ApplyResult apply(const Block& block);

  // Canonical encoding of (next_height, entries); indexes are derived and
  // excluded.
  Bytes serialize() const;
  Digest digest() const { return Digest::of(serialize()); }

  friend bool operator==(const WorldState& a, const WorldState& b) {
    return a.next_height_ == b.next_height_ && a.entries_ == b.entries_;
  }

 private:
  bool validate(const Transaction& tx) const;
  void write(const std::string& key, const std::optional<Bytes>& value, Version version);

  std::shared_ptr<const IndexRegistry> registry_;
  std::map<std::string, Entry, std::less<>> entries_;
  // index name -> argument -> entries
  std::map<std::string, std::map<std::string, IndexEntries, std::less<>>, std::less<>> indexes_;
  std::uint64_t next_height_ = 0;
};

struct BlockApplication {
  WorldState state;
  std::vector<bool> validity_flags;
  std::vector<Event> events;
};

// Value-semantics form of WorldState::apply.
BlockApplication apply_block(WorldState state, const Block& block);

// Fold of apply_block from genesis. Throws ChainBreakError when the chain
// does not verify or when stored validity flags disagree with the MVCC
// outcome.
WorldState replay(const Ledger& ledger, std::shared_ptr<const IndexRegistry> indexes = std::make_shared<IndexRegistry>());

}  // namespace provledger::ledger
