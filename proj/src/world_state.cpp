// SPDX-License-Identifier: Apache-2.0

#include "provledger/world_state.hpp"

namespace provledger::ledger {
namespace {
const IndexEntries kEmptyIndex;
}

bool IndexRegistry::has(std::string_view name) const {
  for (const auto& s : specs_)
    if (s.name == name) return true;
  return false;
}

Digest digest_index_entries(const IndexEntries& entries) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& [key, summary] : entries) {
    w.str(key);
    w.bytes(summary);
  }
  return Digest::of(w.data());
}

WorldState::WorldState(std::shared_ptr<const IndexRegistry> indexes) : registry_(std::move(indexes)) {
  if (!registry_) registry_ = std::make_shared<IndexRegistry>();
}

const Entry* WorldState::find(std::string_view key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

Version WorldState::version_of(std::string_view key) const {
  const Entry* e = find(key);
  return e ? e->version : Version{};
}

const IndexEntries& WorldState::index(std::string_view name, std::string_view arg) const {
  auto by_name = indexes_.find(name);
  if (by_name == indexes_.end()) return kEmptyIndex;
  auto by_arg = by_name->second.find(arg);
  return by_arg == by_name->second.end() ? kEmptyIndex : by_arg->second;
}

bool WorldState::validate(const Transaction& tx) const {
  for (const auto& [key, version] : tx.read_set) {
    if (version_of(key) != version) return false;
  }
  for (const auto& rr : tx.range_reads) {
    if (!registry_->has(rr.index)) return false;
    if (index_digest(rr.index, rr.arg) != rr.result) return false;
  }
  for (const auto& [key, _] : tx.write_set) {
    if (!tx.read_set.contains(key)) return false;
  }
  return true;
}

void WorldState::write(const std::string& key, const std::optional<Bytes>& value, Version version) {
  const auto& specs = registry_->specs();
  if (auto it = entries_.find(key); it != entries_.end()) {
    for (const auto& spec : specs) {
      for (const auto& [arg, _] : spec.extract(key, it->second.value)) {
        auto& by_arg = indexes_[spec.name];
        if (auto idx = by_arg.find(arg); idx != by_arg.end()) {
          idx->second.erase(key);
          if (idx->second.empty()) by_arg.erase(idx);
        }
      }
    }
    if (!value) entries_.erase(it);
  }
  if (!value) return;
  entries_.insert_or_assign(key, Entry{*value, version});
  for (const auto& spec : specs) {
    for (auto& [arg, summary] : spec.extract(key, *value)) {
      indexes_[spec.name][arg].insert_or_assign(key, std::move(summary));
    }
  }
}

ApplyResult WorldState::apply(const Block& block) {
  if (block.height != next_height_) {
    throw ChainBreakError("apply_block: world state expects height " + std::to_string(next_height_) + ", got " +
                          std::to_string(block.height));
  }
  ApplyResult result;
  result.validity_flags.reserve(block.transactions.size());
  for (std::size_t i = 0; i < block.transactions.size(); ++i) {
    const auto& tx = block.transactions[i];
    const bool valid = validate(tx);
    result.validity_flags.push_back(valid);
    if (!valid) continue;
    const Version version{block.height, i};
    for (const auto& [key, value] : tx.write_set) write(key, value, version);
    for (auto ev : tx.events) {
      ev.block_height = block.height;
      ev.tx_index = i;
      result.events.push_back(std::move(ev));
    }
  }
  ++next_height_;
  return result;
}

Bytes WorldState::serialize() const {
  Writer w;
  w.u64(next_height_);
  w.u32(static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [key, entry] : entries_) {
    w.str(key);
    w.bytes(entry.value);
    w.u64(entry.version.block_height);
    w.u64(entry.version.tx_index);
  }
  return std::move(w).take();
}

BlockApplication apply_block(WorldState state, const Block& block) {
  auto r = state.apply(block);
  return BlockApplication{std::move(state), std::move(r.validity_flags), std::move(r.events)};
}

WorldState replay(const Ledger& ledger, std::shared_ptr<const IndexRegistry> indexes) {
  const auto report = verify_chain(ledger);
  if (!report.intact) throw ChainBreakError("replay: chain is corrupt: " + report.summary());
  WorldState state(std::move(indexes));
  for (const auto& block : ledger.blocks()) {
    auto r = state.apply(block);
    if (!block.validity_flags.empty() && block.validity_flags != r.validity_flags) {
      throw ChainBreakError("replay: stored validity flags diverge at height " + std::to_string(block.height));
    }
  }
  return state;
}

}  // namespace provledger::ledger
