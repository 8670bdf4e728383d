// SPDX-License-Identifier: Apache-2.0

#include "provledger/block.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <sstream>

namespace provledger::ledger {
namespace {

constexpr char kMagic[] = "PROVLDG1";
constexpr std::size_t kMagicSize = 8;

std::optional<std::string> check_block(const Block& block, const Block* prev, std::uint64_t expected_height) {
  return check_block_hashed(block, block.recompute_hash(), prev, expected_height);
}

nlohmann::json payload_json(const Payload& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

}  // namespace

std::optional<std::string> check_block_hashed(const Block& block, const Digest& recomputed, const Block* prev,
                                              std::uint64_t expected_height) {
  if (block.height != expected_height) {
    return "height " + std::to_string(block.height) + " where " + std::to_string(expected_height) + " expected";
  }
  if (recomputed != block.block_hash) return "block hash does not match contents";
  const Digest expected_prev = prev ? prev->block_hash : Digest{};
  if (block.prev_hash != expected_prev) return "prev_hash does not link to predecessor";
  if (!block.validity_flags.empty() && block.validity_flags.size() != block.transactions.size())
    return "validity flag count differs from transaction count";
  return std::nullopt;
}

Digest Block::compute_hash(std::uint64_t height, const Digest& prev_hash, const std::vector<Transaction>& txs) {
  Writer w;
  w.u64(height);
  w.digest(prev_hash);
  w.u32(static_cast<std::uint32_t>(txs.size()));
  for (const auto& tx : txs) tx.encode(w);
  return Digest::of(w.data());
}

Block Block::make(std::uint64_t height, const Digest& prev_hash, std::vector<Transaction> txs) {
  Block b;
  b.height = height;
  b.prev_hash = prev_hash;
  b.transactions = std::move(txs);
  b.block_hash = b.recompute_hash();
  return b;
}

Digest Block::commit_digest() const {
  Writer w;
  w.digest(block_hash);
  w.u32(static_cast<std::uint32_t>(validity_flags.size()));
  for (bool f : validity_flags) w.boolean(f);
  return Digest::of(w.data());
}

Bytes Block::serialize() const {
  Writer w;
  w.u64(height);
  w.digest(prev_hash);
  w.u32(static_cast<std::uint32_t>(transactions.size()));
  for (const auto& tx : transactions) tx.encode(w);
  w.digest(block_hash);
  w.u32(static_cast<std::uint32_t>(validity_flags.size()));
  for (bool f : validity_flags) w.boolean(f);
  w.digest(commit_digest());
  return std::move(w).take();
}

Block Block::deserialize(ByteSpan frame) {
  Reader r(frame);
  Block b;
  b.height = r.u64();
  b.prev_hash = r.digest();
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) b.transactions.push_back(Transaction::decode(r));
  b.block_hash = r.digest();
  const auto n_flags = r.u32();
  for (std::uint32_t i = 0; i < n_flags; ++i) b.validity_flags.push_back(r.boolean());
  const Digest stored_commit = r.digest();
  r.expect_done();
  if (stored_commit != b.commit_digest())
    throw ChainBreakError("commit digest mismatch at height " + std::to_string(b.height));
  return b;
}

void Ledger::append(Block block) {
  const std::uint64_t expected_height = blocks_.size();
  const Digest expected_prev = blocks_.empty() ? Digest{} : blocks_.back().block_hash;
  if (block.height != expected_height) {
    throw ChainBreakError("chain break: expected height " + std::to_string(expected_height) + ", got " +
                          std::to_string(block.height));
  }
  if (block.prev_hash != expected_prev) {
    throw ChainBreakError("chain break at height " + std::to_string(block.height) + ": expected prev_hash " +
                          expected_prev.hex() + ", got " + block.prev_hash.hex());
  }
  if (block.recompute_hash() != block.block_hash) {
    throw ChainBreakError("chain break at height " + std::to_string(block.height) + ": block hash mismatch");
  }
  blocks_.push_back(std::move(block));
}

std::string VerificationReport::summary() const {
  if (intact) return "intact";
  std::ostringstream os;
  os << "corrupt: first-bad-height=" << *first_bad_height;
  if (!detail.empty()) os << " (" << detail << ")";
  return os.str();
}

VerificationReport verify_chain(const std::vector<Block>& blocks) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (auto err = check_block(blocks[i], i == 0 ? nullptr : &blocks[i - 1], i)) {
      return VerificationReport{false, i, *err};
    }
  }
  return {};
}

Bytes dump_ledger(const Ledger& ledger) {
  Bytes out(kMagic, kMagic + kMagicSize);
  for (const auto& block : ledger.blocks()) {
    const Bytes frame = block.serialize();
    Writer len;
    len.u64(frame.size());
    out.insert(out.end(), len.data().begin(), len.data().end());
    out.insert(out.end(), frame.begin(), frame.end());
  }
  return out;
}

std::vector<FrameRef> split_frames(ByteSpan dump) {
  if (dump.size() < kMagicSize || std::memcmp(dump.data(), kMagic, kMagicSize) != 0)
    throw DecodeError("not a ledger dump (bad magic)");
  std::vector<FrameRef> frames;
  std::size_t pos = kMagicSize;
  while (pos < dump.size()) {
    Reader r(dump.subspan(pos));
    const auto len = r.u64();
    pos += 8;
    if (len > dump.size() - pos) throw DecodeError("truncated frame at offset " + std::to_string(pos));
    frames.push_back(FrameRef{pos, static_cast<std::size_t>(len)});
    pos += len;
  }
  return frames;
}

Ledger load_ledger(ByteSpan dump) {
  Ledger ledger;
  for (const auto& f : split_frames(dump)) ledger.append(Block::deserialize(dump.subspan(f.offset, f.length)));
  return ledger;
}

VerificationReport verify_dump(ByteSpan dump) {
  if (dump.size() < kMagicSize || std::memcmp(dump.data(), kMagic, kMagicSize) != 0)
    return VerificationReport{false, 0, "not a ledger dump (bad magic)"};
  std::optional<Block> prev;
  std::size_t pos = kMagicSize;
  for (std::uint64_t i = 0; pos < dump.size(); ++i) {
    if (dump.size() - pos < 8) return VerificationReport{false, i, "truncated frame length"};
    const auto len = Reader(dump.subspan(pos, 8)).u64();
    pos += 8;
    if (len > dump.size() - pos) return VerificationReport{false, i, "frame length exceeds dump"};
    Block block;
    try {
      block = Block::deserialize(dump.subspan(pos, static_cast<std::size_t>(len)));
    } catch (const std::exception& e) {
      return VerificationReport{false, i, e.what()};
    }
    if (auto err = check_block(block, prev ? &*prev : nullptr, i)) return VerificationReport{false, i, *err};
    prev = std::move(block);
    pos += static_cast<std::size_t>(len);
  }
  return {};
}

std::string export_json_lines(const Ledger& ledger) {
  std::string out;
  for (const auto& block : ledger.blocks()) {
    nlohmann::json jb;
    jb["height"] = block.height;
    jb["prev_hash"] = block.prev_hash.hex();
    jb["block_hash"] = block.block_hash.hex();
    auto& txs = jb["transactions"] = nlohmann::json::array();
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
      const auto& tx = block.transactions[i];
      nlohmann::json jt;
      jt["tx_id"] = tx.tx_id;
      jt["kind"] = tx.kind;
      jt["submitter"] = tx.submitter;
      jt["payload"] = payload_json(tx.payload);
      auto& reads = jt["read_set"] = nlohmann::json::object();
      for (const auto& [k, v] : tx.read_set) reads[k] = {v.block_height, v.tx_index};
      auto& ranges = jt["range_reads"] = nlohmann::json::array();
      for (const auto& rr : tx.range_reads) ranges.push_back({{"index", rr.index}, {"arg", rr.arg}, {"digest", rr.result.hex()}});
      auto& writes = jt["write_set"] = nlohmann::json::object();
      for (const auto& [k, v] : tx.write_set) writes[k] = v ? nlohmann::json(to_hex(*v)) : nlohmann::json(nullptr);
      auto& events = jt["events"] = nlohmann::json::array();
      for (const auto& ev : tx.events) events.push_back({{"name", ev.name}, {"payload", payload_json(ev.payload)}});
      auto& ends = jt["endorsements"] = nlohmann::json::array();
      for (const auto& e : tx.endorsements) ends.push_back({{"peer", e.peer_id}, {"signature", e.signature.hex()}});
      if (!block.validity_flags.empty()) jt["valid"] = static_cast<bool>(block.validity_flags[i]);
      txs.push_back(std::move(jt));
    }
    out += jb.dump();
    out += '\n';
  }
  return out;
}

}  // namespace provledger::ledger
