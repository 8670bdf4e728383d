// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/transaction.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace provledger::ledger {

class ChainBreakError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Block {
  std::uint64_t height = 0;
  Digest prev_hash;
  std::vector<Transaction> transactions;
  Digest block_hash;
  // Empty until a peer commits the block; then one flag per transaction.
  std::vector<bool> validity_flags;

  // SHA-256 over u64 height, prev_hash, u32 tx count, each transaction's
  // canonical encoding.
  static Digest compute_hash(std::uint64_t height, const Digest& prev_hash, const std::vector<Transaction>& txs);
  static Block make(std::uint64_t height, const Digest& prev_hash, std::vector<Transaction> txs);

  Digest recompute_hash() const { return compute_hash(height, prev_hash, transactions); }
  // Binds the validity flags to the block hash; stored in dump frames.
  Digest commit_digest() const;

  // Frame body: height, prev_hash, transactions, block_hash, flags,
  // commit digest.
  Bytes serialize() const;
  // Throws DecodeError on malformed input and ChainBreakError when the
  // stored commit digest does not match.
  static Block deserialize(ByteSpan frame);

  friend bool operator==(const Block&, const Block&) = default;
};

// Append-only chain. Nothing in this interface rewrites a committed block.
class Ledger {
 public:
  // Throws ChainBreakError naming the expected vs. actual height or hash.
  void append(Block block);

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  bool empty() const { return blocks_.empty(); }
  const Block& tip() const { return blocks_.back(); }
  const Block& at(std::uint64_t height) const { return blocks_.at(height); }

  friend bool operator==(const Ledger&, const Ledger&) = default;

 private:
  std::vector<Block> blocks_;
};

struct VerificationReport {
  bool intact = true;
  std::optional<std::uint64_t> first_bad_height;
  std::string detail;

  std::string summary() const;
};

// One block's checks given its recomputed hash; nullopt when it is sound.
std::optional<std::string> check_block_hashed(const Block& block, const Digest& recomputed, const Block* prev,
                                              std::uint64_t expected_height);

// Serial reference: recompute every hash and link, in height order.
VerificationReport verify_chain(const std::vector<Block>& blocks);
inline VerificationReport verify_chain(const Ledger& ledger) { return verify_chain(ledger.blocks()); }

// Dump format: 8-byte magic "PROVLDG1", then per block a u64 big-endian
// frame length followed by Block::serialize() bytes.
Bytes dump_ledger(const Ledger& ledger);
Ledger load_ledger(ByteSpan dump);

struct FrameRef {
  std::size_t offset = 0;  // of the frame body within the dump
  std::size_t length = 0;
};
// Splits a dump into frames without decoding them.
std::vector<FrameRef> split_frames(ByteSpan dump);

// Verifies a serialized dump frame by frame. Frames that fail to decode are
// reported at their frame index.
VerificationReport verify_dump(ByteSpan dump);

// One JSON object per line.
std::string export_json_lines(const Ledger& ledger);

}  // namespace provledger::ledger
