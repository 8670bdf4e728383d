// SPDX-License-Identifier: Apache-2.0

#include "provledger/transaction.hpp"

namespace provledger::ledger {
namespace {

void encode_proposal(Writer& w, const Transaction& tx) {
  w.str(tx.tx_id);
  w.str(tx.kind);
  w.str(tx.submitter);
  w.string_map(tx.payload);
}

void encode_results(Writer& w, const Transaction& tx) {
  w.u32(static_cast<std::uint32_t>(tx.read_set.size()));
  for (const auto& [key, version] : tx.read_set) {
    w.str(key);
    w.u64(version.block_height);
    w.u64(version.tx_index);
  }
  w.u32(static_cast<std::uint32_t>(tx.range_reads.size()));
  for (const auto& rr : tx.range_reads) {
    w.str(rr.index);
    w.str(rr.arg);
    w.digest(rr.result);
  }
  w.u32(static_cast<std::uint32_t>(tx.write_set.size()));
  for (const auto& [key, value] : tx.write_set) {
    w.str(key);
    w.boolean(value.has_value());
    if (value) w.bytes(*value);
  }
  w.u32(static_cast<std::uint32_t>(tx.events.size()));
  for (const auto& ev : tx.events) {
    w.str(ev.name);
    w.string_map(ev.payload);
  }
}

}  // namespace

Bytes Transaction::proposal_bytes() const {
  Writer w;
  encode_proposal(w, *this);
  return std::move(w).take();
}

Bytes Transaction::response_bytes() const {
  Writer w;
  encode_proposal(w, *this);
  encode_results(w, *this);
  return std::move(w).take();
}

void Transaction::encode(Writer& w) const {
  encode_proposal(w, *this);
  encode_results(w, *this);
  w.digest(signature);
  w.u32(static_cast<std::uint32_t>(endorsements.size()));
  for (const auto& e : endorsements) {
    w.str(e.peer_id);
    w.digest(e.signature);
  }
}

Transaction Transaction::decode(Reader& r) {
  Transaction tx;
  tx.tx_id = r.str();
  tx.kind = r.str();
  tx.submitter = r.str();
  tx.payload = r.string_map();

  const auto n_reads = r.u32();
  for (std::uint32_t i = 0; i < n_reads; ++i) {
    auto key = r.str();
    Version v;
    v.block_height = r.u64();
    v.tx_index = r.u64();
    if (!tx.read_set.empty() && key <= tx.read_set.rbegin()->first) throw DecodeError("read_set not in key order");
    tx.read_set.emplace_hint(tx.read_set.end(), std::move(key), v);
  }
  const auto n_ranges = r.u32();
  for (std::uint32_t i = 0; i < n_ranges; ++i) {
    RangeRead rr;
    rr.index = r.str();
    rr.arg = r.str();
    rr.result = r.digest();
    tx.range_reads.push_back(std::move(rr));
  }
  const auto n_writes = r.u32();
  for (std::uint32_t i = 0; i < n_writes; ++i) {
    auto key = r.str();
    std::optional<Bytes> value;
    if (r.boolean()) value = r.bytes();
    if (!tx.write_set.empty() && key <= tx.write_set.rbegin()->first) throw DecodeError("write_set not in key order");
    tx.write_set.emplace_hint(tx.write_set.end(), std::move(key), std::move(value));
  }
  const auto n_events = r.u32();
  for (std::uint32_t i = 0; i < n_events; ++i) {
    Event ev;
    ev.name = r.str();
    ev.payload = r.string_map();
    tx.events.push_back(std::move(ev));
  }
  tx.signature = r.digest();
  const auto n_endorsements = r.u32();
  for (std::uint32_t i = 0; i < n_endorsements; ++i) {
    Endorsement e;
    e.peer_id = r.str();
    e.signature = r.digest();
    tx.endorsements.push_back(std::move(e));
  }
  return tx;
}

}  // namespace provledger::ledger
