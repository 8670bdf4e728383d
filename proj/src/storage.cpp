// SPDX-License-Identifier: Apache-2.0

#include "provledger/storage.hpp"

#include <algorithm>
#include <cctype>

namespace provledger::storage {

using assets::FileAsset;
using assets::OpType;

// ---------------------------------------------------------------------------
// PhysicalStore

void PhysicalStore::put(const std::string& file_id, Bytes bytes) {
  const std::uint64_t old = blobs_.contains(file_id) ? blobs_.at(file_id).size() : 0;
  if (bytes.size() > capacity_ - (used_ - old))
    throw StoreError(StoreError::Code::capacity, "capacity: " + storage_id_ + " cannot hold " +
                                                     std::to_string(bytes.size()) + " more bytes");
  used_ = used_ - old + bytes.size();
  blobs_[file_id] = std::move(bytes);
}

const Bytes& PhysicalStore::get(const std::string& file_id) const {
  auto it = blobs_.find(file_id);
  if (it == blobs_.end()) throw StoreError(StoreError::Code::not_found, "not-found: blob " + file_id + " on " + storage_id_);
  return it->second;
}

void PhysicalStore::copy(const std::string& src_id, const std::string& dst_id) { put(dst_id, get(src_id)); }

void PhysicalStore::remove(const std::string& file_id) {
  auto it = blobs_.find(file_id);
  if (it == blobs_.end()) throw StoreError(StoreError::Code::not_found, "not-found: blob " + file_id + " on " + storage_id_);
  used_ -= it->second.size();
  blobs_.erase(it);
}

Bytes PhysicalStore::transfer_out(const std::string& file_id) {
  Bytes b = get(file_id);
  remove(file_id);
  return b;
}

std::optional<Digest> PhysicalStore::digest_of(const std::string& file_id) const {
  auto it = blobs_.find(file_id);
  if (it == blobs_.end()) return std::nullopt;
  return Digest::of(it->second);
}

// ---------------------------------------------------------------------------
// Transforms

Bytes process_blob(ByteSpan program, ByteSpan input) {
  std::string tag(program.begin(), program.end());
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!tag.empty() && ws(tag.back())) tag.pop_back();
  tag.erase(tag.begin(), std::find_if_not(tag.begin(), tag.end(), ws));

  Bytes out(input.begin(), input.end());
  if (tag == "reverse") {
    std::reverse(out.begin(), out.end());
  } else if (tag == "uppercase") {
    for (auto& c : out) c = static_cast<std::uint8_t>(std::toupper(c));
  } else if (tag == "digest-stamp") {
    const auto hex = Digest::of(input).hex();
    out.push_back('\n');
    out.insert(out.end(), hex.begin(), hex.end());
  } else {
    throw ProgramError();
  }
  return out;
}

// ---------------------------------------------------------------------------
// DmsAgent

namespace {

constexpr unsigned kMaxAttempts = 8;

std::vector<std::string> split_ids(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    if (comma > start) out.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::optional<assets::OperationAsset> load_op(const network::PeerNode& host, const std::string& op_id) {
  return assets::StateView(host.state).load<assets::OperationAsset>(op_id);
}

}  // namespace

DmsAgent::DmsAgent(network::Network& net, std::string participant_name, std::string storage_id, StoreSet& stores,
                   OutOfBand& channel)
    : name_(std::move(participant_name)), storage_id_(std::move(storage_id)), stores_(stores), channel_(channel) {
  participant_id_ = net.resolve_participant(name_);
  if (participant_id_.empty()) throw network::NetworkError("unknown dms participant " + name_);
  org_id_ = net.config().find_participant(name_)->org;
  const auto me = participant_id_;
  subscription_ = net.subscribe([me](const ledger::Event& ev) { return ev.get("delegate") == me; }, org_id_);
}

PhysicalStore& DmsAgent::store(const std::string& storage_id) {
  auto it = stores_.find(storage_id);
  if (it == stores_.end()) throw StoreError(StoreError::Code::not_found, "missing replica: unknown store " + storage_id);
  return it->second;
}

const network::PeerNode* DmsAgent::host(const network::Network& net) const {
  for (const auto& p : net.peers())
    if (p.org_id == org_id_ && p.serving()) return &p;
  for (const auto& p : net.peers())
    if (p.serving()) return &p;
  return nullptr;
}

std::string DmsAgent::send(network::Network& net, Pending p) {
  auto r = net.submit({name_, p.kind, p.payload});
  net.log(name_, "send", p.kind + " op=" + p.op_id + " tx=" + r.tx_id + (r.accepted ? "" : " rejected: " + r.diagnostic));
  if (r.diagnostic != "dropped") outstanding_.emplace(r.tx_id, std::move(p));
  return r.tx_id;
}

void DmsAgent::on_step(network::Network& net) {
  const auto* h = host(net);
  for (auto it = outstanding_.begin(); it != outstanding_.end();) {
    const auto* st = net.tx_status(it->first);
    if (!st || st->state == network::TxState::queued) {
      ++it;
      continue;
    }
    if (st->state == network::TxState::invalidated || st->state == network::TxState::rejected) {
      Pending p = std::move(it->second);
      const auto op = h ? load_op(*h, p.op_id) : std::nullopt;
      if (op && assets::is_open(op->state) && p.attempts + 1 < kMaxAttempts) {
        ++p.attempts;
        retry_.push_back(std::move(p));
      } else if (!op || op->state != assets::OpState::completed) {
        net.log(name_, "give-up", p.kind + " op=" + p.op_id);
        release(p.op_id);
      }
    }
    it = outstanding_.erase(it);
  }

  auto retries = std::move(retry_);
  retry_.clear();
  for (auto& p : retries) {
    ++stats_.retries;
    send(net, std::move(p));
  }

  for (const auto& ev : net.drain(subscription_)) handle_event(net, ev);
}

std::vector<std::string> DmsAgent::handle_event(network::Network& net, const ledger::Event& ev) {
  ++stats_.events_seen;
  std::vector<std::string> sent;
  if (ev.get("delegate") != participant_id_) return sent;
  const auto op_id = ev.get("op_id");
  if (ev.name == chaincode::event::kOperationRequested) {
    ++stats_.acks;
    sent.push_back(send(net, {std::string(chaincode::kind::kAckOp), {{"op", op_id}}, op_id, 0}));
  } else if (ev.name == chaincode::event::kOperationAcked) {
    const auto* h = host(net);
    if (!h) return sent;
    ledger::Payload payload{{"op", op_id}};
    std::string reason;
    if (auto scripted = script_.find(op_id); scripted != script_.end()) {
      reason = scripted->second;
    } else if (auto result = perform(*h, ev, reason)) {
      payload.merge(*result);
    }
    if (!reason.empty()) {
      payload["outcome"] = "failure";
      payload["reason"] = reason;
    } else {
      payload["outcome"] = "success";
    }
    ++stats_.confirms;
    sent.push_back(send(net, {std::string(chaincode::kind::kConfirmOp), payload, op_id, 0}));
  } else if (ev.name == chaincode::event::kOperationCompleted) {
    finalize(ev);
  } else if (ev.name == chaincode::event::kOperationFailed) {
    release(op_id);
  }
  return sent;
}

std::optional<ledger::Payload> DmsAgent::perform(const network::PeerNode& h, const ledger::Event& ev,
                                                 std::string& reason) {
  const auto op_id = ev.get("op_id");
  const auto type = assets::op_type_from_string(ev.get("op_type"));
  const auto subjects = split_ids(ev.get("subject_files"));
  const assets::StateView view(h.state);
  auto& mine = store(storage_id_);

  const auto stage = [&](const std::string& file_id, Bytes bytes) -> ledger::Payload {
    const auto size = bytes.size();
    const auto digest = Digest::of(bytes);
    if (!mine.fits(size) && !mine.contains(file_id)) throw StoreError(StoreError::Code::capacity, "capacity");
    mine.put(file_id, std::move(bytes));
    staged_[op_id].push_back({storage_id_, file_id});
    return {{"size", std::to_string(size)}, {"digest", digest.hex()}};
  };
  const auto content = [](const Bytes& b) -> ledger::Payload {
    return {{"size", std::to_string(b.size())}, {"digest", Digest::of(b).hex()}};
  };

  try {
    const std::string subject = subjects.empty() ? std::string{} : subjects.front();
    switch (type) {
      case OpType::upload: {
        auto it = channel_.uploads.find(op_id);
        if (it == channel_.uploads.end()) {
          reason = "missing replica";
          return std::nullopt;
        }
        return stage(subject, it->second);
      }
      case OpType::download: {
        const Bytes& b = mine.get(subject);
        channel_.downloads[op_id] = b;
        return content(b);
      }
      case OpType::copy_local:
        return stage(ev.get("output_file"), mine.get(subject));
      case OpType::delete_file:
        if (!mine.contains(subject)) {
          reason = "missing replica";
          return std::nullopt;
        }
        return ledger::Payload{};
      case OpType::copy_remote:
        return stage(ev.get("output_file"), store(ev.get("src_storage")).get(subject));
      case OpType::transfer_remote:
        return stage(subject, store(ev.get("src_storage")).get(subject));
      case OpType::process: {
        const Bytes& program = mine.get(ev.get("program_file"));
        Bytes input;
        for (const auto& fid : subjects) {
          const auto f = view.load<FileAsset>(fid);
          if (!f) throw StoreError(StoreError::Code::not_found, "missing replica");
          const Bytes& part = store(f->home_storage).get(fid);
          input.insert(input.end(), part.begin(), part.end());
        }
        return stage(ev.get("output_file"), process_blob(program, input));
      }
    }
  } catch (const StoreError& e) {
    reason = e.code() == StoreError::Code::capacity ? "capacity" : "missing replica";
  } catch (const ProgramError& e) {
    reason = e.what();
  }
  return std::nullopt;
}

void DmsAgent::finalize(const ledger::Event& ev) {
  const auto op_id = ev.get("op_id");
  const auto type = assets::op_type_from_string(ev.get("op_type"));
  const auto subjects = split_ids(ev.get("subject_files"));
  staged_.erase(op_id);
  if (subjects.empty()) return;
  if (type == OpType::delete_file) {
    auto& mine = store(storage_id_);
    if (mine.contains(subjects.front())) mine.remove(subjects.front());
  } else if (type == OpType::transfer_remote) {
    auto& src = store(ev.get("src_storage"));
    if (src.contains(subjects.front())) src.remove(subjects.front());
  }
}

void DmsAgent::release(const std::string& op_id) {
  auto it = staged_.find(op_id);
  if (it == staged_.end()) return;
  for (const auto& s : it->second) {
    auto& st = store(s.storage_id);
    if (st.contains(s.file_id)) st.remove(s.file_id);
  }
  staged_.erase(it);
}

// ---------------------------------------------------------------------------
// Audit

std::vector<AuditEntry> audit(const ledger::WorldState& state, const StoreSet& stores) {
  std::vector<AuditEntry> out;
  std::set<std::pair<std::string, std::string>> accounted;  // (storage, file)
  const std::string prefix = std::string(assets::tag::kFile) + "/";
  const auto& entries = state.entries();
  for (auto it = entries.lower_bound(prefix); it != entries.end() && it->first.starts_with(prefix); ++it) {
    const auto f = assets::decode<FileAsset>(it->second.value);
    if (f.temporary) {
      accounted.insert({f.home_storage, f.file_id});
      continue;
    }
    for (const auto& r : f.replicas) {
      accounted.insert({r, f.file_id});
      AuditEntry e{f.file_id, r, f.content_digest.hex(), {}, "ok"};
      auto s = stores.find(r);
      const auto actual = s == stores.end() ? std::nullopt : s->second.digest_of(f.file_id);
      if (!actual) {
        e.status = "missing";
      } else {
        e.actual_digest = actual->hex();
        if (*actual != f.content_digest) e.status = "mismatch";
      }
      out.push_back(std::move(e));
    }
  }
  for (const auto& [sid, st] : stores) {
    for (const auto& [fid, bytes] : st.blobs()) {
      if (accounted.contains({sid, fid})) continue;
      out.push_back({fid, sid, {}, Digest::of(bytes).hex(), "orphan"});
    }
  }
  return out;
}

std::size_t audit_failures(const std::vector<AuditEntry>& entries) {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(),
                                                [](const AuditEntry& e) { return e.status != "ok"; }));
}

nlohmann::json audit_json(const std::vector<AuditEntry>& entries) {
  auto j = nlohmann::json::array();
  for (const auto& e : entries) {
    j.push_back({{"file_id", e.file_id},
                 {"storage_id", e.storage_id},
                 {"expected_digest", e.expected_digest},
                 {"actual_digest", e.actual_digest},
                 {"status", e.status}});
  }
  return j;
}

}  // namespace provledger::storage
