// SPDX-License-Identifier: Apache-2.0

#include "provledger/parallel.hpp"

#include <omp.h>

#include <optional>

namespace provledger::parallel {

int max_threads() { return omp_get_max_threads(); }

ledger::VerificationReport verify_chain(const std::vector<ledger::Block>& blocks) {
  const auto n = static_cast<long>(blocks.size());
  std::vector<Digest> hashes(blocks.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) hashes[i] = blocks[i].recompute_hash();

  for (long i = 0; i < n; ++i) {
    const auto* prev = i == 0 ? nullptr : &blocks[i - 1];
    if (auto err = ledger::check_block_hashed(blocks[i], hashes[i], prev, static_cast<std::uint64_t>(i)))
      return ledger::VerificationReport{false, static_cast<std::uint64_t>(i), *err};
  }
  return {};
}

std::vector<storage::AuditEntry> audit(const ledger::WorldState& state, const storage::StoreSet& stores) {
  // Serial pass fixes the entry order; digests are the expensive part.
  struct Job {
    const Bytes* blob;
    std::optional<Digest> digest;
  };
  std::vector<storage::AuditEntry> entries;
  std::vector<Job> jobs;
  std::set<std::pair<std::string, std::string>> accounted;
  const std::string prefix = std::string(assets::tag::kFile) + "/";
  const auto& all = state.entries();
  for (auto it = all.lower_bound(prefix); it != all.end() && it->first.starts_with(prefix); ++it) {
    const auto f = assets::decode<assets::FileAsset>(it->second.value);
    if (f.temporary) {
      accounted.insert({f.home_storage, f.file_id});
      continue;
    }
    for (const auto& r : f.replicas) {
      accounted.insert({r, f.file_id});
      const Bytes* blob = nullptr;
      if (auto s = stores.find(r); s != stores.end() && s->second.contains(f.file_id)) blob = &s->second.get(f.file_id);
      entries.push_back({f.file_id, r, f.content_digest.hex(), {}, "ok"});
      jobs.push_back({blob, std::nullopt});
    }
  }
  for (const auto& [sid, st] : stores) {
    for (const auto& [fid, bytes] : st.blobs()) {
      if (accounted.contains({sid, fid})) continue;
      entries.push_back({fid, sid, {}, {}, "orphan"});
      jobs.push_back({&bytes, std::nullopt});
    }
  }

  const auto n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i)
    if (jobs[i].blob) jobs[i].digest = Digest::of(*jobs[i].blob);

  for (long i = 0; i < n; ++i) {
    auto& e = entries[i];
    if (!jobs[i].digest) {
      e.status = "missing";
      continue;
    }
    e.actual_digest = jobs[i].digest->hex();
    if (e.status == "ok" && e.actual_digest != e.expected_digest) e.status = "mismatch";
  }
  return entries;
}

std::vector<bool> check_access_serial(const assets::WorldView& view, const std::vector<AccessQuery>& queries) {
  std::vector<bool> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i)
    out[i] = assets::check_access(view, queries[i].participant_id, queries[i].acl, queries[i].owner).allowed;
  return out;
}

std::vector<bool> check_access_batch(const assets::WorldView& view, const std::vector<AccessQuery>& queries) {
  // vector<bool> packs bits; write through a byte buffer.
  std::vector<unsigned char> tmp(queries.size());
  const auto n = static_cast<long>(queries.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < n; ++i)
    tmp[i] = assets::check_access(view, queries[i].participant_id, queries[i].acl, queries[i].owner).allowed ? 1 : 0;
  return std::vector<bool>(tmp.begin(), tmp.end());
}

}  // namespace provledger::parallel
