// SPDX-License-Identifier: Apache-2.0

#include "provledger/queries.hpp"

#include "provledger/config.hpp"

#include <algorithm>

namespace provledger::chaincode {

using assets::DirectoryAsset;
using assets::FileAsset;

namespace {

DirectoryAsset readable_directory(const assets::StateView& view, const std::string& dir_id,
                                  const std::string& requester) {
  auto dir = view.load<DirectoryAsset>(dir_id);
  if (!dir) throw ChaincodeError(Errc::not_found, "directory " + dir_id);
  if (!assets::check_access(view, requester, dir->read_acl, dir->owner).allowed)
    throw ChaincodeError(Errc::access_denied, "readACL on " + dir->key());
  return *dir;
}

std::string id_of(const std::string& key) { return key.substr(key.find('/') + 1); }

std::vector<std::string> split_path(const std::string& path) {
  if (path.empty() || path.front() != '/') throw ChaincodeError(Errc::bad_request, "path must be absolute: " + path);
  std::vector<std::string> parts;
  std::size_t start = 1;
  while (start < path.size()) {
    auto slash = path.find('/', start);
    if (slash == std::string::npos) slash = path.size();
    if (slash > start) parts.push_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return parts;
}

std::optional<std::string> child(const ledger::WorldState& state, const std::string& dir_id, const std::string& name,
                                 bool want_directory) {
  for (const auto& [key, summary] : state.index(kDirEntriesIndex, dir_id)) {
    const auto e = decode_dir_entry(summary);
    if (e.name != name || e.is_directory != want_directory) continue;
    if (!want_directory) {
      const auto* entry = state.find(key);
      if (!entry || assets::decode<FileAsset>(entry->value).temporary) continue;
    }
    return id_of(key);
  }
  return std::nullopt;
}

std::string op_of(const ledger::Transaction& tx) {
  if (tx.kind == kind::kRequestOp) return op_id_for_tx(tx.tx_id);
  if (auto it = tx.payload.find("op"); it != tx.payload.end()) return it->second;
  return {};
}

}  // namespace

std::vector<FileSummary> query_directory(const ledger::WorldState& state, const std::string& dir_id,
                                         const std::string& requester) {
  const assets::StateView view(state);
  readable_directory(view, dir_id, requester);
  std::vector<FileSummary> out;
  for (const auto& [key, summary] : state.index(kDirEntriesIndex, dir_id)) {
    if (decode_dir_entry(summary).is_directory) continue;
    const auto f = assets::decode<FileAsset>(state.find(key)->value);
    if (f.temporary) continue;
    out.push_back({f.file_id, f.name, f.owner, f.home_storage, f.size_bytes, f.content_digest});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.name != b.name ? a.name < b.name : a.file_id < b.file_id;
  });
  return out;
}

std::vector<DirectoryAsset> query_subdirectories(const ledger::WorldState& state, const std::string& dir_id,
                                                 const std::string& requester) {
  const assets::StateView view(state);
  readable_directory(view, dir_id, requester);
  std::vector<DirectoryAsset> out;
  for (const auto& [key, summary] : state.index(kDirEntriesIndex, dir_id)) {
    if (!decode_dir_entry(summary).is_directory) continue;
    out.push_back(assets::decode<DirectoryAsset>(state.find(key)->value));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

std::vector<HistoryEntry> query_history(const ledger::Ledger& ledger, const std::string& file_id) {
  const auto key = assets::make_key(assets::tag::kFile, file_id);
  std::vector<HistoryEntry> out;
  bool exists = false;
  for (const auto& block : ledger.blocks()) {
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
      if (i >= block.validity_flags.size() || !block.validity_flags[i]) continue;
      const auto& tx = block.transactions[i];
      auto w = tx.write_set.find(key);
      if (w == tx.write_set.end()) continue;
      HistoryEntry h{block.height, i, tx.tx_id, tx.kind, op_of(tx), {}};
      if (!w->second) {
        h.summary = "removed";
      } else {
        const auto f = assets::decode<FileAsset>(*w->second);
        h.summary = std::string(exists ? "updated" : "created") + (f.temporary ? " temporary" : "") + " name=" + f.name +
                    " dir=" + f.directory_id + " home=" + f.home_storage;
        if (!f.temporary) h.summary += " digest=" + f.content_digest.hex();
        if (!f.pending_op.empty()) h.summary += " held-by=" + f.pending_op;
      }
      exists = w->second.has_value();
      out.push_back(std::move(h));
    }
  }
  if (out.empty()) throw ChaincodeError(Errc::not_found, "file " + file_id);
  return out;
}

std::optional<TxCoordinate> locate_transaction(const ledger::Ledger& ledger, const std::string& tx_id) {
  for (const auto& block : ledger.blocks()) {
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
      if (block.transactions[i].tx_id != tx_id) continue;
      if (i < block.validity_flags.size() && block.validity_flags[i]) return TxCoordinate{block.height, i};
    }
  }
  return std::nullopt;
}

OperationStatus query_operation(const ledger::WorldState& state, const ledger::Ledger* ledger,
                                const std::string& op_id) {
  const assets::StateView view(state);
  auto op = view.load<assets::OperationAsset>(op_id);
  if (!op) throw ChaincodeError(Errc::not_found, "operation " + op_id);
  OperationStatus s{*op, {}, {}, {}};
  if (ledger) {
    s.request_at = locate_transaction(*ledger, op->request_tx);
    if (op->ack_tx) s.ack_at = locate_transaction(*ledger, *op->ack_tx);
    if (op->response_tx) s.response_at = locate_transaction(*ledger, *op->response_tx);
  }
  return s;
}

std::string resolve_directory(const ledger::WorldState& state, const std::string& path) {
  std::string id = root_directory_id();
  for (const auto& part : split_path(path)) {
    auto next = child(state, id, part, true);
    if (!next) throw ChaincodeError(Errc::not_found, "directory " + path);
    id = *next;
  }
  if (!state.find(assets::make_key(assets::tag::kDirectory, id))) throw ChaincodeError(Errc::not_found, "directory " + path);
  return id;
}

std::string resolve_file(const ledger::WorldState& state, const std::string& path) {
  auto parts = split_path(path);
  if (parts.empty()) throw ChaincodeError(Errc::bad_request, "path names no file: " + path);
  const auto name = parts.back();
  parts.pop_back();
  std::string dir_path = "/";
  for (const auto& p : parts) dir_path += p + "/";
  auto id = child(state, resolve_directory(state, dir_path), name, false);
  if (!id) throw ChaincodeError(Errc::not_found, "file " + path);
  return *id;
}

std::string directory_path(const ledger::WorldState& state, const std::string& dir_id) {
  const assets::StateView view(state);
  std::vector<std::string> parts;
  auto dir = view.load<DirectoryAsset>(dir_id);
  if (!dir) throw ChaincodeError(Errc::not_found, "directory " + dir_id);
  while (dir->parent_id) {
    parts.push_back(dir->name);
    dir = view.load<DirectoryAsset>(*dir->parent_id);
    if (!dir) throw ChaincodeError(Errc::not_found, "parent of directory " + dir_id);
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) out += "/" + *it;
  return out.empty() ? "/" : out;
}

}  // namespace provledger::chaincode
