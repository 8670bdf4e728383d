// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/chaincode.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace provledger::chaincode {

struct FileSummary {
  std::string file_id;
  std::string name;
  std::string owner;
  std::string home_storage;
  std::uint64_t size_bytes = 0;
  Digest content_digest;
  friend bool operator==(const FileSummary&, const FileSummary&) = default;
};

// Committed files whose directory is `dir_id`, sorted by name.
std::vector<FileSummary> query_directory(const ledger::WorldState& state, const std::string& dir_id,
                                         const std::string& requester);

// Child directories of `dir_id`, sorted by name. Same access rule.
std::vector<assets::DirectoryAsset> query_subdirectories(const ledger::WorldState& state, const std::string& dir_id,
                                                         const std::string& requester);

struct HistoryEntry {
  std::uint64_t block_height = 0;
  std::uint64_t tx_index = 0;
  std::string tx_id;
  std::string kind;
  std::string op_id;    // empty for administrative kinds
  std::string summary;  // "created", "updated" or "removed", plus details
};

// Valid committed transactions whose write set touches the file key, in
// ledger order.
std::vector<HistoryEntry> query_history(const ledger::Ledger& ledger, const std::string& file_id);

struct TxCoordinate {
  std::uint64_t block_height = 0;
  std::uint64_t tx_index = 0;
};

struct OperationStatus {
  assets::OperationAsset op;
  std::optional<TxCoordinate> request_at;
  std::optional<TxCoordinate> ack_at;
  std::optional<TxCoordinate> response_at;
};

// Current operation record; coordinates are filled in when a ledger is
// given.
OperationStatus query_operation(const ledger::WorldState& state, const ledger::Ledger* ledger,
                                const std::string& op_id);

// Finds the valid committed transaction with this id.
std::optional<TxCoordinate> locate_transaction(const ledger::Ledger& ledger, const std::string& tx_id);

// "/a/b" -> directory id. Throws ChaincodeError(not_found).
std::string resolve_directory(const ledger::WorldState& state, const std::string& path);
// "/a/b/file" -> committed file id. Throws ChaincodeError(not_found).
std::string resolve_file(const ledger::WorldState& state, const std::string& path);
// Absolute path of a directory.
std::string directory_path(const ledger::WorldState& state, const std::string& dir_id);

}  // namespace provledger::chaincode
