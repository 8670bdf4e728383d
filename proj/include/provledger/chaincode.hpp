// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/acl.hpp"
#include "provledger/world_state.hpp"

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace provledger::chaincode {

using ledger::Payload;

// Processor names as they appear in Transaction::kind and scenario files.
namespace kind {
inline constexpr std::string_view kRequestOp = "requestOp";
inline constexpr std::string_view kAckOp = "ackOp";
inline constexpr std::string_view kConfirmOp = "confirmOp";
inline constexpr std::string_view kExpireOp = "expireOp";
inline constexpr std::string_view kMkdir = "mkdir";
inline constexpr std::string_view kRmdir = "rmdir";
inline constexpr std::string_view kMvfile = "mvfile";
inline constexpr std::string_view kGroup = "group";
inline constexpr std::string_view kSetAcl = "setacl";
inline constexpr std::string_view kLs = "ls";
inline constexpr std::string_view kHistory = "history";
inline constexpr std::string_view kOpstat = "opstat";
}  // namespace kind

inline constexpr std::array<std::string_view, 9> kMutatingKinds = {
    kind::kRequestOp, kind::kAckOp, kind::kConfirmOp, kind::kExpireOp, kind::kMkdir,
    kind::kRmdir,     kind::kMvfile, kind::kGroup,    kind::kSetAcl};
inline constexpr std::array<std::string_view, 3> kQueryKinds = {kind::kLs, kind::kHistory, kind::kOpstat};

// Event names.
namespace event {
inline constexpr std::string_view kOperationRequested = "OperationRequested";
inline constexpr std::string_view kOperationAcked = "OperationAcked";
inline constexpr std::string_view kOperationCompleted = "OperationCompleted";
inline constexpr std::string_view kOperationFailed = "OperationFailed";
inline constexpr std::string_view kFileCommitted = "FileCommitted";
}  // namespace event

enum class Errc { not_found, access_denied, conflict, invalid_transition, malformed_result, rejected, bad_request };
std::string_view to_string(Errc code);

class ChaincodeError : public std::runtime_error {
 public:
  ChaincodeError(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}
  Errc code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

struct ChaincodeConfig {
  std::uint64_t op_timeout_blocks = 10;  // 0 disables expiry
};

// Secondary index "dir-entries": argument = directory id, entries = every
// file (temporary ones included) and child directory inside it. Summary
// bytes are (u8 kind: 0 file / 1 dir, string name).
inline constexpr std::string_view kDirEntriesIndex = "dir-entries";
std::shared_ptr<const ledger::IndexRegistry> index_registry();

struct DirEntrySummary {
  bool is_directory = false;
  std::string name;
};
DirEntrySummary decode_dir_entry(ByteSpan summary);

struct ProcessorResult {
  ledger::ReadSet read_set;
  std::vector<ledger::RangeRead> range_reads;
  ledger::WriteSet write_set;
  std::vector<ledger::Event> events;
  friend bool operator==(const ProcessorResult&, const ProcessorResult&) = default;
};

// Execution context for one proposal. Reads go to an immutable snapshot and
// are recorded with their versions; writes are buffered.
class ProcessorContext : public assets::WorldView {
 public:
  ProcessorContext(const ledger::WorldState& snapshot, std::string submitter, std::string tx_id,
                   ChaincodeConfig config = {});

  std::optional<Bytes> get(std::string_view key) const override;
  const ledger::IndexEntries& scan(std::string_view index, const std::string& arg) const;

  template <class T>
  void put(const T& asset) {
    put_raw(asset.key(), assets::encode(asset));
  }
  void put_raw(const std::string& key, Bytes value);
  void remove(const std::string& key);
  void emit(ledger::Event ev) { events_.push_back(std::move(ev)); }

  const std::string& submitter() const { return submitter_; }
  const std::string& tx_id() const { return tx_id_; }
  // Orderer sequence hint: height of the snapshot the proposal runs on.
  std::uint64_t logical_time() const { return snapshot_.height(); }
  const ChaincodeConfig& config() const { return config_; }

  ProcessorResult take() &&;

 private:
  void record_read(const std::string& key) const;

  const ledger::WorldState& snapshot_;
  std::string submitter_;
  std::string tx_id_;
  ChaincodeConfig config_;
  mutable ledger::ReadSet reads_;
  mutable std::vector<ledger::RangeRead> range_reads_;
  ledger::WriteSet writes_;
  std::vector<ledger::Event> events_;
};

enum class Access { none, read, write, exec };

// Which storage's DMS becomes the operation's delegate.
enum class ActingStorage { target, subject_home, destination, program_home };

struct OperationRule {
  assets::OpType type;
  Access subject_access;      // on each subject file
  bool needs_target_dir;      // write on the directory receiving a new entry
  bool needs_dst_storage;     // a second storage named in params
  bool provisional_file;      // temporary FileAsset written at request
  bool locks_subject;         // pending_op written at request
  bool creates_output;        // new FileAsset written at confirm
  bool result_needs_content;  // success result must carry size + digest
  ActingStorage acting;
};

const std::array<OperationRule, 7>& operation_rules();
const OperationRule& rule_for(assets::OpType type);

// Request payload (all ids are raw UUIDs):
//   op_type  upload|download|copy_local|delete|copy_remote|transfer_remote|process
//   upload:          dir, name, storage, [read, write, exec]
//   download:        file
//   copy_local:      file, [dir], [name]
//   copy_remote:     file, storage, [dir], [name]
//   delete:          file
//   transfer_remote: file, storage
//   process:         program, inputs (comma list), dir, name
void request_operation(ProcessorContext& ctx, const Payload& params);
// Payload: op
void ack_operation(ProcessorContext& ctx, const Payload& params);
// Payload: op, outcome=success|failure, size, digest (success), reason (failure)
void confirm_operation(ProcessorContext& ctx, const Payload& params);
// Payload: op
void expire_operation(ProcessorContext& ctx, const Payload& params);
// Payload: name, parent, [read, write]
void admin_create_directory(ProcessorContext& ctx, const Payload& params);
// Payload: dir
void admin_delete_directory(ProcessorContext& ctx, const Payload& params);
// Payload: file, dir
void admin_move_file(ProcessorContext& ctx, const Payload& params);
// Payload: action=create (name, [members]) | add_member/remove_member (group, member) | delete (group)
void admin_group(ProcessorContext& ctx, const Payload& params);
// Payload: asset (full key), list=readACL|writeACL|execACL, entries
void admin_set_acl(ProcessorContext& ctx, const Payload& params);

// Dispatches a mutating kind. Query kinds and unknown kinds are bad
// requests. The submitter must be a registered participant.
ProcessorResult execute(const ledger::WorldState& snapshot, const std::string& submitter, const std::string& tx_id,
                        std::string_view kind, const Payload& payload, const ChaincodeConfig& config = {});

bool is_mutating_kind(std::string_view kind);

// Derived ids; computable by clients before submission.
std::string op_id_for_tx(std::string_view tx_id);
std::string file_id_for_tx(std::string_view tx_id);
std::string output_file_id_for_tx(std::string_view tx_id);
std::string dir_id_for_tx(std::string_view tx_id);
std::string group_id_for_tx(std::string_view tx_id);

}  // namespace provledger::chaincode
