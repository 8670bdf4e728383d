// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/digest.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace provledger::assets {

// Asset keys are "<type-tag>/<id>" with lowercase UUID ids.
namespace tag {
inline constexpr std::string_view kFile = "file";
inline constexpr std::string_view kDirectory = "dir";
inline constexpr std::string_view kGroup = "grp";
inline constexpr std::string_view kParticipant = "par";
inline constexpr std::string_view kOperation = "op";
inline constexpr std::string_view kStorage = "sto";
}  // namespace tag

std::string make_key(std::string_view type_tag, std::string_view id);

struct ParsedKey {
  std::string type_tag;
  std::string id;
};
// Throws std::invalid_argument for anything outside the key scheme.
ParsedKey parse_key(std::string_view key);

enum class Role : std::uint8_t { user = 0, dms_service = 1, orderer_admin = 2 };
std::string_view to_string(Role r);
Role role_from_string(std::string_view s);

struct Participant {
  static constexpr std::string_view kTag = tag::kParticipant;

  std::string participant_id;
  std::string display_name;
  std::string org_id;
  std::string verify_token;
  std::set<Role> roles;

  bool has_role(Role r) const { return roles.contains(r); }
  std::string key() const { return make_key(kTag, participant_id); }
  friend bool operator==(const Participant&, const Participant&) = default;
};

enum class RefKind : std::uint8_t { participant = 0, group = 1 };

struct AclRef {
  RefKind kind = RefKind::participant;
  std::string id;

  // "participant:<id>" or "group:<id>"
  std::string to_string() const;
  static AclRef parse(std::string_view text);
  std::string key() const { return make_key(kind == RefKind::group ? tag::kGroup : tag::kParticipant, id); }
  friend auto operator<=>(const AclRef&, const AclRef&) = default;
};

using Acl = std::vector<AclRef>;

// Comma-separated AclRef::to_string form; empty string is the empty list.
std::string format_acl(const Acl& acl);
Acl parse_acl(std::string_view text);

struct FileAsset {
  static constexpr std::string_view kTag = tag::kFile;

  std::string file_id;
  std::string name;
  std::string directory_id;
  std::string owner;
  std::string home_storage;
  std::set<std::string> replicas;
  std::uint64_t size_bytes = 0;
  Digest content_digest;
  bool temporary = false;
  Acl read_acl;
  Acl write_acl;
  Acl exec_acl;
  std::string created_by_op;
  std::string last_op;
  // Non-empty while a delete or transfer holds the file.
  std::string pending_op;

  std::string key() const { return make_key(kTag, file_id); }
  friend bool operator==(const FileAsset&, const FileAsset&) = default;
};

struct DirectoryAsset {
  static constexpr std::string_view kTag = tag::kDirectory;

  std::string dir_id;
  std::string name;
  std::optional<std::string> parent_id;
  std::string owner;
  Acl read_acl;
  Acl write_acl;

  std::string key() const { return make_key(kTag, dir_id); }
  friend bool operator==(const DirectoryAsset&, const DirectoryAsset&) = default;
};

struct GroupAsset {
  static constexpr std::string_view kTag = tag::kGroup;

  std::string group_id;
  std::string name;
  std::string owner;
  std::vector<AclRef> members;

  bool has_member(const AclRef& ref) const;
  std::string key() const { return make_key(kTag, group_id); }
  friend bool operator==(const GroupAsset&, const GroupAsset&) = default;
};

enum class OpType : std::uint8_t { upload = 0, download, copy_local, delete_file, copy_remote, transfer_remote, process };
inline constexpr OpType kAllOpTypes[] = {OpType::upload,      OpType::download,        OpType::copy_local,
                                         OpType::delete_file, OpType::copy_remote,     OpType::transfer_remote,
                                         OpType::process};
std::string_view to_string(OpType t);
OpType op_type_from_string(std::string_view s);

// started -> pending -> {completed, error}; started -> error.
enum class OpState : std::uint8_t { started = 0, pending, completed, error };
std::string_view to_string(OpState s);
OpState op_state_from_string(std::string_view s);
bool is_allowed_transition(OpState from, OpState to);
inline bool is_open(OpState s) { return s == OpState::started || s == OpState::pending; }

struct OperationAsset {
  static constexpr std::string_view kTag = tag::kOperation;

  std::string op_id;
  OpType op_type = OpType::upload;
  OpState state = OpState::started;
  std::string requester;
  std::optional<std::string> delegate;
  std::vector<std::string> subject_files;
  std::string src_storage;
  std::string dst_storage;
  std::optional<std::string> program_file;
  // Where copy/process outputs (and uploads) land.
  std::string target_dir;
  std::string target_name;
  std::string output_file;
  std::string request_tx;
  std::optional<std::string> ack_tx;
  std::optional<std::string> response_tx;
  std::string error_info;
  std::uint64_t requested_height = 0;

  std::string key() const { return make_key(kTag, op_id); }
  friend bool operator==(const OperationAsset&, const OperationAsset&) = default;
};

struct StorageSite {
  static constexpr std::string_view kTag = tag::kStorage;

  std::string storage_id;
  std::string display_name;
  std::string org_id;
  std::string dms_participant;
  std::uint64_t capacity_bytes = 0;

  std::string key() const { return make_key(kTag, storage_id); }
  friend bool operator==(const StorageSite&, const StorageSite&) = default;
};

// Canonical binary encodings. Each starts with a one-byte type marker so a
// value can never be decoded as the wrong asset type.
Bytes encode(const Participant& a);
Bytes encode(const FileAsset& a);
Bytes encode(const DirectoryAsset& a);
Bytes encode(const GroupAsset& a);
Bytes encode(const OperationAsset& a);
Bytes encode(const StorageSite& a);

template <class T>
T decode(ByteSpan bytes);

template <>
Participant decode<Participant>(ByteSpan bytes);
template <>
FileAsset decode<FileAsset>(ByteSpan bytes);
template <>
DirectoryAsset decode<DirectoryAsset>(ByteSpan bytes);
template <>
GroupAsset decode<GroupAsset>(ByteSpan bytes);
template <>
OperationAsset decode<OperationAsset>(ByteSpan bytes);
template <>
StorageSite decode<StorageSite>(ByteSpan bytes);

}  // namespace provledger::assets
