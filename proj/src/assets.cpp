// SPDX-License-Identifier: Apache-2.0

#include "provledger/assets.hpp"

#include "provledger/codec.hpp"

#include <algorithm>
#include <array>

namespace provledger::assets {
namespace {

enum Marker : std::uint8_t {
  kParticipantMarker = 0x50,
  kFileMarker = 0x46,
  kDirectoryMarker = 0x44,
  kGroupMarker = 0x47,
  kOperationMarker = 0x4f,
  kStorageMarker = 0x53,
};

constexpr std::array<std::string_view, 6> kTags = {tag::kFile,        tag::kDirectory, tag::kGroup,
                                                   tag::kParticipant, tag::kOperation, tag::kStorage};

void put_acl(Writer& w, const Acl& acl) {
  w.u32(static_cast<std::uint32_t>(acl.size()));
  for (const auto& ref : acl) {
    w.u8(static_cast<std::uint8_t>(ref.kind));
    w.str(ref.id);
  }
}

Acl get_acl(Reader& r) {
  Acl acl;
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto kind = r.u8();
    if (kind > 1) throw DecodeError("invalid acl ref kind");
    acl.push_back(AclRef{static_cast<RefKind>(kind), r.str()});
  }
  return acl;
}

void put_opt(Writer& w, const std::optional<std::string>& v) {
  w.boolean(v.has_value());
  if (v) w.str(*v);
}

std::optional<std::string> get_opt(Reader& r) {
  if (!r.boolean()) return std::nullopt;
  return r.str();
}

void expect_marker(Reader& r, Marker m, const char* what) {
  if (r.u8() != m) throw DecodeError(std::string("value is not a ") + what);
}

template <class Enum>
Enum get_enum(Reader& r, std::uint8_t max, const char* what) {
  const auto v = r.u8();
  if (v > max) throw DecodeError(std::string("invalid ") + what);
  return static_cast<Enum>(v);
}

}  // namespace

std::string make_key(std::string_view type_tag, std::string_view id) {
  std::string key;
  key.reserve(type_tag.size() + 1 + id.size());
  key.append(type_tag);
  key.push_back('/');
  key.append(id);
  return key;
}

ParsedKey parse_key(std::string_view key) {
  const auto slash = key.find('/');
  if (slash == std::string_view::npos) throw std::invalid_argument("asset key without '/': " + std::string(key));
  const auto type_tag = key.substr(0, slash);
  const auto id = key.substr(slash + 1);
  if (std::find(kTags.begin(), kTags.end(), type_tag) == kTags.end())
    throw std::invalid_argument("unknown asset type tag: " + std::string(type_tag));
  if (!is_uuid(id)) throw std::invalid_argument("asset id is not a lowercase uuid: " + std::string(id));
  return ParsedKey{std::string(type_tag), std::string(id)};
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::user:
      return "user";
    case Role::dms_service:
      return "dms-service";
    case Role::orderer_admin:
      return "orderer-admin";
  }
  return "?";
}

Role role_from_string(std::string_view s) {
  if (s == "user") return Role::user;
  if (s == "dms-service") return Role::dms_service;
  if (s == "orderer-admin") return Role::orderer_admin;
  throw std::invalid_argument("unknown role: " + std::string(s));
}

std::string AclRef::to_string() const {
  return (kind == RefKind::group ? "group:" : "participant:") + id;
}

AclRef AclRef::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("acl entry without kind: " + std::string(text));
  const auto kind = text.substr(0, colon);
  AclRef ref;
  if (kind == "group") {
    ref.kind = RefKind::group;
  } else if (kind == "participant") {
    ref.kind = RefKind::participant;
  } else {
    throw std::invalid_argument("unknown acl entry kind: " + std::string(kind));
  }
  ref.id = std::string(text.substr(colon + 1));
  if (ref.id.empty()) throw std::invalid_argument("acl entry with empty id");
  return ref;
}

std::string format_acl(const Acl& acl) {
  std::string out;
  for (const auto& ref : acl) {
    if (!out.empty()) out.push_back(',');
    out += ref.to_string();
  }
  return out;
}

Acl parse_acl(std::string_view text) {
  Acl acl;
  while (!text.empty()) {
    const auto comma = text.find(',');
    acl.push_back(AclRef::parse(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return acl;
}

bool GroupAsset::has_member(const AclRef& ref) const {
  return std::find(members.begin(), members.end(), ref) != members.end();
}

std::string_view to_string(OpType t) {
  switch (t) {
    case OpType::upload:
      return "upload";
    case OpType::download:
      return "download";
    case OpType::copy_local:
      return "copy_local";
    case OpType::delete_file:
      return "delete";
    case OpType::copy_remote:
      return "copy_remote";
    case OpType::transfer_remote:
      return "transfer_remote";
    case OpType::process:
      return "process";
  }
  return "?";
}

OpType op_type_from_string(std::string_view s) {
  for (auto t : kAllOpTypes)
    if (to_string(t) == s) return t;
  throw std::invalid_argument("unknown op_type: " + std::string(s));
}

std::string_view to_string(OpState s) {
  switch (s) {
    case OpState::started:
      return "started";
    case OpState::pending:
      return "pending";
    case OpState::completed:
      return "completed";
    case OpState::error:
      return "error";
  }
  return "?";
}

OpState op_state_from_string(std::string_view s) {
  for (auto st : {OpState::started, OpState::pending, OpState::completed, OpState::error})
    if (to_string(st) == s) return st;
  throw std::invalid_argument("unknown operation state: " + std::string(s));
}

bool is_allowed_transition(OpState from, OpState to) {
  switch (from) {
    case OpState::started:
      return to == OpState::pending || to == OpState::error;
    case OpState::pending:
      return to == OpState::completed || to == OpState::error;
    case OpState::completed:
    case OpState::error:
      return false;
  }
  return false;
}

Bytes encode(const Participant& a) {
  Writer w;
  w.u8(kParticipantMarker);
  w.str(a.participant_id);
  w.str(a.display_name);
  w.str(a.org_id);
  w.str(a.verify_token);
  w.u32(static_cast<std::uint32_t>(a.roles.size()));
  for (auto r : a.roles) w.u8(static_cast<std::uint8_t>(r));
  return std::move(w).take();
}

template <>
Participant decode<Participant>(ByteSpan bytes) {
  Reader r(bytes);
  expect_marker(r, kParticipantMarker, "participant");
  Participant a;
  a.participant_id = r.str();
  a.display_name = r.str();
  a.org_id = r.str();
  a.verify_token = r.str();
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) a.roles.insert(get_enum<Role>(r, 2, "role"));
  r.expect_done();
  return a;
}

Bytes encode(const FileAsset& a) {
  Writer w;
  w.u8(kFileMarker);
  w.str(a.file_id);
  w.str(a.name);
  w.str(a.directory_id);
  w.str(a.owner);
  w.str(a.home_storage);
  w.string_list(std::vector<std::string>(a.replicas.begin(), a.replicas.end()));
  w.u64(a.size_bytes);
  w.digest(a.content_digest);
  w.boolean(a.temporary);
  put_acl(w, a.read_acl);
  put_acl(w, a.write_acl);
  put_acl(w, a.exec_acl);
  w.str(a.created_by_op);
  w.str(a.last_op);
  w.str(a.pending_op);
  return std::move(w).take();
}

template <>
FileAsset decode<FileAsset>(ByteSpan bytes) {
  Reader r(bytes);
  expect_marker(r, kFileMarker, "file");
  FileAsset a;
  a.file_id = r.str();
  a.name = r.str();
  a.directory_id = r.str();
  a.owner = r.str();
  a.home_storage = r.str();
  for (auto& s : r.string_list()) a.replicas.insert(std::move(s));
  a.size_bytes = r.u64();
  a.content_digest = r.digest();
  a.temporary = r.boolean();
  a.read_acl = get_acl(r);
  a.write_acl = get_acl(r);
  a.exec_acl = get_acl(r);
  a.created_by_op = r.str();
  a.last_op = r.str();
  a.pending_op = r.str();
  r.expect_done();
  return a;
}

Bytes encode(const DirectoryAsset& a) {
  Writer w;
  w.u8(kDirectoryMarker);
  w.str(a.dir_id);
  w.str(a.name);
  put_opt(w, a.parent_id);
  w.str(a.owner);
  put_acl(w, a.read_acl);
  put_acl(w, a.write_acl);
  return std::move(w).take();
}

template <>
DirectoryAsset decode<DirectoryAsset>(ByteSpan bytes) {
  Reader r(bytes);
  expect_marker(r, kDirectoryMarker, "directory");
  DirectoryAsset a;
  a.dir_id = r.str();
  a.name = r.str();
  a.parent_id = get_opt(r);
  a.owner = r.str();
  a.read_acl = get_acl(r);
  a.write_acl = get_acl(r);
  r.expect_done();
  return a;
}

Bytes encode(const GroupAsset& a) {
  Writer w;
  w.u8(kGroupMarker);
  w.str(a.group_id);
  w.str(a.name);
  w.str(a.owner);
  put_acl(w, a.members);
  return std::move(w).take();
}

template <>
GroupAsset decode<GroupAsset>(ByteSpan bytes) {
  Reader r(bytes);
  expect_marker(r, kGroupMarker, "group");
  GroupAsset a;
  a.group_id = r.str();
  a.name = r.str();
  a.owner = r.str();
  a.members = get_acl(r);
  r.expect_done();
  return a;
}

Bytes encode(const OperationAsset& a) {
  Writer w;
  w.u8(kOperationMarker);
  w.str(a.op_id);
  w.u8(static_cast<std::uint8_t>(a.op_type));
  w.u8(static_cast<std::uint8_t>(a.state));
  w.str(a.requester);
  put_opt(w, a.delegate);
  w.string_list(a.subject_files);
  w.str(a.src_storage);
  w.str(a.dst_storage);
  put_opt(w, a.program_file);
  w.str(a.target_dir);
  w.str(a.target_name);
  w.str(a.output_file);
  w.str(a.request_tx);
  put_opt(w, a.ack_tx);
  put_opt(w, a.response_tx);
  w.str(a.error_info);
  w.u64(a.requested_height);
  return std::move(w).take();
}

template <>
OperationAsset decode<OperationAsset>(ByteSpan bytes) {
  Reader r(bytes);
  expect_marker(r, kOperationMarker, "operation");
  OperationAsset a;
  a.op_id = r.str();
  a.op_type = get_enum<OpType>(r, 6, "op_type");
  a.state = get_enum<OpState>(r, 3, "op state");
  a.requester = r.str();
  a.delegate = get_opt(r);
  a.subject_files = r.string_list();
  a.src_storage = r.str();
  a.dst_storage = r.str();
  a.program_file = get_opt(r);
  a.target_dir = r.str();
  a.target_name = r.str();
  a.output_file = r.str();
  a.request_tx = r.str();
  a.ack_tx = get_opt(r);
  a.response_tx = get_opt(r);
  a.error_info = r.str();
  a.requested_height = r.u64();
  r.expect_done();
  return a;
}

Bytes encode(const StorageSite& a) {
  Writer w;
  w.u8(kStorageMarker);
  w.str(a.storage_id);
  w.str(a.display_name);
  w.str(a.org_id);
  w.str(a.dms_participant);
  w.u64(a.capacity_bytes);
  return std::move(w).take();
}

template <>
StorageSite decode<StorageSite>(ByteSpan bytes) {
  Reader r(bytes);
  expect_marker(r, kStorageMarker, "storage site");
  StorageSite a;
  a.storage_id = r.str();
  a.display_name = r.str();
  a.org_id = r.str();
  a.dms_participant = r.str();
  a.capacity_bytes = r.u64();
  r.expect_done();
  return a;
}

}  // namespace provledger::assets
