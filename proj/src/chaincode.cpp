// SPDX-License-Identifier: Apache-2.0

#include "provledger/chaincode.hpp"

#include "provledger/codec.hpp"

#include <algorithm>

namespace provledger::chaincode {

using assets::AclRef;
using assets::DirectoryAsset;
using assets::FileAsset;
using assets::GroupAsset;
using assets::OperationAsset;
using assets::OpState;
using assets::OpType;
using assets::Participant;
using assets::RefKind;
using assets::Role;
using assets::StorageSite;

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::not_found:
      return "not-found";
    case Errc::access_denied:
      return "access-denied";
    case Errc::conflict:
      return "conflict";
    case Errc::invalid_transition:
      return "invalid-transition";
    case Errc::malformed_result:
      return "malformed-result";
    case Errc::rejected:
      return "rejected";
    case Errc::bad_request:
      return "bad-request";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// dir-entries index

namespace {

Bytes dir_entry_summary(bool is_directory, std::string_view name) {
  Writer w;
  w.u8(is_directory ? 1 : 0);
  w.str(name);
  return std::move(w).take();
}

std::vector<std::pair<std::string, Bytes>> extract_dir_entries(std::string_view key, ByteSpan value) {
  if (key.starts_with("file/")) {
    auto f = assets::decode<FileAsset>(value);
    return {{f.directory_id, dir_entry_summary(false, f.name)}};
  }
  if (key.starts_with("dir/")) {
    auto d = assets::decode<DirectoryAsset>(value);
    if (d.parent_id) return {{*d.parent_id, dir_entry_summary(true, d.name)}};
  }
  return {};
}

}  // namespace

std::shared_ptr<const ledger::IndexRegistry> index_registry() {
  static const auto registry = [] {
    auto r = std::make_shared<ledger::IndexRegistry>();
    r->add(ledger::IndexSpec{std::string(kDirEntriesIndex), extract_dir_entries});
    return std::shared_ptr<const ledger::IndexRegistry>(std::move(r));
  }();
  return registry;
}

DirEntrySummary decode_dir_entry(ByteSpan summary) {
  Reader r(summary);
  DirEntrySummary s;
  s.is_directory = r.u8() == 1;
  s.name = r.str();
  return s;
}

// ---------------------------------------------------------------------------
// ProcessorContext

ProcessorContext::ProcessorContext(const ledger::WorldState& snapshot, std::string submitter, std::string tx_id,
                                   ChaincodeConfig config)
    : snapshot_(snapshot), submitter_(std::move(submitter)), tx_id_(std::move(tx_id)), config_(config) {}

void ProcessorContext::record_read(const std::string& key) const {
  if (!reads_.contains(key)) reads_.emplace(key, snapshot_.version_of(key));
}

std::optional<Bytes> ProcessorContext::get(std::string_view key) const {
  const std::string k(key);
  if (auto w = writes_.find(k); w != writes_.end()) return w->second;
  record_read(k);
  const auto* e = snapshot_.find(k);
  if (!e) return std::nullopt;
  return e->value;
}

const ledger::IndexEntries& ProcessorContext::scan(std::string_view index, const std::string& arg) const {
  const auto& entries = snapshot_.index(index, arg);
  ledger::RangeRead rr{std::string(index), arg, ledger::digest_index_entries(entries)};
  if (std::find(range_reads_.begin(), range_reads_.end(), rr) == range_reads_.end()) range_reads_.push_back(rr);
  return entries;
}

void ProcessorContext::put_raw(const std::string& key, Bytes value) {
  record_read(key);
  writes_.insert_or_assign(key, std::move(value));
}

void ProcessorContext::remove(const std::string& key) {
  record_read(key);
  writes_.insert_or_assign(key, std::nullopt);
}

ProcessorResult ProcessorContext::take() && {
  return ProcessorResult{std::move(reads_), std::move(range_reads_), std::move(writes_), std::move(events_)};
}

// ---------------------------------------------------------------------------
// Operation rules

const std::array<OperationRule, 7>& operation_rules() {
  static const std::array<OperationRule, 7> rules = {{
      // type                   subject       tgt_dir dst    prov   lock   output content acting
      {OpType::upload, Access::none, true, false, true, false, false, true, ActingStorage::target},
      {OpType::download, Access::read, false, false, false, false, false, false, ActingStorage::subject_home},
      {OpType::copy_local, Access::read, true, false, false, false, true, true, ActingStorage::subject_home},
      {OpType::delete_file, Access::write, false, false, false, true, false, false, ActingStorage::subject_home},
      {OpType::copy_remote, Access::read, true, true, false, false, true, true, ActingStorage::destination},
      {OpType::transfer_remote, Access::write, false, true, false, true, false, true, ActingStorage::destination},
      {OpType::process, Access::exec, true, false, false, false, true, true, ActingStorage::program_home},
  }};
  return rules;
}

const OperationRule& rule_for(OpType type) {
  for (const auto& r : operation_rules())
    if (r.type == type) return r;
  throw ChaincodeError(Errc::bad_request, "no rule for op_type");
}

// ---------------------------------------------------------------------------
// Helpers

std::string op_id_for_tx(std::string_view tx_id) { return uuid_from("op:" + std::string(tx_id)); }
std::string file_id_for_tx(std::string_view tx_id) { return uuid_from("file:" + std::string(tx_id)); }
std::string output_file_id_for_tx(std::string_view tx_id) { return uuid_from("file-out:" + std::string(tx_id)); }
std::string dir_id_for_tx(std::string_view tx_id) { return uuid_from("dir:" + std::string(tx_id)); }
std::string group_id_for_tx(std::string_view tx_id) { return uuid_from("grp:" + std::string(tx_id)); }

bool is_mutating_kind(std::string_view k) {
  return std::find(kMutatingKinds.begin(), kMutatingKinds.end(), k) != kMutatingKinds.end();
}

namespace {

const std::string& required(const Payload& p, const std::string& field) {
  auto it = p.find(field);
  if (it == p.end() || it->second.empty()) throw ChaincodeError(Errc::bad_request, "missing field '" + field + "'");
  return it->second;
}

std::string optional_field(const Payload& p, const std::string& field, std::string fallback = {}) {
  auto it = p.find(field);
  if (it == p.end() || it->second.empty()) return fallback;
  return it->second;
}

void validate_name(const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos || name == "." || name == "..")
    throw ChaincodeError(Errc::bad_request, "invalid path component '" + name + "'");
}

template <class T>
T require_asset(const ProcessorContext& ctx, const std::string& id, std::string_view what) {
  auto v = ctx.load<T>(id);
  if (!v) throw ChaincodeError(Errc::not_found, std::string(what) + " " + id);
  return *v;
}

void require_access(const ProcessorContext& ctx, const assets::Acl& acl, const std::string& owner,
                    std::string_view list_name, std::string_view subject) {
  if (!assets::check_access(ctx, ctx.submitter(), acl, owner).allowed)
    throw ChaincodeError(Errc::access_denied, std::string(list_name) + " on " + std::string(subject));
}

// Files must be committed (non-temporary) and unlocked to be an operation
// subject.
FileAsset require_subject(const ProcessorContext& ctx, const std::string& file_id) {
  auto f = require_asset<FileAsset>(ctx, file_id, "file");
  if (f.temporary) throw ChaincodeError(Errc::access_denied, "temporary file " + file_id);
  if (!f.pending_op.empty())
    throw ChaincodeError(Errc::conflict, "file " + file_id + " is held by operation " + f.pending_op);
  return f;
}

void check_file_access(const ProcessorContext& ctx, const FileAsset& f, Access access) {
  switch (access) {
    case Access::none:
      return;
    case Access::read:
      return require_access(ctx, f.read_acl, f.owner, "readACL", f.key());
    case Access::write:
      return require_access(ctx, f.write_acl, f.owner, "writeACL", f.key());
    case Access::exec:
      return require_access(ctx, f.exec_acl, f.owner, "execACL", f.key());
  }
}

// Any entry (file, temporary file, or directory) other than `self_key` with
// this name in the directory.
bool name_taken(const ProcessorContext& ctx, const std::string& dir_id, const std::string& name,
                const std::string& self_key = {}) {
  for (const auto& [key, summary] : ctx.scan(kDirEntriesIndex, dir_id)) {
    if (key == self_key) continue;
    if (decode_dir_entry(summary).name == name) return true;
  }
  return false;
}

DirectoryAsset require_writable_dir(const ProcessorContext& ctx, const std::string& dir_id) {
  auto dir = require_asset<DirectoryAsset>(ctx, dir_id, "directory");
  require_access(ctx, dir.write_acl, dir.owner, "writeACL", dir.key());
  return dir;
}

StorageSite require_storage(const ProcessorContext& ctx, const std::string& storage_id) {
  auto s = require_asset<StorageSite>(ctx, storage_id, "storage");
  auto dms = ctx.load<Participant>(s.dms_participant);
  if (!dms || !dms->has_role(Role::dms_service))
    throw ChaincodeError(Errc::rejected, "storage " + storage_id + " has no dms-service agent");
  return s;
}

assets::Acl checked_acl(const ProcessorContext& ctx, const std::string& text) {
  assets::Acl acl;
  try {
    acl = assets::parse_acl(text);
  } catch (const std::invalid_argument& e) {
    throw ChaincodeError(Errc::bad_request, e.what());
  }
  for (const auto& ref : acl) {
    if (!ctx.get(ref.key())) throw ChaincodeError(Errc::not_found, "acl entry " + ref.to_string());
  }
  return acl;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

ledger::Event op_event(std::string_view name, const OperationAsset& op) {
  ledger::Event ev;
  ev.name = std::string(name);
  ev.payload["op_id"] = op.op_id;
  ev.payload["op_type"] = std::string(assets::to_string(op.op_type));
  ev.payload["state"] = std::string(assets::to_string(op.state));
  ev.payload["requester"] = op.requester;
  if (op.delegate) ev.payload["delegate"] = *op.delegate;
  if (!op.src_storage.empty()) ev.payload["src_storage"] = op.src_storage;
  if (!op.dst_storage.empty()) ev.payload["dst_storage"] = op.dst_storage;
  if (!op.subject_files.empty()) {
    std::string files;
    for (const auto& f : op.subject_files) files += (files.empty() ? "" : ",") + f;
    ev.payload["subject_files"] = files;
  }
  if (op.program_file) ev.payload["program_file"] = *op.program_file;
  if (!op.output_file.empty()) ev.payload["output_file"] = op.output_file;
  if (!op.error_info.empty()) ev.payload["error_info"] = op.error_info;
  return ev;
}

ledger::Event file_event(const FileAsset& f) {
  ledger::Event ev;
  ev.name = std::string(event::kFileCommitted);
  ev.payload["file_id"] = f.file_id;
  ev.payload["directory_id"] = f.directory_id;
  ev.payload["home_storage"] = f.home_storage;
  ev.payload["digest"] = f.content_digest.hex();
  return ev;
}

OperationAsset require_op(const ProcessorContext& ctx, const Payload& p) {
  return require_asset<OperationAsset>(ctx, required(p, "op"), "operation");
}

void require_delegate(const ProcessorContext& ctx, const OperationAsset& op) {
  if (!op.delegate || *op.delegate != ctx.submitter())
    throw ChaincodeError(Errc::access_denied, "delegation: submitter is not the delegate of operation " + op.op_id);
}

// Undo provisional effects of an operation that ends in error.
void release_provisional(ProcessorContext& ctx, const OperationAsset& op) {
  const auto& rule = rule_for(op.op_type);
  if (rule.provisional_file) {
    for (const auto& fid : op.subject_files) {
      auto f = ctx.load<FileAsset>(fid);
      if (f && f->temporary && f->created_by_op == op.op_id) ctx.remove(f->key());
    }
  }
  if (rule.locks_subject) {
    for (const auto& fid : op.subject_files) {
      auto f = ctx.load<FileAsset>(fid);
      if (f && f->pending_op == op.op_id) {
        f->pending_op.clear();
        ctx.put(*f);
      }
    }
  }
}

void fail_operation(ProcessorContext& ctx, OperationAsset op, const std::string& reason, bool is_response) {
  op.state = OpState::error;
  op.error_info = reason;
  if (is_response) op.response_tx = ctx.tx_id();
  release_provisional(ctx, op);
  ctx.put(op);
  ctx.emit(op_event(event::kOperationFailed, op));
}

struct Content {
  std::uint64_t size = 0;
  Digest digest;
};

Content parse_content(const Payload& p) {
  Content c;
  auto size = p.find("size");
  auto digest = p.find("digest");
  if (size == p.end() || digest == p.end()) throw ChaincodeError(Errc::malformed_result, "result needs size and digest");
  try {
    std::size_t used = 0;
    c.size = std::stoull(size->second, &used);
    if (used != size->second.size() || size->second.starts_with('-')) throw std::invalid_argument("size");
    c.digest = Digest::from_hex(digest->second);
  } catch (const std::exception&) {
    throw ChaincodeError(Errc::malformed_result, "unparseable size or digest");
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Operation lifecycle

void request_operation(ProcessorContext& ctx, const Payload& params) {
  OpType type;
  try {
    type = assets::op_type_from_string(required(params, "op_type"));
  } catch (const std::invalid_argument& e) {
    throw ChaincodeError(Errc::bad_request, e.what());
  }
  const auto& rule = rule_for(type);

  OperationAsset op;
  op.op_id = op_id_for_tx(ctx.tx_id());
  op.op_type = type;
  op.state = OpState::started;
  op.requester = ctx.submitter();
  op.request_tx = ctx.tx_id();
  op.requested_height = ctx.logical_time() + 1;

  std::string acting_storage;
  std::optional<FileAsset> locked;

  if (type == OpType::upload) {
    const auto dir = require_writable_dir(ctx, required(params, "dir"));
    const auto name = required(params, "name");
    validate_name(name);
    const auto storage = require_storage(ctx, required(params, "storage"));
    if (name_taken(ctx, dir.dir_id, name)) throw ChaincodeError(Errc::conflict, "name '" + name + "' exists in directory");

    FileAsset f;
    f.file_id = file_id_for_tx(ctx.tx_id());
    f.name = name;
    f.directory_id = dir.dir_id;
    f.owner = ctx.submitter();
    f.home_storage = storage.storage_id;
    f.temporary = true;
    f.read_acl = checked_acl(ctx, optional_field(params, "read"));
    f.write_acl = checked_acl(ctx, optional_field(params, "write"));
    f.exec_acl = checked_acl(ctx, optional_field(params, "exec"));
    f.created_by_op = op.op_id;
    f.last_op = op.op_id;
    ctx.put(f);

    op.subject_files = {f.file_id};
    op.dst_storage = storage.storage_id;
    op.target_dir = dir.dir_id;
    op.target_name = name;
    acting_storage = storage.storage_id;
  } else if (type == OpType::process) {
    auto program = require_subject(ctx, required(params, "program"));
    check_file_access(ctx, program, Access::exec);
    const auto inputs = split_list(required(params, "inputs"));
    for (const auto& fid : inputs) check_file_access(ctx, require_subject(ctx, fid), Access::exec);
    const auto dir = require_writable_dir(ctx, required(params, "dir"));
    const auto name = required(params, "name");
    validate_name(name);
    if (name_taken(ctx, dir.dir_id, name)) throw ChaincodeError(Errc::conflict, "name '" + name + "' exists in directory");

    op.program_file = program.file_id;
    op.subject_files = inputs;
    op.src_storage = program.home_storage;
    op.dst_storage = program.home_storage;
    op.target_dir = dir.dir_id;
    op.target_name = name;
    op.output_file = output_file_id_for_tx(ctx.tx_id());
    acting_storage = program.home_storage;
  } else {
    auto subject = require_subject(ctx, required(params, "file"));
    check_file_access(ctx, subject, rule.subject_access);
    op.subject_files = {subject.file_id};
    op.src_storage = subject.home_storage;

    if (rule.needs_dst_storage) {
      const auto dst = require_storage(ctx, required(params, "storage"));
      if (dst.storage_id == subject.home_storage)
        throw ChaincodeError(Errc::bad_request, "destination storage equals the file's home storage");
      op.dst_storage = dst.storage_id;
    } else {
      op.dst_storage = subject.home_storage;
    }
    if (rule.needs_target_dir) {
      const auto dir = require_writable_dir(ctx, optional_field(params, "dir", subject.directory_id));
      const auto name = optional_field(params, "name", subject.name);
      validate_name(name);
      if (name_taken(ctx, dir.dir_id, name))
        throw ChaincodeError(Errc::conflict, "name '" + name + "' exists in directory");
      op.target_dir = dir.dir_id;
      op.target_name = name;
    }
    if (rule.creates_output) op.output_file = output_file_id_for_tx(ctx.tx_id());
    acting_storage = rule.acting == ActingStorage::destination ? op.dst_storage : subject.home_storage;
    if (rule.locks_subject) locked = std::move(subject);
  }

  const auto acting = require_storage(ctx, acting_storage);
  op.delegate = acting.dms_participant;

  if (locked) {
    locked->pending_op = op.op_id;
    locked->last_op = op.op_id;
    ctx.put(*locked);
  }
  ctx.put(op);
  ctx.emit(op_event(event::kOperationRequested, op));
}

void ack_operation(ProcessorContext& ctx, const Payload& params) {
  auto op = require_op(ctx, params);
  require_delegate(ctx, op);
  if (op.state != OpState::started)
    throw ChaincodeError(Errc::invalid_transition, std::string(assets::to_string(op.state)) + " -> pending");
  op.state = OpState::pending;
  op.ack_tx = ctx.tx_id();
  ctx.put(op);
  ctx.emit(op_event(event::kOperationAcked, op));
}

void confirm_operation(ProcessorContext& ctx, const Payload& params) {
  auto op = require_op(ctx, params);
  require_delegate(ctx, op);
  if (!assets::is_open(op.state))
    throw ChaincodeError(Errc::invalid_transition, std::string(assets::to_string(op.state)) + " -> final");

  const auto outcome = required(params, "outcome");
  if (outcome == "failure") {
    return fail_operation(ctx, std::move(op), optional_field(params, "reason", "unspecified"), true);
  }
  if (outcome != "success") throw ChaincodeError(Errc::malformed_result, "outcome must be success or failure");

  const auto& rule = rule_for(op.op_type);
  Content content;
  if (rule.result_needs_content) content = parse_content(params);

  const std::string subject_id = op.subject_files.empty() ? std::string{} : op.subject_files.front();
  switch (op.op_type) {
    case OpType::upload: {
      auto f = ctx.load<FileAsset>(subject_id);
      if (!f || !f->temporary) return fail_operation(ctx, std::move(op), "provisional file missing", true);
      f->temporary = false;
      f->size_bytes = content.size;
      f->content_digest = content.digest;
      f->replicas = {f->home_storage};
      f->last_op = op.op_id;
      ctx.put(*f);
      ctx.emit(file_event(*f));
      break;
    }
    case OpType::download: {
      if (!ctx.load<FileAsset>(subject_id)) return fail_operation(ctx, std::move(op), "subject removed", true);
      break;
    }
    case OpType::copy_local:
    case OpType::copy_remote: {
      auto src = ctx.load<FileAsset>(subject_id);
      if (!src) return fail_operation(ctx, std::move(op), "subject removed", true);
      if (src->content_digest != content.digest) return fail_operation(ctx, std::move(op), "digest mismatch", true);
      if (!ctx.load<DirectoryAsset>(op.target_dir)) return fail_operation(ctx, std::move(op), "target directory removed", true);
      if (name_taken(ctx, op.target_dir, op.target_name)) return fail_operation(ctx, std::move(op), "name conflict", true);
      FileAsset out;
      out.file_id = op.output_file;
      out.name = op.target_name;
      out.directory_id = op.target_dir;
      out.owner = op.requester;
      out.home_storage = op.dst_storage;
      out.replicas = {op.dst_storage};
      out.size_bytes = content.size;
      out.content_digest = content.digest;
      out.read_acl = src->read_acl;
      out.write_acl = src->write_acl;
      out.exec_acl = src->exec_acl;
      out.created_by_op = op.op_id;
      out.last_op = op.op_id;
      ctx.put(out);
      ctx.emit(file_event(out));
      break;
    }
    case OpType::delete_file: {
      auto f = ctx.load<FileAsset>(subject_id);
      if (!f) return fail_operation(ctx, std::move(op), "subject removed", true);
      ctx.remove(f->key());
      break;
    }
    case OpType::transfer_remote: {
      auto f = ctx.load<FileAsset>(subject_id);
      if (!f) return fail_operation(ctx, std::move(op), "subject removed", true);
      if (f->content_digest != content.digest) return fail_operation(ctx, std::move(op), "digest mismatch", true);
      f->home_storage = op.dst_storage;
      f->replicas = {op.dst_storage};
      f->pending_op.clear();
      f->last_op = op.op_id;
      ctx.put(*f);
      break;
    }
    case OpType::process: {
      if (!ctx.load<DirectoryAsset>(op.target_dir)) return fail_operation(ctx, std::move(op), "target directory removed", true);
      if (name_taken(ctx, op.target_dir, op.target_name)) return fail_operation(ctx, std::move(op), "name conflict", true);
      FileAsset out;
      out.file_id = op.output_file;
      out.name = op.target_name;
      out.directory_id = op.target_dir;
      out.owner = op.requester;
      out.home_storage = op.dst_storage;
      out.replicas = {op.dst_storage};
      out.size_bytes = content.size;
      out.content_digest = content.digest;
      out.created_by_op = op.op_id;
      out.last_op = op.op_id;
      ctx.put(out);
      ctx.emit(file_event(out));
      break;
    }
  }

  // A confirm on a still-started operation carries the implied ack.
  if (op.state == OpState::started) op.ack_tx = ctx.tx_id();
  op.state = OpState::completed;
  op.response_tx = ctx.tx_id();
  ctx.put(op);
  ctx.emit(op_event(event::kOperationCompleted, op));
}

void expire_operation(ProcessorContext& ctx, const Payload& params) {
  auto op = require_op(ctx, params);
  const auto admin = ctx.load<Participant>(ctx.submitter());
  if (!admin || !admin->has_role(Role::orderer_admin))
    throw ChaincodeError(Errc::access_denied, "expireOp requires role orderer-admin");
  if (!assets::is_open(op.state))
    throw ChaincodeError(Errc::invalid_transition, std::string(assets::to_string(op.state)) + " -> error");
  const auto timeout = ctx.config().op_timeout_blocks;
  const auto now = ctx.logical_time();
  if (timeout == 0 || now < op.requested_height || now - op.requested_height <= timeout)
    throw ChaincodeError(Errc::rejected, "not yet expired");
  fail_operation(ctx, std::move(op), "timeout", false);
}

// ---------------------------------------------------------------------------
// Administration

void admin_create_directory(ProcessorContext& ctx, const Payload& params) {
  const auto parent = require_writable_dir(ctx, required(params, "parent"));
  const auto name = required(params, "name");
  validate_name(name);
  if (name_taken(ctx, parent.dir_id, name)) throw ChaincodeError(Errc::conflict, "name '" + name + "' exists in directory");
  DirectoryAsset d;
  d.dir_id = dir_id_for_tx(ctx.tx_id());
  d.name = name;
  d.parent_id = parent.dir_id;
  d.owner = ctx.submitter();
  d.read_acl = checked_acl(ctx, optional_field(params, "read"));
  d.write_acl = checked_acl(ctx, optional_field(params, "write"));
  ctx.put(d);
}

void admin_delete_directory(ProcessorContext& ctx, const Payload& params) {
  const auto dir = require_asset<DirectoryAsset>(ctx, required(params, "dir"), "directory");
  if (!dir.parent_id) throw ChaincodeError(Errc::rejected, "cannot remove the root directory");
  require_access(ctx, dir.write_acl, dir.owner, "writeACL", dir.key());
  if (!ctx.scan(kDirEntriesIndex, dir.dir_id).empty()) throw ChaincodeError(Errc::rejected, "directory not empty");
  ctx.remove(dir.key());
}

void admin_move_file(ProcessorContext& ctx, const Payload& params) {
  auto f = require_asset<FileAsset>(ctx, required(params, "file"), "file");
  if (f.temporary) throw ChaincodeError(Errc::rejected, "file is temporary");
  if (!f.pending_op.empty()) throw ChaincodeError(Errc::conflict, "file is held by operation " + f.pending_op);
  require_access(ctx, f.write_acl, f.owner, "writeACL", f.key());
  const auto dest = require_writable_dir(ctx, required(params, "dir"));
  if (name_taken(ctx, dest.dir_id, f.name, f.key()))
    throw ChaincodeError(Errc::conflict, "name '" + f.name + "' exists in destination");
  f.directory_id = dest.dir_id;
  ctx.put(f);
}

void admin_group(ProcessorContext& ctx, const Payload& params) {
  const auto action = required(params, "action");
  if (action == "create") {
    GroupAsset g;
    g.group_id = group_id_for_tx(ctx.tx_id());
    g.name = required(params, "name");
    g.owner = ctx.submitter();
    for (auto& m : checked_acl(ctx, optional_field(params, "members")))
      if (!g.has_member(m)) g.members.push_back(std::move(m));
    ctx.put(g);
    return;
  }
  auto g = require_asset<GroupAsset>(ctx, required(params, "group"), "group");
  if (g.owner != ctx.submitter()) throw ChaincodeError(Errc::access_denied, "group mutation by non-owner");
  if (action == "delete") {
    ctx.remove(g.key());
    return;
  }
  AclRef member;
  try {
    member = AclRef::parse(required(params, "member"));
  } catch (const std::invalid_argument& e) {
    throw ChaincodeError(Errc::bad_request, e.what());
  }
  if (action == "add_member") {
    if (!ctx.get(member.key())) throw ChaincodeError(Errc::not_found, "member " + member.to_string());
    if (assets::would_create_cycle(ctx, g.group_id, member)) throw ChaincodeError(Errc::rejected, "membership cycle");
    if (!g.has_member(member)) g.members.push_back(member);
  } else if (action == "remove_member") {
    std::erase(g.members, member);
  } else {
    throw ChaincodeError(Errc::bad_request, "unknown group action '" + action + "'");
  }
  ctx.put(g);
}

void admin_set_acl(ProcessorContext& ctx, const Payload& params) {
  const auto key = required(params, "asset");
  const auto list = required(params, "list");
  if (list != "readACL" && list != "writeACL" && list != "execACL")
    throw ChaincodeError(Errc::bad_request, "unknown ACL list '" + list + "'");
  assets::ParsedKey parsed;
  try {
    parsed = assets::parse_key(key);
  } catch (const std::invalid_argument& e) {
    throw ChaincodeError(Errc::bad_request, e.what());
  }
  const auto entries = optional_field(params, "entries");

  if (parsed.type_tag == assets::tag::kFile) {
    auto f = require_asset<FileAsset>(ctx, parsed.id, "file");
    if (f.owner != ctx.submitter()) throw ChaincodeError(Errc::access_denied, "ACL change by non-owner");
    auto acl = checked_acl(ctx, entries);
    (list == "readACL" ? f.read_acl : list == "writeACL" ? f.write_acl : f.exec_acl) = std::move(acl);
    ctx.put(f);
  } else if (parsed.type_tag == assets::tag::kDirectory) {
    if (list == "execACL") throw ChaincodeError(Errc::rejected, "directories carry no execACL");
    auto d = require_asset<DirectoryAsset>(ctx, parsed.id, "directory");
    if (d.owner != ctx.submitter()) throw ChaincodeError(Errc::access_denied, "ACL change by non-owner");
    auto acl = checked_acl(ctx, entries);
    (list == "readACL" ? d.read_acl : d.write_acl) = std::move(acl);
    ctx.put(d);
  } else {
    throw ChaincodeError(Errc::bad_request, "assets of type '" + parsed.type_tag + "' carry no ACLs");
  }
}

// ---------------------------------------------------------------------------
// Dispatch

ProcessorResult execute(const ledger::WorldState& snapshot, const std::string& submitter, const std::string& tx_id,
                        std::string_view k, const Payload& payload, const ChaincodeConfig& config) {
  if (!is_mutating_kind(k)) {
    if (std::find(kQueryKinds.begin(), kQueryKinds.end(), k) != kQueryKinds.end())
      throw ChaincodeError(Errc::bad_request, "query kind '" + std::string(k) + "' is never committed");
    throw ChaincodeError(Errc::bad_request, "unknown processor '" + std::string(k) + "'");
  }
  ProcessorContext ctx(snapshot, submitter, tx_id, config);
  if (!ctx.load<Participant>(submitter)) throw ChaincodeError(Errc::not_found, "submitter " + submitter);
  try {
    if (k == kind::kRequestOp) request_operation(ctx, payload);
    else if (k == kind::kAckOp) ack_operation(ctx, payload);
    else if (k == kind::kConfirmOp) confirm_operation(ctx, payload);
    else if (k == kind::kExpireOp) expire_operation(ctx, payload);
    else if (k == kind::kMkdir) admin_create_directory(ctx, payload);
    else if (k == kind::kRmdir) admin_delete_directory(ctx, payload);
    else if (k == kind::kMvfile) admin_move_file(ctx, payload);
    else if (k == kind::kGroup) admin_group(ctx, payload);
    else if (k == kind::kSetAcl) admin_set_acl(ctx, payload);
  } catch (const assets::LookupError& e) {
    throw ChaincodeError(Errc::not_found, e.what());
  } catch (const DecodeError& e) {
    throw ChaincodeError(Errc::bad_request, std::string("undecodable asset: ") + e.what());
  }
  auto result = std::move(ctx).take();
  if (result.write_set.empty()) throw ChaincodeError(Errc::rejected, "processor produced no writes");
  return result;
}

}  // namespace provledger::chaincode
