// SPDX-License-Identifier: Apache-2.0

#include "provledger/acl.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

namespace provledger::assets {
namespace {

std::string rand_id(std::mt19937_64& rng) { return uuid_from(std::to_string(rng())); }

Acl rand_acl(std::mt19937_64& rng) {
  Acl out;
  for (auto n = rng() % 4; n > 0; --n)
    out.push_back({rng() % 2 ? RefKind::group : RefKind::participant, rand_id(rng)});
  return out;
}

TEST(Assets, FileRoundTripProperty) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    FileAsset f;
    f.file_id = rand_id(rng);
    f.name = "f" + std::to_string(rng() % 100);
    f.directory_id = rand_id(rng);
    f.owner = rand_id(rng);
    f.home_storage = rand_id(rng);
    f.replicas = {f.home_storage, rand_id(rng)};
    f.size_bytes = rng();
    f.content_digest = Digest::of(f.name);
    f.temporary = rng() % 2;
    f.read_acl = rand_acl(rng);
    f.write_acl = rand_acl(rng);
    f.exec_acl = rand_acl(rng);
    f.created_by_op = rand_id(rng);
    if (rng() % 2) f.pending_op = rand_id(rng);
    EXPECT_EQ(decode<FileAsset>(encode(f)), f);
  }
}

TEST(Assets, OperationRoundTripProperty) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    OperationAsset op;
    op.op_id = rand_id(rng);
    op.op_type = kAllOpTypes[rng() % 7];
    op.state = static_cast<OpState>(rng() % 4);
    op.requester = rand_id(rng);
    if (rng() % 2) op.delegate = rand_id(rng);
    op.subject_files = {rand_id(rng)};
    if (rng() % 2) op.program_file = rand_id(rng);
    op.request_tx = rand_id(rng);
    if (rng() % 2) op.ack_tx = rand_id(rng);
    if (rng() % 2) op.response_tx = rand_id(rng);
    op.error_info = rng() % 2 ? "timeout" : "";
    op.requested_height = rng() % 1000;
    EXPECT_EQ(decode<OperationAsset>(encode(op)), op);
  }
}

TEST(Assets, OtherRoundTrips) {
  DirectoryAsset d{uuid_from("d"), "docs", uuid_from("dir:/"), uuid_from("o"), {}, {}};
  EXPECT_EQ(decode<DirectoryAsset>(encode(d)), d);
  GroupAsset g{uuid_from("g"), "team", uuid_from("o"), {{RefKind::participant, uuid_from("p")}}};
  EXPECT_EQ(decode<GroupAsset>(encode(g)), g);
  StorageSite s{uuid_from("s"), "s1", "org1", uuid_from("dms"), 42};
  EXPECT_EQ(decode<StorageSite>(encode(s)), s);
  Participant p{uuid_from("p"), "alice", "org1", "token", {Role::user, Role::dms_service}};
  EXPECT_EQ(decode<Participant>(encode(p)), p);
}

TEST(Assets, TypeMarkersPreventConfusion) {
  GroupAsset g{uuid_from("g"), "team", uuid_from("o"), {}};
  EXPECT_THROW(decode<FileAsset>(encode(g)), DecodeError);
  auto bytes = encode(g);
  bytes.push_back(0);
  EXPECT_THROW(decode<GroupAsset>(bytes), DecodeError);
}

TEST(Assets, KeysAndAclText) {
  const auto id = uuid_from("x");
  EXPECT_EQ(parse_key("file/" + id).id, id);
  EXPECT_THROW(parse_key("file/NOT"), std::invalid_argument);
  EXPECT_THROW(parse_key("bogus/" + id), std::invalid_argument);
  const Acl acl{{RefKind::participant, id}, {RefKind::group, id}};
  EXPECT_EQ(parse_acl(format_acl(acl)), acl);
  EXPECT_TRUE(parse_acl("").empty());
  EXPECT_THROW(AclRef::parse("robot:" + id), std::invalid_argument);
}

TEST(Assets, TransitionTable) {
  const auto ok = [](OpState a, OpState b) { return is_allowed_transition(a, b); };
  EXPECT_TRUE(ok(OpState::started, OpState::pending));
  EXPECT_TRUE(ok(OpState::pending, OpState::completed));
  EXPECT_TRUE(ok(OpState::started, OpState::error));
  EXPECT_TRUE(ok(OpState::pending, OpState::error));
  EXPECT_FALSE(ok(OpState::started, OpState::completed));
  EXPECT_FALSE(ok(OpState::completed, OpState::error));
  EXPECT_FALSE(ok(OpState::error, OpState::started));
  EXPECT_FALSE(ok(OpState::completed, OpState::pending));
}

TEST(Acl, MatchesBruteForceOracle) {
  std::mt19937_64 rng(40);
  for (int i = 0; i < 3000; ++i) {
    const auto in = testing::random_acl_instance(rng);
    ASSERT_EQ(check_access(in.view, in.subject, in.acl, in.owner).allowed, testing::acl_oracle(in)) << "instance " << i;
  }
}

TEST(Acl, OwnerAlwaysPassesAndDanglingRefsWarn) {
  MapView view;
  const auto owner = uuid_from("par:o");
  EXPECT_TRUE(check_access(view, owner, {}, owner).allowed);
  const auto d = check_access(view, uuid_from("par:x"), {{RefKind::group, uuid_from("grp:gone")}}, owner);
  EXPECT_FALSE(d.allowed);
  EXPECT_EQ(d.warnings.size(), 1u);
}

TEST(Acl, NestedGroupsAndCycles) {
  MapView view;
  Participant p{uuid_from("par:p"), "p", "org", "", {Role::user}};
  view.put(p);
  GroupAsset inner{uuid_from("grp:inner"), "inner", p.participant_id, {{RefKind::participant, p.participant_id}}};
  GroupAsset outer{uuid_from("grp:outer"), "outer", p.participant_id, {{RefKind::group, inner.group_id}}};
  view.put(inner);
  view.put(outer);
  EXPECT_EQ(expand_group(view, outer.group_id), std::set<std::string>{p.participant_id});
  EXPECT_TRUE(group_reaches(view, outer.group_id, inner.group_id));
  EXPECT_FALSE(group_reaches(view, inner.group_id, outer.group_id));
  EXPECT_TRUE(would_create_cycle(view, inner.group_id, {RefKind::group, outer.group_id}));
  EXPECT_TRUE(would_create_cycle(view, inner.group_id, {RefKind::group, inner.group_id}));
  EXPECT_FALSE(would_create_cycle(view, outer.group_id, {RefKind::participant, p.participant_id}));
  EXPECT_THROW(expand_group(view, uuid_from("grp:none")), LookupError);
}

}  // namespace
}  // namespace provledger::assets
