// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/acl.hpp"
#include "provledger/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace provledger::testing {

inline std::filesystem::path scenario_dir() { return PROVLEDGER_SCENARIOS; }

inline NetworkConfig two_org_config() { return NetworkConfig::load(scenario_dir() / "network.json"); }

inline Bytes bytes_of(std::string_view s) { return Bytes(s.begin(), s.end()); }

template <class T>
std::vector<T> all_assets(const ledger::WorldState& state) {
  std::vector<T> out;
  const std::string prefix = std::string(T::kTag) + "/";
  const auto& entries = state.entries();
  for (auto it = entries.lower_bound(prefix); it != entries.end() && it->first.starts_with(prefix); ++it)
    out.push_back(assets::decode<T>(it->second.value));
  return out;
}

inline std::optional<assets::FileAsset> file_named(const ledger::WorldState& state, std::string_view name) {
  for (auto& f : all_assets<assets::FileAsset>(state))
    if (f.name == name) return f;
  return std::nullopt;
}

inline std::vector<assets::OperationAsset> operations_of(const ledger::WorldState& state, assets::OpType type) {
  std::vector<assets::OperationAsset> out;
  for (auto& op : all_assets<assets::OperationAsset>(state))
    if (op.op_type == type) out.push_back(std::move(op));
  return out;
}

// Random ACL instance: a group forest of depth <= 5 (an edge parent -> child
// means the child group is a member of the parent), random participant
// memberships, occasional dangling refs. Participants p0..pn are registered;
// "stranger" is not.
struct AclInstance {
  assets::MapView view;
  std::vector<std::string> participants;
  std::vector<std::string> groups;
  std::map<std::string, std::vector<assets::AclRef>> members;
  assets::Acl acl;
  std::string owner;
  std::string subject;
  std::size_t depth = 0;
};

inline AclInstance random_acl_instance(std::mt19937_64& rng) {
  using assets::AclRef;
  using assets::RefKind;
  AclInstance in;
  const auto np = 1 + rng() % 8;
  for (std::size_t i = 0; i < np; ++i) {
    assets::Participant p;
    p.participant_id = uuid_from("par:p" + std::to_string(i));
    p.display_name = "p" + std::to_string(i);
    p.org_id = "org";
    p.roles = {assets::Role::user};
    in.view.put(p);
    in.participants.push_back(p.participant_id);
  }
  const auto stranger = uuid_from("par:stranger");
  const auto ng = rng() % 12;
  std::vector<std::size_t> depth;
  std::vector<std::optional<std::size_t>> parent;
  for (std::size_t g = 0; g < ng; ++g) {
    in.groups.push_back(uuid_from("grp:" + std::to_string(rng()) + "/" + std::to_string(g)));
    std::vector<std::size_t> eligible;
    for (std::size_t h = 0; h < g; ++h)
      if (depth[h] < 5) eligible.push_back(h);
    if (!eligible.empty() && rng() % 3 != 0) {
      const auto p = eligible[rng() % eligible.size()];
      parent.push_back(p);
      depth.push_back(depth[p] + 1);
    } else {
      parent.push_back(std::nullopt);
      depth.push_back(1);
    }
    in.depth = std::max(in.depth, depth.back());
  }
  for (std::size_t g = 0; g < ng; ++g) {
    auto& m = in.members[in.groups[g]];
    for (const auto& p : in.participants)
      if (rng() % 4 == 0) m.push_back({RefKind::participant, p});
    if (rng() % 10 == 0) m.push_back({RefKind::group, uuid_from("grp:dangling")});
    if (rng() % 10 == 0) m.push_back({RefKind::participant, stranger});
  }
  for (std::size_t g = 0; g < ng; ++g)
    if (parent[g]) in.members[in.groups[*parent[g]]].push_back({RefKind::group, in.groups[g]});
  for (std::size_t g = 0; g < ng; ++g) {
    assets::GroupAsset asset;
    asset.group_id = in.groups[g];
    asset.name = "g" + std::to_string(g);
    asset.owner = in.participants.front();
    asset.members = in.members[in.groups[g]];
    in.view.put(asset);
  }
  for (const auto& p : in.participants)
    if (rng() % 5 == 0) in.acl.push_back({RefKind::participant, p});
  for (const auto& g : in.groups)
    if (rng() % 4 == 0) in.acl.push_back({RefKind::group, g});
  if (rng() % 10 == 0) in.acl.push_back({RefKind::group, uuid_from("grp:missing")});
  if (rng() % 10 == 0) in.acl.push_back({RefKind::participant, stranger});
  in.owner = in.participants[rng() % np];
  in.subject = rng() % 8 == 0 ? stranger : in.participants[rng() % np];
  return in;
}

// Brute force: reachability over the group graph by repeated relaxation,
// then a direct membership test. Unregistered participants never match.
inline bool acl_oracle(const AclInstance& in) {
  if (in.subject == in.owner) return true;
  if (std::find(in.participants.begin(), in.participants.end(), in.subject) == in.participants.end()) return false;
  std::map<std::string, std::set<std::string>> reach;
  for (const auto& g : in.groups) reach[g] = {g};
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& g : in.groups)
      for (const auto& r : std::set<std::string>(reach[g]))
        for (const auto& m : in.members.at(r))
          if (m.kind == assets::RefKind::group && reach.contains(m.id) && reach[g].insert(m.id).second) changed = true;
  }
  for (const auto& e : in.acl) {
    if (e.kind == assets::RefKind::participant) {
      if (e.id == in.subject) return true;
      continue;
    }
    if (!reach.contains(e.id)) continue;
    for (const auto& r : reach[e.id])
      for (const auto& m : in.members.at(r))
        if (m.kind == assets::RefKind::participant && m.id == in.subject) return true;
  }
  return false;
}

}  // namespace provledger::testing
