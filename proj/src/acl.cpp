// SPDX-License-Identifier: Apache-2.0

#include "provledger/acl.hpp"

#include <deque>

namespace provledger::assets {

std::optional<Bytes> StateView::get(std::string_view key) const {
  const auto* e = state_.find(key);
  if (!e) return std::nullopt;
  return e->value;
}

std::optional<Bytes> MapView::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::set<std::string> expand_group(const WorldView& view, const std::string& group_id,
                                   std::vector<std::string>* warnings) {
  const auto root = view.load<GroupAsset>(group_id);
  if (!root) throw LookupError("not-found: group " + group_id);

  std::set<std::string> participants;
  std::set<std::string> visited{group_id};
  std::deque<GroupAsset> queue{*root};
  while (!queue.empty()) {
    const GroupAsset g = std::move(queue.front());
    queue.pop_front();
    for (const auto& m : g.members) {
      if (m.kind == RefKind::participant) {
        if (view.load<Participant>(m.id)) {
          participants.insert(m.id);
        } else if (warnings) {
          warnings->push_back("dangling participant " + m.id + " in group " + g.group_id);
        }
        continue;
      }
      // Membership is acyclic by construction; the visited set only bounds
      // work on diamonds.
      if (!visited.insert(m.id).second) continue;
      if (auto nested = view.load<GroupAsset>(m.id)) {
        queue.push_back(std::move(*nested));
      } else if (warnings) {
        warnings->push_back("dangling group " + m.id + " in group " + g.group_id);
      }
    }
  }
  return participants;
}

AccessDecision check_access(const WorldView& view, const std::string& participant_id, const Acl& acl,
                            const std::string& owner) {
  AccessDecision d;
  if (participant_id == owner) {
    d.allowed = true;
    return d;
  }
  for (const auto& ref : acl) {
    if (ref.kind != RefKind::participant) continue;
    if (!view.load<Participant>(ref.id)) {
      d.warnings.push_back("dangling participant " + ref.id);
      continue;
    }
    if (ref.id == participant_id) {
      d.allowed = true;
      return d;
    }
  }
  for (const auto& ref : acl) {
    if (ref.kind != RefKind::group) continue;
    if (!view.load<GroupAsset>(ref.id)) {
      d.warnings.push_back("dangling group " + ref.id);
      continue;
    }
    if (expand_group(view, ref.id, &d.warnings).contains(participant_id)) {
      d.allowed = true;
      return d;
    }
  }
  return d;
}

bool group_reaches(const WorldView& view, const std::string& from_group, const std::string& target_group) {
  std::set<std::string> visited;
  std::deque<std::string> queue{from_group};
  while (!queue.empty()) {
    const std::string id = std::move(queue.front());
    queue.pop_front();
    if (id == target_group) return true;
    if (!visited.insert(id).second) continue;
    if (auto g = view.load<GroupAsset>(id)) {
      for (const auto& m : g->members)
        if (m.kind == RefKind::group) queue.push_back(m.id);
    }
  }
  return false;
}

bool would_create_cycle(const WorldView& view, const std::string& group_id, const AclRef& member) {
  if (member.kind != RefKind::group) return false;
  return group_reaches(view, member.id, group_id);
}

}  // namespace provledger::assets
