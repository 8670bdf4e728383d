// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "provledger/world_view.hpp"

#include <set>
#include <string>
#include <vector>

namespace provledger::assets {

struct AccessDecision {
  bool allowed = false;
  // One entry per dangling AclRef encountered (treated as non-matching).
  std::vector<std::string> warnings;
};

// Transitive closure of participant members. Throws LookupError when the
// group itself does not exist; dangling nested refs become warnings.
std::set<std::string> expand_group(const WorldView& view, const std::string& group_id,
                                   std::vector<std::string>* warnings = nullptr);

// Owner always passes; otherwise a direct participant entry or membership in
// any listed group grants access.
AccessDecision check_access(const WorldView& view, const std::string& participant_id, const Acl& acl,
                            const std::string& owner);

// True when `target_group` is reachable from `from_group` through nested
// group membership (including from_group == target_group).
bool group_reaches(const WorldView& view, const std::string& from_group, const std::string& target_group);

// Adding `member` to `group_id` would close a cycle.
bool would_create_cycle(const WorldView& view, const std::string& group_id, const AclRef& member);

}  // namespace provledger::assets
