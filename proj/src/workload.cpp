// SPDX-License-Identifier: Apache-2.0

#include "provledger/workload.hpp"

#include <algorithm>
#include <array>

namespace provledger::workload {

using assets::DirectoryAsset;
using assets::FileAsset;
using scenario::ScenarioStep;

NetworkConfig random_network(std::uint64_t seed, const NetworkShape& shape) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  NetworkConfig c;
  for (std::size_t i = 0; i < shape.organizations; ++i) {
    const auto n = std::to_string(i);
    OrgConfig org{"org" + n, {}};
    for (std::size_t p = 0; p < shape.peers_per_org; ++p) org.peers.push_back("peer" + n + static_cast<char>('a' + p));
    c.organizations.push_back(org);
    for (std::size_t u = 0; u < shape.users_per_org; ++u)
      c.participants.push_back({"user" + n + "_" + std::to_string(u), org.id, {assets::Role::user}});
    c.participants.push_back({"dms" + n, org.id, {assets::Role::dms_service}});
    c.storages.push_back({"s" + n, org.id, "dms" + n, 1ull << 20});
  }
  c.participants.push_back({"admin", c.organizations.front().id, {assets::Role::orderer_admin}});
  c.root.owner = "admin";
  c.batch_size = 1 + rng() % 6;
  c.batch_timer = 1 + rng() % 3;
  c.op_timeout = 10;
  c.seed = seed;
  return c;
}

RandomClient::RandomClient(Simulation& sim, std::uint64_t seed) : sim_(sim), rng_(seed) {
  const auto& cfg = sim.network().config();
  for (const auto& p : cfg.participants) {
    names_by_id_[cfg.participant_id(p.name)] = p.name;
    if (p.roles.contains(assets::Role::user)) users_.push_back(p.name);
  }
  for (const auto& s : cfg.storages) {
    storages_.push_back(s.name);
    names_by_id_[cfg.storage_id(s.name)] = s.name;
  }
}

std::string RandomClient::any_user() { return users_[pick(users_.size())]; }

std::string RandomClient::acl_subset(const std::string& also) {
  std::vector<std::string> parts;
  if (!also.empty()) parts.push_back("participant:" + also);
  for (const auto& u : users_)
    if (u != also && chance(35)) parts.push_back("participant:" + u);
  if (!groups_.empty() && chance(30)) parts.push_back("group:$" + groups_[pick(groups_.size())]);
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

std::string RandomClient::other_storage(const std::string& storage) {
  if (storages_.size() < 2) return storage;
  for (;;) {
    const auto& s = storages_[pick(storages_.size())];
    if (s != storage) return s;
  }
}

ScenarioStep RandomClient::next() {
  const auto& state = sim_.state();
  const auto& entries = state.entries();

  std::vector<std::string> dirs;
  const std::string dir_prefix = std::string(assets::tag::kDirectory) + "/";
  for (auto it = entries.lower_bound(dir_prefix); it != entries.end() && it->first.starts_with(dir_prefix); ++it)
    dirs.push_back(chaincode::directory_path(state, assets::decode<DirectoryAsset>(it->second.value).dir_id));
  std::sort(dirs.begin(), dirs.end());

  std::vector<FileInfo> files;
  const std::string file_prefix = std::string(assets::tag::kFile) + "/";
  for (auto it = entries.lower_bound(file_prefix); it != entries.end() && it->first.starts_with(file_prefix); ++it) {
    const auto f = assets::decode<FileAsset>(it->second.value);
    if (f.temporary || !f.pending_op.empty()) continue;
    auto dir = chaincode::directory_path(state, f.directory_id);
    FileInfo info;
    info.path = (dir == "/" ? "" : dir) + "/" + f.name;
    info.id = f.file_id;
    info.owner = names_by_id_.contains(f.owner) ? names_by_id_.at(f.owner) : std::string{};
    info.home = names_by_id_.contains(f.home_storage) ? names_by_id_.at(f.home_storage) : storages_.front();
    info.program = f.name.starts_with("prog");
    files.push_back(std::move(info));
  }
  std::vector<const FileInfo*> data, programs;
  for (const auto& f : files) (f.program ? programs : data).push_back(&f);

  const auto random_dir = [&] { return dirs[pick(dirs.size())]; };
  const auto actor_for = [&](const FileInfo& f) {
    return !f.owner.empty() && chance(75) && std::find(users_.begin(), users_.end(), f.owner) != users_.end()
               ? f.owner
               : any_user();
  };
  const auto fresh = [&](const char* prefix) { return prefix + std::to_string(++counter_); };

  ScenarioStep st;
  st.step = sim_.network().now();
  const auto request = [&](const std::string& op_type) {
    st.command = chaincode::kind::kRequestOp;
    st.args["op_type"] = op_type;
    ++operations_;
  };

  auto roll = pick(100);
  if (data.size() < 3) roll = 0;
  if (roll < 30) {
    st.actor = any_user();
    request("upload");
    const bool program = chance(12);
    st.args["dir"] = random_dir();
    st.args["name"] = fresh(program ? "prog" : "f");
    st.args["storage"] = storages_[pick(storages_.size())];
    st.args["read"] = acl_subset(st.actor);
    if (chance(40)) st.args["write"] = acl_subset();
    if (program) st.args["exec"] = acl_subset(st.actor);
    std::string content;
    if (program) {
      static constexpr std::array<const char*, 3> kTags = {"reverse", "uppercase", "digest-stamp"};
      content = chance(10) ? "bogus" : kTags[pick(kTags.size())];
    } else {
      const auto len = 8 + pick(120);
      for (std::uint64_t i = 0; i < len; ++i) content.push_back(static_cast<char>('a' + pick(26)));
    }
    st.bytes = Bytes(content.begin(), content.end());
    return st;
  }
  const auto& f = *(data.empty() ? &files[pick(files.size())] : data[pick(data.size())]);
  if (roll < 40) {
    st.actor = actor_for(f);
    request("download");
    st.args["file"] = f.path;
  } else if (roll < 50) {
    st.actor = actor_for(f);
    request("copy_local");
    st.args["file"] = f.path;
    st.args["dir"] = random_dir();
    st.args["name"] = fresh("c");
  } else if (roll < 58) {
    st.actor = actor_for(f);
    request("copy_remote");
    st.args["file"] = f.path;
    st.args["storage"] = other_storage(f.home);
    st.args["dir"] = random_dir();
    st.args["name"] = fresh("r");
  } else if (roll < 64) {
    st.actor = actor_for(f);
    request("transfer_remote");
    st.args["file"] = f.path;
    st.args["storage"] = other_storage(f.home);
  } else if (roll < 72) {
    st.actor = actor_for(f);
    request("delete");
    st.args["file"] = f.path;
  } else if (roll < 78 && !programs.empty()) {
    const auto& prog = *programs[pick(programs.size())];
    st.actor = actor_for(prog);
    request("process");
    st.args["program"] = prog.path;
    std::string inputs = f.path;
    if (data.size() > 1 && chance(30)) inputs += "," + data[pick(data.size())]->path;
    st.args["inputs"] = inputs;
    st.args["dir"] = random_dir();
    st.args["name"] = fresh("o");
  } else if (roll < 84) {
    st.actor = any_user();
    st.command = chaincode::kind::kMkdir;
    st.args["parent"] = random_dir();
    st.args["name"] = fresh("d");
    std::string everyone;
    for (const auto& u : users_) everyone += (everyone.empty() ? "" : ",") + ("participant:" + u);
    st.args["read"] = everyone;
    st.args["write"] = everyone;
  } else if (roll < 89) {
    st.actor = actor_for(f);
    st.command = chaincode::kind::kMvfile;
    st.args["file"] = f.path;
    st.args["dir"] = random_dir();
  } else if (roll < 93) {
    st.actor = any_user();
    st.command = chaincode::kind::kGroup;
    if (groups_.empty() || chance(40)) {
      st.args["action"] = "create";
      st.args["name"] = fresh("g");
      st.args["members"] = acl_subset();
      st.label = st.args["name"];
      groups_.push_back(st.label);
    } else {
      st.args["action"] = chance(70) ? "add_member" : "remove_member";
      st.args["group"] = "$" + groups_[pick(groups_.size())];
      st.args["member"] = "participant:" + any_user();
    }
  } else if (roll < 97) {
    st.actor = actor_for(f);
    st.command = chaincode::kind::kSetAcl;
    st.args["asset"] = "file:" + f.path;
    static constexpr std::array<const char*, 3> kLists = {"readACL", "writeACL", "execACL"};
    st.args["list"] = kLists[pick(kLists.size())];
    st.args["entries"] = acl_subset(f.owner);
  } else if (roll < 98 && dirs.size() > 1) {
    st.actor = any_user();
    st.command = chaincode::kind::kRmdir;
    st.args["dir"] = dirs[1 + pick(dirs.size() - 1)];
  } else {
    st.actor = any_user();
    st.command = chaincode::kind::kLs;
    st.args["dir"] = random_dir();
  }
  return st;
}

WorkloadRun run_random(Simulation& sim, const WorkloadOptions& options) {
  auto& net = sim.network();
  scenario::ScenarioRunner runner(sim);
  RandomClient client(sim, options.seed);
  WorkloadRun out;
  out.recorded.max_steps = options.max_steps;

  const auto control = [&](const char* command) {
    ScenarioStep st;
    st.step = net.now();
    st.command = command;
    st.args["peer"] = options.crash_peer;
    runner.execute(st);
    out.recorded.steps.push_back(std::move(st));
  };
  const bool faulty = !options.crash_peer.empty();
  std::mt19937_64 spacing(options.seed * 31 + 7);

  while ((client.operations_issued() < options.operations || (faulty && net.now() < options.recover_at)) &&
         net.now() < options.max_steps) {
    sim.step();
    const auto now = net.now();
    if (faulty && now == options.crash_at) {
      control("crash_peer");
      continue;
    }
    if (faulty && options.recover_at != 0 && now == options.recover_at) {
      control("recover_peer");
      continue;
    }
    if (client.operations_issued() >= options.operations || spacing() % 4 == 0) continue;
    auto st = client.next();
    runner.execute(st);
    out.recorded.steps.push_back(std::move(st));
  }
  out.operations = client.operations_issued();
  out.outcome = scenario::finish(sim, options.max_steps);
  return out;
}

}  // namespace provledger::workload
