// SPDX-License-Identifier: Apache-2.0

#include "provledger/config.hpp"

#include <fstream>
#include <map>

namespace provledger {
namespace {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

std::vector<std::string> names_or_all(const std::optional<std::vector<std::string>>& names,
                                      const std::vector<ParticipantConfig>& all) {
  if (names) return *names;
  std::vector<std::string> out;
  for (const auto& p : all) out.push_back(p.name);
  return out;
}

ledger::Transaction genesis_tx(const std::string& key, Bytes value) {
  ledger::Transaction tx;
  tx.tx_id = uuid_from("genesis:" + key);
  tx.kind = ledger::kGenesisKind;
  tx.submitter = "genesis";
  tx.read_set.emplace(key, ledger::Version{});
  tx.write_set.emplace(key, std::move(value));
  return tx;
}

}  // namespace

std::string participant_id_for(std::string_view name) { return uuid_from("par:" + std::string(name)); }
std::string storage_id_for(std::string_view name) { return uuid_from("sto:" + std::string(name)); }
std::string root_directory_id() { return uuid_from("dir:/"); }

NetworkConfig NetworkConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("network config must be a JSON object");
  NetworkConfig c;
  try {
    for (const auto& o : j.value("organizations", nlohmann::json::array())) {
      OrgConfig org;
      org.id = o.at("id").get<std::string>();
      org.peers = get_or<std::vector<std::string>>(o, "peers", {});
      c.organizations.push_back(std::move(org));
    }
    for (const auto& p : j.value("participants", nlohmann::json::array())) {
      ParticipantConfig pc;
      pc.name = p.at("name").get<std::string>();
      pc.org = p.at("org").get<std::string>();
      for (const auto& r : get_or<std::vector<std::string>>(p, "roles", {"user"})) pc.roles.insert(assets::role_from_string(r));
      c.participants.push_back(std::move(pc));
    }
    for (const auto& s : j.value("storages", nlohmann::json::array())) {
      StorageConfig sc;
      sc.name = s.at("name").get<std::string>();
      sc.org = s.at("org").get<std::string>();
      sc.dms = s.at("dms").get<std::string>();
      sc.capacity_bytes = get_or<std::uint64_t>(s, "capacity", sc.capacity_bytes);
      c.storages.push_back(std::move(sc));
    }
    if (j.contains("endorsement")) {
      const auto& e = j.at("endorsement");
      if (e.contains("k")) {
        c.endorsement.mode = EndorsementPolicyConfig::Mode::k_of_n;
        c.endorsement.k = e.at("k").get<std::size_t>();
        c.endorsement.endorsers = e.at("endorsers").get<std::vector<std::string>>();
      } else if (get_or<std::string>(e, "policy", "per_org") != "per_org") {
        throw ConfigError("unknown endorsement policy");
      }
    }
    if (j.contains("root")) {
      const auto& r = j.at("root");
      if (r.contains("owner")) c.root.owner = r.at("owner").get<std::string>();
      if (r.contains("read")) c.root.read = r.at("read").get<std::vector<std::string>>();
      if (r.contains("write")) c.root.write = r.at("write").get<std::vector<std::string>>();
    }
    c.batch_size = get_or<std::size_t>(j, "batch_size", c.batch_size);
    c.batch_timer = get_or<std::uint64_t>(j, "batch_timer", c.batch_timer);
    c.op_timeout = get_or<std::uint64_t>(j, "op_timeout", c.op_timeout);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.parallel_endorsement = get_or<bool>(j, "parallel_endorsement", c.parallel_endorsement);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("network config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("network config: ") + e.what());
  }
  return c;
}

NetworkConfig NetworkConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open network config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("network config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json NetworkConfig::to_json() const {
  nlohmann::json j;
  auto& orgs = j["organizations"] = nlohmann::json::array();
  for (const auto& o : organizations) orgs.push_back({{"id", o.id}, {"peers", o.peers}});
  auto& parts = j["participants"] = nlohmann::json::array();
  for (const auto& p : participants) {
    std::vector<std::string> roles;
    for (auto r : p.roles) roles.emplace_back(assets::to_string(r));
    parts.push_back({{"name", p.name}, {"org", p.org}, {"roles", roles}});
  }
  auto& stores = j["storages"] = nlohmann::json::array();
  for (const auto& s : storages)
    stores.push_back({{"name", s.name}, {"org", s.org}, {"dms", s.dms}, {"capacity", s.capacity_bytes}});
  if (endorsement.mode == EndorsementPolicyConfig::Mode::k_of_n) {
    j["endorsement"] = {{"k", endorsement.k}, {"endorsers", endorsement.endorsers}};
  } else {
    j["endorsement"] = {{"policy", "per_org"}};
  }
  if (root.owner) j["root"]["owner"] = *root.owner;
  if (root.read) j["root"]["read"] = *root.read;
  if (root.write) j["root"]["write"] = *root.write;
  j["batch_size"] = batch_size;
  j["batch_timer"] = batch_timer;
  j["op_timeout"] = op_timeout;
  j["seed"] = seed;
  j["parallel_endorsement"] = parallel_endorsement;
  return j;
}

void NetworkConfig::validate() const {
  if (organizations.empty()) throw ConfigError("empty network");
  std::set<std::string> peer_ids;
  std::set<std::string> org_ids;
  for (const auto& o : organizations) {
    if (!org_ids.insert(o.id).second) throw ConfigError("duplicate organization " + o.id);
    if (o.peers.empty()) throw ConfigError("organization " + o.id + " has no peers");
    for (const auto& p : o.peers)
      if (!peer_ids.insert(p).second) throw ConfigError("duplicate peer " + p);
  }
  if (participants.empty()) throw ConfigError("network has no participants");
  std::set<std::string> names;
  for (const auto& p : participants) {
    if (!names.insert(p.name).second) throw ConfigError("duplicate participant " + p.name);
    if (!org_ids.contains(p.org)) throw ConfigError("participant " + p.name + " references unknown org " + p.org);
  }
  std::map<std::string, std::string> dms_binding;
  std::set<std::string> storage_names;
  for (const auto& s : storages) {
    if (!storage_names.insert(s.name).second) throw ConfigError("duplicate storage " + s.name);
    if (!org_ids.contains(s.org)) throw ConfigError("storage " + s.name + " references unknown org " + s.org);
    const auto* dms = find_participant(s.dms);
    if (!dms) throw ConfigError("storage " + s.name + " references unknown dms participant " + s.dms);
    if (!dms->roles.contains(assets::Role::dms_service))
      throw ConfigError("participant " + s.dms + " bound to storage " + s.name + " lacks role dms-service");
    if (!dms_binding.emplace(s.dms, s.name).second)
      throw ConfigError("dms participant " + s.dms + " is bound to more than one storage");
  }
  for (const auto& p : participants) {
    if (p.roles.contains(assets::Role::dms_service) && !dms_binding.contains(p.name))
      throw ConfigError("dms participant " + p.name + " is not bound to a storage");
  }
  if (endorsement.mode == EndorsementPolicyConfig::Mode::k_of_n) {
    if (endorsement.k < 1 || endorsement.k > endorsement.endorsers.size())
      throw ConfigError("endorsement policy requires 1 <= k <= number of endorsers");
    for (const auto& e : endorsement.endorsers)
      if (!peer_ids.contains(e) && !org_ids.contains(e)) throw ConfigError("unknown endorser " + e);
  }
  if (root.owner && !find_participant(*root.owner)) throw ConfigError("unknown root owner " + *root.owner);
  for (const auto* list : {&root.read, &root.write}) {
    if (!*list) continue;
    for (const auto& n : **list)
      if (!find_participant(n)) throw ConfigError("root ACL references unknown participant " + n);
  }
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (batch_timer == 0) throw ConfigError("batch_timer must be >= 1");
}

const ParticipantConfig* NetworkConfig::find_participant(std::string_view name) const {
  for (const auto& p : participants)
    if (p.name == name) return &p;
  return nullptr;
}

const StorageConfig* NetworkConfig::find_storage(std::string_view name) const {
  for (const auto& s : storages)
    if (s.name == name) return &s;
  return nullptr;
}

const OrgConfig* NetworkConfig::find_org(std::string_view id) const {
  for (const auto& o : organizations)
    if (o.id == id) return &o;
  return nullptr;
}

const OrgConfig* NetworkConfig::org_of_peer(std::string_view peer_id) const {
  for (const auto& o : organizations)
    for (const auto& p : o.peers)
      if (p == peer_id) return &o;
  return nullptr;
}

std::vector<std::string> NetworkConfig::all_peers() const {
  std::vector<std::string> out;
  for (const auto& o : organizations) out.insert(out.end(), o.peers.begin(), o.peers.end());
  return out;
}

std::string NetworkConfig::participant_id(std::string_view name) const { return participant_id_for(name); }
std::string NetworkConfig::storage_id(std::string_view name) const { return storage_id_for(name); }

std::string NetworkConfig::verify_token(std::string_view name) const {
  return Digest::of("token/" + std::to_string(seed) + "/" + std::string(name)).hex();
}

Digest NetworkConfig::peer_secret(std::string_view peer_id) const {
  return Digest::of("peer/" + std::to_string(seed) + "/" + std::string(peer_id));
}

std::string NetworkConfig::root_owner_name() const {
  if (root.owner) return *root.owner;
  for (const auto& p : participants)
    if (p.roles.contains(assets::Role::orderer_admin)) return p.name;
  return participants.front().name;
}

ledger::Block make_genesis(const NetworkConfig& config) {
  config.validate();
  std::vector<ledger::Transaction> txs;
  for (const auto& p : config.participants) {
    assets::Participant a;
    a.participant_id = config.participant_id(p.name);
    a.display_name = p.name;
    a.org_id = p.org;
    a.verify_token = config.verify_token(p.name);
    a.roles = p.roles;
    txs.push_back(genesis_tx(a.key(), assets::encode(a)));
  }
  for (const auto& s : config.storages) {
    assets::StorageSite a;
    a.storage_id = config.storage_id(s.name);
    a.display_name = s.name;
    a.org_id = s.org;
    a.dms_participant = config.participant_id(s.dms);
    a.capacity_bytes = s.capacity_bytes;
    txs.push_back(genesis_tx(a.key(), assets::encode(a)));
  }
  assets::DirectoryAsset root;
  root.dir_id = root_directory_id();
  root.name = "/";
  root.owner = config.participant_id(config.root_owner_name());
  for (const auto& n : names_or_all(config.root.read, config.participants))
    root.read_acl.push_back({assets::RefKind::participant, config.participant_id(n)});
  for (const auto& n : names_or_all(config.root.write, config.participants))
    root.write_acl.push_back({assets::RefKind::participant, config.participant_id(n)});
  txs.push_back(genesis_tx(root.key(), assets::encode(root)));
  return ledger::Block::make(0, Digest{}, std::move(txs));
}

}  // namespace provledger
