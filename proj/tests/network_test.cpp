// SPDX-License-Identifier: Apache-2.0

#include "provledger/simulation.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

namespace provledger {
namespace {

using network::Fault;
using network::TxState;

scenario::ScenarioStep step_of(std::string actor, std::string command, std::map<std::string, std::string> args,
                               std::string bytes = {}) {
  scenario::ScenarioStep st;
  st.actor = std::move(actor);
  st.command = std::move(command);
  st.args = std::move(args);
  if (!bytes.empty()) st.bytes = testing::bytes_of(bytes);
  return st;
}

scenario::ScenarioStep upload(std::string who, std::string name, std::string storage, std::string content) {
  return step_of(std::move(who), "requestOp",
                 {{"op_type", "upload"}, {"dir", "/"}, {"name", std::move(name)}, {"storage", std::move(storage)}},
                 std::move(content));
}

TEST(Network, GenesisIsSharedByAllPeers) {
  Simulation sim(testing::two_org_config());
  const auto r = sim.network().report();
  ASSERT_EQ(r.peers.size(), 4u);
  EXPECT_TRUE(r.consistent());
  EXPECT_EQ(r.peers.front().height, 0u);
  EXPECT_TRUE(sim.network().quiescent());
}

TEST(Network, RejectionsAreNeverQueued) {
  Simulation sim(testing::two_org_config());
  auto r = sim.submit("alice", "requestOp", {{"op_type", "download"}, {"file", uuid_from("nothing")}});
  EXPECT_FALSE(r.accepted);
  EXPECT_NE(r.diagnostic.find("not-found"), std::string::npos);
  EXPECT_EQ(sim.network().queued(), 0u);
  ASSERT_NE(sim.network().tx_status(r.tx_id), nullptr);
  EXPECT_EQ(sim.network().tx_status(r.tx_id)->state, TxState::rejected);
  EXPECT_FALSE(sim.submit("mallory", "mkdir", {}).accepted);
}

TEST(Network, BatchSizeCutsBlocks) {
  auto cfg = testing::two_org_config();
  cfg.batch_size = 2;
  cfg.batch_timer = 1000;
  Simulation sim(cfg);
  scenario::ScenarioRunner runner(sim);
  for (int i = 0; i < 3; ++i)
    runner.execute(step_of("alice", "mkdir", {{"parent", "/"}, {"name", "d" + std::to_string(i)}}));
  EXPECT_EQ(sim.network().queued(), 3u);
  sim.step();
  EXPECT_EQ(sim.ledger().size(), 2u);
  EXPECT_EQ(sim.ledger().tip().transactions.size(), 2u);
  EXPECT_EQ(sim.network().queued(), 1u);
}

TEST(Network, TimerCutsPartialBatches) {
  auto cfg = testing::two_org_config();
  cfg.batch_size = 50;
  cfg.batch_timer = 3;
  Simulation sim(cfg);
  scenario::ScenarioRunner runner(sim);
  runner.execute(step_of("alice", "mkdir", {{"parent", "/"}, {"name", "d"}}));
  sim.step();
  sim.step();
  EXPECT_EQ(sim.ledger().size(), 1u);
  sim.step();
  EXPECT_EQ(sim.ledger().size(), 2u);
}

TEST(Network, UploadLifecycleReachesEveryPeer) {
  Simulation sim(testing::two_org_config());
  scenario::ScenarioRunner runner(sim);
  runner.execute(upload("bob", "b.txt", "s2", "bravo"));
  const auto rep = sim.run_until_quiescent(200);
  EXPECT_TRUE(rep.quiescent);
  EXPECT_TRUE(rep.consistent());
  EXPECT_EQ(rep.event_counts.at("OperationCompleted"), 1u);
  for (const auto& p : sim.network().peers()) {
    const auto f = testing::file_named(p.state, "b.txt");
    ASSERT_TRUE(f);
    EXPECT_FALSE(f->temporary);
  }
  for (const auto& inv : check_invariants(sim)) EXPECT_TRUE(inv.ok) << inv.name << ": " << inv.detail;
}

TEST(Network, CrashedPeerCatchesUpOnRecovery) {
  Simulation sim(testing::two_org_config());
  scenario::ScenarioRunner runner(sim);
  sim.network().inject_fault({Fault::Kind::crash_peer, "peer2b", 0});
  runner.execute(upload("alice", "a.txt", "s1", "alpha"));
  sim.run_until_quiescent(200);
  const auto lagging = sim.network().peer("peer2b").ledger.size();
  EXPECT_LT(lagging, sim.ledger().size());
  sim.network().inject_fault({Fault::Kind::recover_peer, "peer2b", 0});
  const auto rep = sim.run_until_quiescent(200);
  EXPECT_TRUE(rep.quiescent);
  EXPECT_TRUE(rep.consistent());
  EXPECT_EQ(sim.network().peer("peer2b").ledger, sim.ledger());
}

TEST(Network, FaultsOnUnknownPeersThrow) {
  Simulation sim(testing::two_org_config());
  EXPECT_THROW(sim.network().inject_fault({Fault::Kind::crash_peer, "peer9z", 0}), network::NetworkError);
}

TEST(Network, CrashedOrgCannotEndorse) {
  Simulation sim(testing::two_org_config());
  sim.network().inject_fault({Fault::Kind::crash_peer, "peer2a", 0});
  sim.network().inject_fault({Fault::Kind::crash_peer, "peer2b", 0});
  scenario::ScenarioRunner runner(sim);
  const auto r = runner.execute(upload("bob", "b.txt", "s2", "bravo"));
  ASSERT_TRUE(r);
  EXPECT_FALSE(r->accepted);
  EXPECT_NE(r->diagnostic.find("insufficient endorsements"), std::string::npos);
}

TEST(Network, DivergentEndorserCausesMismatch) {
  Simulation sim(testing::two_org_config());
  sim.network().inject_fault({Fault::Kind::diverge_endorser, "peer1b", 0});
  scenario::ScenarioRunner runner(sim);
  const auto r = runner.execute(upload("alice", "a.txt", "s1", "alpha"));
  ASSERT_TRUE(r);
  EXPECT_FALSE(r->accepted);
  EXPECT_NE(r->diagnostic.find("endorsement mismatch"), std::string::npos);
}

TEST(Network, ConcurrentMkdirOneWinner) {
  auto cfg = testing::two_org_config();
  cfg.batch_timer = 2;
  Simulation sim(cfg);
  scenario::ScenarioRunner runner(sim);
  const auto a = runner.execute(step_of("alice", "mkdir", {{"parent", "/"}, {"name", "same"}}));
  const auto b = runner.execute(step_of("bob", "mkdir", {{"parent", "/"}, {"name", "same"}}));
  sim.run_until_quiescent(100);
  EXPECT_EQ(sim.network().tx_status(a->tx_id)->state, TxState::valid);
  EXPECT_EQ(sim.network().tx_status(b->tx_id)->state, TxState::invalidated);
  EXPECT_EQ(listing_mismatches(sim.state()), 0u);
}

TEST(Network, SameInputsSameChain) {
  const auto run = [] {
    Simulation sim(testing::two_org_config());
    scenario::ScenarioRunner runner(sim);
    runner.execute(upload("alice", "a.txt", "s1", "alpha"));
    runner.execute(upload("bob", "b.txt", "s2", "bravo"));
    sim.run_until_quiescent(300);
    return ledger::dump_ledger(sim.ledger());
  };
  EXPECT_EQ(run(), run());
}

TEST(Network, SubscriptionsDeliverEachEventOnce) {
  Simulation sim(testing::two_org_config());
  auto& net = sim.network();
  const auto sub = net.subscribe([](const ledger::Event& ev) { return ev.name == "OperationRequested"; }, "org2");
  scenario::ScenarioRunner runner(sim);
  runner.execute(upload("alice", "a.txt", "s1", "alpha"));
  sim.run_until_quiescent(200);
  const auto first = net.drain(sub);
  ASSERT_EQ(first.size(), 1u);
  EXPECT_GT(first.front().block_height, 0u);
  EXPECT_TRUE(net.drain(sub).empty());
}

TEST(Storage, Transforms) {
  const auto in = testing::bytes_of("abc");
  EXPECT_EQ(storage::process_blob(testing::bytes_of("reverse\n"), in), testing::bytes_of("cba"));
  EXPECT_EQ(storage::process_blob(testing::bytes_of(" uppercase "), in), testing::bytes_of("ABC"));
  EXPECT_EQ(storage::process_blob(testing::bytes_of("digest-stamp"), in),
            testing::bytes_of("abc\n" + Digest::of("abc").hex()));
  EXPECT_THROW(storage::process_blob(testing::bytes_of("rm -rf"), in), storage::ProgramError);
}

TEST(Storage, StoreCapacityAndMoves) {
  storage::PhysicalStore a("a", 10), b("b", 4);
  a.put("f", testing::bytes_of("123456"));
  EXPECT_EQ(a.used_bytes(), 6u);
  EXPECT_THROW(a.put("g", testing::bytes_of("12345")), storage::StoreError);
  a.put("f", testing::bytes_of("1234567890"));
  EXPECT_EQ(a.used_bytes(), 10u);
  EXPECT_THROW(b.transfer_in("f", a.get("f")), storage::StoreError);
  EXPECT_THROW(a.copy("f", "f2"), storage::StoreError);
  a.put("f", testing::bytes_of("12"));
  a.copy("f", "f2");
  EXPECT_EQ(a.used_bytes(), 4u);
  b.transfer_in("f", a.transfer_out("f"));
  EXPECT_FALSE(a.contains("f"));
  EXPECT_EQ(b.digest_of("f"), Digest::of("12"));
  EXPECT_THROW(a.remove("missing"), storage::StoreError);
}

TEST(Storage, AuditFlagsEachKindOfDamage) {
  Simulation sim(testing::two_org_config());
  scenario::ScenarioRunner runner(sim);
  // Sequential: two creations in one directory within a block conflict.
  runner.execute(upload("alice", "a.txt", "s1", "alpha"));
  sim.run_until_quiescent(200);
  runner.execute(upload("alice", "b.txt", "s1", "bravo"));
  sim.run_until_quiescent(200);
  EXPECT_EQ(storage::audit_failures(sim.audit()), 0u);
  const auto sid = sim.network().config().storage_id("s1");
  auto& store = sim.stores().at(sid);
  const auto fa = testing::file_named(sim.state(), "a.txt");
  const auto fb = testing::file_named(sim.state(), "b.txt");
  ASSERT_TRUE(fa && fb);
  const auto& a = *fa;
  const auto& b = *fb;
  store.put(a.file_id, testing::bytes_of("tampered"));
  store.remove(b.file_id);
  store.put(uuid_from("stray"), testing::bytes_of("?"));
  std::map<std::string, std::string> status;
  for (const auto& e : sim.audit()) status[e.file_id] = e.status;
  EXPECT_EQ(status[a.file_id], "mismatch");
  EXPECT_EQ(status[b.file_id], "missing");
  EXPECT_EQ(status[uuid_from("stray")], "orphan");
  EXPECT_EQ(storage::audit_failures(sim.audit()), 3u);
}

TEST(Storage, ScriptedAgentFailure) {
  Simulation sim(testing::two_org_config());
  scenario::ScenarioRunner runner(sim);
  const auto r = runner.execute(upload("alice", "a.txt", "s1", "alpha"));
  sim.agent_for_storage(sim.network().config().storage_id("s1"))
      ->failure_script()[chaincode::op_id_for_tx(r->tx_id)] = "disk on fire";
  sim.run_until_quiescent(200);
  const auto op = assets::StateView(sim.state()).require<assets::OperationAsset>(chaincode::op_id_for_tx(r->tx_id));
  EXPECT_EQ(op.state, assets::OpState::error);
  EXPECT_EQ(op.error_info, "disk on fire");
  EXPECT_EQ(storage::audit_failures(sim.audit()), 0u);
}

}  // namespace
}  // namespace provledger
