// SPDX-License-Identifier: Apache-2.0

#include "provledger/workload.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace provledger::scenario {
namespace {

namespace fs = std::filesystem;

Scenario parse(const std::string& text) {
  return Scenario::from_json(nlohmann::json::parse(text), testing::two_org_config());
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "no error";
}

TEST(Scenario, ValidationMessages) {
  EXPECT_NE(parse_error(R"({"nope": []})").find("steps"), std::string::npos);
  EXPECT_NE(parse_error(R"({"steps": [{"step": 1, "actor": "alice", "command": "fly"}]})").find("unknown command"),
            std::string::npos);
  EXPECT_NE(parse_error(R"({"steps": [{"step": 2, "actor": "alice", "command": "ls"},
                                      {"step": 2, "actor": "alice", "command": "ls"}]})")
                .find("strictly increasing"),
            std::string::npos);
  EXPECT_NE(parse_error(R"({"steps": [{"step": 1, "actor": "zed", "command": "ls"}]})").find("unknown actor"),
            std::string::npos);
  EXPECT_NE(parse_error(R"({"steps": [{"step": 1, "command": "crash_peer", "args": {"peer": "p9"}}]})")
                .find("unknown peer"),
            std::string::npos);
  EXPECT_NE(parse_error(R"({"steps": [{"step": 1, "actor": "alice", "command": "requestOp",
                                       "args": {"op_type": "download", "file": "$missing"}}]})")
                .find("undefined label"),
            std::string::npos);
  EXPECT_NE(parse_error(R"({"steps": [{"step": 1, "actor": "alice", "command": "ls", "args": {"storage": "s7"}}]})")
                .find("unknown storage"),
            std::string::npos);
}

TEST(Scenario, JsonRoundTrip) {
  const auto sc = Scenario::load(testing::scenario_dir() / "demo.json", testing::two_org_config());
  ASSERT_EQ(sc.steps.size(), 3u);
  EXPECT_EQ(parse(sc.to_json().dump()).to_json(), sc.to_json());
  EXPECT_EQ(sc.steps.front().bytes, testing::bytes_of("hello provenance\n"));
}

TEST(Scenario, SyntaxErrorsCarryLine) {
  const auto path = fs::temp_directory_path() / ("provledger-bad-" + std::to_string(::getpid()) + ".json");
  std::ofstream(path) << "{\n  \"steps\": [\n    {\"step\": 1,,}\n  ]\n}\n";
  try {
    Scenario::load(path, testing::two_org_config());
    ADD_FAILURE() << "no error";
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find(path.string() + ":3"), std::string::npos) << e.what();
  }
  fs::remove(path);
}

TEST(Scenario, DemoRunsClean) {
  Simulation sim(testing::two_org_config());
  const auto out = run(sim, Scenario::load(testing::scenario_dir() / "demo.json", sim.network().config()));
  EXPECT_EQ(out.exit_code, 0) << out.message;
  EXPECT_EQ(out.message.rfind("ok: quiescent", 0), 0u);
  bool listed = false;
  for (const auto& t : sim.network().trace()) listed |= t.action == "ls" && t.detail.find("data.txt") != std::string::npos;
  EXPECT_TRUE(listed);
}

TEST(Scenario, DroppedConfirmWithoutTimeoutNeverQuiesces) {
  auto cfg = testing::two_org_config();
  cfg.op_timeout = 0;
  Simulation sim(cfg);
  auto sc = Scenario::load(testing::scenario_dir() / "faults" / "05-drop-upload.json", cfg);
  sc.max_steps = 120;
  const auto out = run(sim, sc);
  EXPECT_EQ(out.exit_code, 1);
  EXPECT_NE(out.message.find("quiescence"), std::string::npos);
}

TEST(Queries, HistoryOfMovedThenDeletedFile) {
  Simulation sim(testing::two_org_config());
  ScenarioRunner runner(sim);
  ScenarioStep up;
  up.actor = "alice";
  up.command = "requestOp";
  up.args = {{"op_type", "upload"}, {"dir", "/"}, {"name", "h.txt"}, {"storage", "s1"}};
  up.bytes = testing::bytes_of("history\n");
  up.label = "h";
  runner.execute(up);
  sim.run_until_quiescent(100);
  ScenarioStep mk{0, "alice", "mkdir", {{"parent", "/"}, {"name", "sub"}}, std::nullopt, ""};
  runner.execute(mk);
  sim.run_until_quiescent(100);
  runner.execute({0, "alice", "mvfile", {{"file", "/h.txt"}, {"dir", "/sub"}}, std::nullopt, ""});
  sim.run_until_quiescent(100);
  const auto file_id = chaincode::file_id_for_tx(runner.label("h")->tx_id);
  runner.execute({0, "alice", "requestOp", {{"op_type", "delete"}, {"file", "/sub/h.txt"}}, std::nullopt, ""});
  sim.run_until_quiescent(100);
  const auto h = chaincode::query_history(sim.ledger(), file_id);
  ASSERT_EQ(h.size(), 5u);
  EXPECT_EQ(h[0].kind, "requestOp");
  EXPECT_EQ(h[1].kind, "confirmOp");
  EXPECT_EQ(h[2].kind, "mvfile");
  EXPECT_EQ(h[3].kind, "requestOp");
  EXPECT_EQ(h[4].kind, "confirmOp");
  EXPECT_EQ(h[4].summary.rfind("removed", 0), 0u);
  for (std::size_t i = 1; i < h.size(); ++i)
    EXPECT_LT(std::pair(h[i - 1].block_height, h[i - 1].tx_index), std::pair(h[i].block_height, h[i].tx_index));
  EXPECT_THROW(chaincode::query_history(sim.ledger(), uuid_from("never")), chaincode::ChaincodeError);
}

TEST(Queries, ListingRequiresReadAccess) {
  Simulation sim(testing::two_org_config());
  ScenarioRunner runner(sim);
  runner.execute({0, "alice", "mkdir", {{"parent", "/"}, {"name", "mine"}}, std::nullopt, "d"});
  sim.run_until_quiescent(100);
  const auto dir = chaincode::resolve_directory(sim.state(), "/mine");
  const auto& cfg = sim.network().config();
  EXPECT_NO_THROW(chaincode::query_directory(sim.state(), dir, cfg.participant_id("alice")));
  EXPECT_THROW(chaincode::query_directory(sim.state(), dir, cfg.participant_id("bob")), chaincode::ChaincodeError);
}

TEST(Queries, OperationStatusCoordinates) {
  Simulation sim(testing::two_org_config());
  ScenarioRunner runner(sim);
  ScenarioStep up{0, "bob", "requestOp", {{"op_type", "upload"}, {"dir", "/"}, {"name", "b"}, {"storage", "s2"}},
                  testing::bytes_of("b"), "b"};
  runner.execute(up);
  sim.run_until_quiescent(100);
  const auto s =
      chaincode::query_operation(sim.state(), &sim.ledger(), chaincode::op_id_for_tx(runner.label("b")->tx_id));
  ASSERT_TRUE(s.request_at && s.ack_at && s.response_at);
  EXPECT_LT(s.request_at->block_height, s.ack_at->block_height);
  EXPECT_LT(s.ack_at->block_height, s.response_at->block_height);
}

TEST(Workload, CrashDuringRandomRunConverges) {
  Simulation sim(workload::random_network(77));
  workload::WorkloadOptions opt;
  opt.seed = 77;
  opt.operations = 60;
  opt.crash_peer = "peer2b";
  opt.crash_at = 10;
  opt.recover_at = 70;
  const auto run = workload::run_random(sim, opt);
  EXPECT_EQ(run.outcome.exit_code, 0) << run.outcome.message;
  for (const auto& p : run.outcome.report.peers) EXPECT_TRUE(p.up) << p.peer_id;
  EXPECT_TRUE(run.outcome.report.consistent());
}

TEST(Workload, RecordedRunReplaysExactly) {
  const auto cfg = workload::random_network(5);
  Simulation live(cfg);
  workload::WorkloadOptions opt;
  opt.seed = 5;
  opt.operations = 40;
  const auto run = workload::run_random(live, opt);
  Simulation replayed(cfg);
  const auto out = scenario::run(replayed, Scenario::from_json(run.recorded.to_json(), cfg));
  EXPECT_EQ(out.exit_code, 0) << out.message;
  EXPECT_EQ(replayed.ledger(), live.ledger());
}

// CLI exit codes and output.
class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("provledger-cli-" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args, std::string* out = nullptr) {
    const auto log = dir_ / "stdout.txt";
    const auto cmd = std::string(PROVLEDGER_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (out) {
      std::ifstream in(log);
      std::stringstream ss;
      ss << in.rdbuf();
      *out = ss.str();
    }
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  std::string scenario(const std::string& name) const { return (testing::scenario_dir() / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, RunQueryTamperVerify) {
  const auto out_dir = (dir_ / "out").string();
  const auto dump = out_dir + "/ledger.bin";
  std::string text;
  ASSERT_EQ(run("run --config " + scenario("network.json") + " --scenario " + scenario("demo.json") +
                    " --seed 7 --out " + out_dir,
                &text),
            0)
      << text;
  for (const char* f : {"ledger.bin", "ledger.jsonl", "trace.jsonl", "audit.json", "digests.json", "report.json"})
    EXPECT_TRUE(fs::exists(fs::path(out_dir) / f)) << f;

  ASSERT_EQ(run("query ls --dump " + dump + " --dir /", &text), 0) << text;
  EXPECT_NE(text.find("data.txt"), std::string::npos);
  ASSERT_EQ(run("query history --dump " + dump + " --file /data.txt", &text), 0) << text;
  EXPECT_NE(text.find("confirmOp"), std::string::npos);
  EXPECT_EQ(run("query opstat --dump " + dump + " --op " + uuid_from("nope"), &text), 1);
  EXPECT_NE(text.find("not found"), std::string::npos);

  ASSERT_EQ(run("query verify --dump " + dump, &text), 0) << text;
  EXPECT_NE(text.find("intact"), std::string::npos);
  ASSERT_EQ(run("tamper --dump " + dump + " --height 2 --offset 40"), 0);
  EXPECT_EQ(run("query verify --dump " + dump, &text), 1);
  EXPECT_NE(text.find("first-bad-height=2"), std::string::npos) << text;
  EXPECT_EQ(run("tamper --dump " + dump + " --height 999 --offset 0"), 2);
}

TEST_F(Cli, BadInputsExitTwo) {
  EXPECT_EQ(run("run --config /nonexistent.json --scenario " + scenario("demo.json") + " --seed 1 --out " +
                (dir_ / "x").string()),
            2);
  const auto bad = dir_ / "bad.json";
  std::ofstream(bad) << R"({"steps": [{"step": 1, "actor": "alice", "command": "fly"}]})";
  EXPECT_EQ(run("run --config " + scenario("network.json") + " --scenario " + bad.string() + " --seed 1 --out " +
                (dir_ / "y").string()),
            2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, SameSeedSameBytes) {
  const auto a = dir_ / "a", b = dir_ / "b";
  const auto base = "run --config " + scenario("network.json") + " --scenario " + scenario("faults/01-crash-recover.json") +
                    " --seed 3 --out ";
  ASSERT_EQ(run(base + a.string()), 0);
  ASSERT_EQ(run(base + b.string()), 0);
  for (const auto& e : fs::directory_iterator(a)) {
    std::ifstream x(e.path(), std::ios::binary), y(b / e.path().filename(), std::ios::binary);
    std::stringstream sx, sy;
    sx << x.rdbuf();
    sy << y.rdbuf();
    EXPECT_EQ(sx.str(), sy.str()) << e.path().filename();
  }
}

}  // namespace
}  // namespace provledger::scenario
