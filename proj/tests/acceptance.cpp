// SPDX-License-Identifier: Apache-2.0
//
// Acceptance criteria 1-10. One PASS/FAIL line per criterion; exit status 1
// when any criterion fails.

#include "provledger/parallel.hpp"
#include "provledger/workload.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <unistd.h>

using namespace provledger;
using assets::OperationAsset;
using assets::OpState;
using assets::OpType;
using scenario::ScenarioStep;
using testing::file_named;
using testing::operations_of;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

int failures = 0;
std::map<int, std::string> lines;

void report(int n, const char* title, const Verdict& v, const std::string& summary) {
  lines[n] = std::string(v.ok ? "[PASS]" : "[FAIL]") + " criterion " + std::to_string(n) + " " + title + ": " +
             (v.ok ? summary : v.detail);
  if (!v.ok) ++failures;
}

// Audit entries seen across every run, and the non-ok ones.
std::size_t audited = 0;
std::size_t audit_bad = 0;
std::string audit_first_bad;

void tally_audit(const Simulation& sim, const std::string& where) {
  for (const auto& e : sim.audit()) {
    ++audited;
    if (e.status == "ok") continue;
    if (audit_bad++ == 0) audit_first_bad = where + ": " + e.status + " " + e.file_id;
  }
}

std::string op_summary(const OperationAsset& op) {
  std::string s(assets::to_string(op.state));
  if (!op.error_info.empty()) s += "(" + op.error_info + ")";
  return s;
}

ScenarioStep step_of(std::string actor, std::string command, std::map<std::string, std::string> args) {
  ScenarioStep st;
  st.actor = std::move(actor);
  st.command = std::move(command);
  st.args = std::move(args);
  return st;
}

// Criteria 1, 3, 5: random workloads on 4 orgs x 2 peers.
struct WorkloadStats {
  std::size_t min_ops = ~std::size_t{0};
  std::size_t completed = 0;
  std::size_t listings_checked = 0;
};

void criteria_1_3_5() {
  Verdict c1, c3, c5;
  WorkloadStats stats;
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto tag = "seed " + std::to_string(seed);
    Simulation sim(workload::random_network(seed));
    workload::WorkloadOptions opt;
    opt.seed = seed;
    opt.operations = 120;
    const auto run = workload::run_random(sim, opt);
    stats.min_ops = std::min(stats.min_ops, run.operations);
    if (run.operations < 100) c1.fail(tag + ": only " + std::to_string(run.operations) + " operations");
    if (run.outcome.exit_code != 0) c1.fail(tag + ": " + run.outcome.message);
    if (!run.outcome.report.quiescent) c1.fail(tag + ": not quiescent");
    const auto& peers = run.outcome.report.peers;
    for (const auto& p : peers) {
      if (!p.up || p.halted) c1.fail(tag + ": peer " + p.peer_id + " not serving");
      if (p.height != peers.front().height || p.tip != peers.front().tip || p.state_digest != peers.front().state_digest)
        c1.fail(tag + ": peer " + p.peer_id + " disagrees with " + peers.front().peer_id);
    }

    for (const auto& peer : sim.network().peers()) {
      const auto bad = two_record_violations(peer.state, peer.ledger);
      if (bad) c3.fail(tag + " " + peer.peer_id + ": " + std::to_string(bad) + " completed ops lack two records");
      const auto mism = listing_mismatches(peer.state);
      if (mism) c5.fail(tag + " " + peer.peer_id + ": " + std::to_string(mism) + " directory listings differ");
      stats.listings_checked += testing::all_assets<assets::DirectoryAsset>(peer.state).size();
    }
    for (const auto& op : testing::all_assets<OperationAsset>(sim.state())) {
      if (op.state != OpState::completed) continue;
      ++stats.completed;
      const auto req = chaincode::locate_transaction(sim.ledger(), op.request_tx);
      const auto resp = op.response_tx ? chaincode::locate_transaction(sim.ledger(), *op.response_tx) : std::nullopt;
      if (!req || !resp || (req->block_height == resp->block_height && req->tx_index == resp->tx_index))
        c3.fail(tag + ": op " + op.op_id + " lacks distinct committed request/response");
    }
    tally_audit(sim, tag);
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 60.0) c1.fail("took " + std::to_string(elapsed) + " s (limit 60 s)");
  char buf[160];
  std::snprintf(buf, sizeof buf, "50 seeds converged, >= %zu ops each, %.2f s", stats.min_ops, elapsed);
  report(1, "convergence", c1, buf);
  if (stats.completed == 0) c3.fail("no completed operations observed");
  report(3, "two-record", c3, std::to_string(stats.completed) + " completed ops, each with two committed txs");
  report(5, "listing-equivalence", c5,
         std::to_string(stats.listings_checked) + " directory listings equal the full scan");
}

// Criterion 2: upload lifecycle, checked after every step.
void criterion_2() {
  Verdict v;
  Simulation sim(testing::two_org_config());
  scenario::ScenarioRunner runner(sim);
  const auto content = testing::bytes_of("two-phase payload\n");
  auto up = step_of("alice", "requestOp", {{"op_type", "upload"}, {"dir", "/"}, {"name", "staged.txt"}, {"storage", "s1"}});
  up.bytes = content;
  const auto r = runner.execute(up);
  if (!r || !r->accepted) {
    v.fail("upload request not accepted");
    report(2, "two-phase", v, "");
    return;
  }
  const auto op_id = chaincode::op_id_for_tx(r->tx_id);
  const auto file_id = chaincode::file_id_for_tx(r->tx_id);
  const auto root = root_directory_id();
  const auto alice = sim.network().config().participant_id("alice");
  const auto listed = [&](const ledger::WorldState& st) {
    for (const auto& f : chaincode::query_directory(st, root, alice))
      if (f.file_id == file_id || f.name == "staged.txt") return true;
    return false;
  };

  std::size_t phase_steps = 0;
  bool completed = false;
  for (int i = 0; i < 200 && !completed; ++i) {
    sim.step();
    const auto op = assets::StateView(sim.state()).load<OperationAsset>(op_id);
    if (!op) continue;
    if (op->state == OpState::completed) {
      completed = true;
      break;
    }
    if (op->state == OpState::error) {
      v.fail("upload failed: " + op->error_info);
      break;
    }
    ++phase_steps;
    for (const auto& peer : sim.network().peers())
      if (peer.serving() && listed(peer.state)) v.fail("ls shows the file before confirm on " + peer.peer_id);
    const auto dl = runner.execute(step_of("alice", "requestOp", {{"op_type", "download"}, {"file", file_id}}));
    if (dl && dl->accepted) v.fail("download accepted before confirm at step " + std::to_string(sim.network().now()));
  }
  if (!completed) v.fail("upload never completed");
  if (phase_steps == 0) v.fail("no step observed between request and confirm commits");
  if (v.ok) {
    bool found = false;
    for (const auto& f : chaincode::query_directory(sim.state(), root, alice))
      if (f.file_id == file_id) {
        found = true;
        if (f.content_digest != Digest::of(content)) v.fail("listed digest differs from the uploaded bytes");
      }
    if (!found) v.fail("file not listed after confirm");
    const auto dl = runner.execute(step_of("alice", "requestOp", {{"op_type", "download"}, {"file", file_id}}));
    if (!dl || !dl->accepted) v.fail("download denied after confirm: " + (dl ? dl->diagnostic : std::string{}));
  }
  const auto out = sim.run_until_quiescent(500);
  if (!out.quiescent) v.fail("not quiescent after the download");
  tally_audit(sim, "criterion 2");
  report(2, "two-phase", v, std::to_string(phase_steps) + " intermediate steps hidden and undownloadable");
}

// Criterion 4: ACL decisions against the brute-force oracle.
void criterion_4() {
  Verdict v;
  std::mt19937_64 rng(4);
  std::size_t allowed = 0;
  std::size_t max_depth = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 10000; ++i) {
    const auto in = testing::random_acl_instance(rng);
    max_depth = std::max(max_depth, in.depth);
    const bool expect = testing::acl_oracle(in);
    const bool got = assets::check_access(in.view, in.subject, in.acl, in.owner).allowed;
    if (got != expect) v.fail("instance " + std::to_string(i) + ": got " + (got ? "allow" : "deny"));
    allowed += expect;
  }
  const double elapsed = seconds_since(t0);
  if (max_depth > 5) v.fail("generator exceeded depth 5");
  if (elapsed >= 5.0) v.fail("took " + std::to_string(elapsed) + " s (limit 5 s)");
  char buf[160];
  std::snprintf(buf, sizeof buf, "10000 instances (%zu allowed, depth <= %zu) match, %.2f s", allowed, max_depth,
                elapsed);
  report(4, "acl-oracle", v, buf);
}

// Criterion 6: byte flips in a 20-block dump.
void criterion_6() {
  Verdict v;
  Simulation sim(workload::random_network(6));
  workload::WorkloadOptions opt;
  opt.seed = 6;
  opt.operations = 40;
  workload::run_random(sim, opt);
  if (sim.ledger().size() < 20) {
    v.fail("workload produced only " + std::to_string(sim.ledger().size()) + " blocks");
    report(6, "tamper-detection", v, "");
    return;
  }
  ledger::Ledger twenty;
  for (std::uint64_t h = 0; h < 20; ++h) twenty.append(sim.ledger().at(h));
  const auto dump = ledger::dump_ledger(twenty);
  const auto frames = ledger::split_frames(dump);
  if (frames.size() != 20) v.fail("dump has " + std::to_string(frames.size()) + " frames");
  if (!ledger::verify_dump(dump).intact) v.fail("untampered dump does not verify");
  std::mt19937_64 rng(66);
  std::size_t exact = 0;
  for (int i = 0; i < 100 && v.ok; ++i) {
    const auto h = rng() % frames.size();
    const auto off = frames[h].offset + rng() % frames[h].length;
    auto copy = dump;
    copy[off] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    const auto rep = ledger::verify_dump(copy);
    if (rep.intact || !rep.first_bad_height || *rep.first_bad_height > h)
      v.fail("flip at block " + std::to_string(h) + " byte " + std::to_string(off) + ": " + rep.summary());
    else if (*rep.first_bad_height == h)
      ++exact;
  }
  report(6, "tamper-detection", v, "100 flips detected at or before the tampered block (" + std::to_string(exact) +
                                       " exactly at it)");
}

// Criterion 7: two deletes of one file in the same batch.
struct DeleteRace {
  std::string winner;  // "alice" / "bob"
  std::string detail;
};

DeleteRace delete_race(bool alice_first) {
  auto cfg = testing::two_org_config();
  cfg.batch_size = 10;
  cfg.batch_timer = 2;
  Simulation sim(cfg);
  scenario::ScenarioRunner runner(sim);
  auto up = step_of("alice", "requestOp",
                    {{"op_type", "upload"}, {"dir", "/"}, {"name", "contested.txt"}, {"storage", "s1"},
                     {"write", "participant:bob"}});
  up.bytes = testing::bytes_of("contested\n");
  runner.execute(up);
  sim.run_until_quiescent(500);
  const std::string first = alice_first ? "alice" : "bob", second = alice_first ? "bob" : "alice";
  const auto a = runner.execute(step_of(first, "requestOp", {{"op_type", "delete"}, {"file", "/contested.txt"}}));
  const auto b = runner.execute(step_of(second, "requestOp", {{"op_type", "delete"}, {"file", "/contested.txt"}}));
  DeleteRace out;
  if (!a || !b || !a->accepted || !b->accepted) {
    out.detail = "a delete was rejected at endorsement";
    return out;
  }
  const auto report = sim.run_until_quiescent(500);
  const auto* sa = sim.network().tx_status(a->tx_id);
  const auto* sb = sim.network().tx_status(b->tx_id);
  if (!report.quiescent || !sa || !sb) {
    out.detail = "no final statuses";
    return out;
  }
  if (sa->block_height != sb->block_height) {
    out.detail = "deletes landed in different blocks";
    return out;
  }
  const int valid = (sa->state == network::TxState::valid) + (sb->state == network::TxState::valid);
  if (valid != 1) {
    out.detail = std::to_string(valid) + " deletes valid";
    return out;
  }
  const auto ops = operations_of(sim.state(), OpType::delete_file);
  if (ops.size() != 1 || ops.front().state != OpState::completed || file_named(sim.state(), "contested.txt")) {
    out.detail = "unexpected final state";
    return out;
  }
  out.winner = sa->state == network::TxState::valid ? first : second;
  if (sa->tx_index > sb->tx_index) out.detail = "later tx in the batch won";
  tally_audit(sim, "criterion 7");
  return out;
}

void criterion_7() {
  Verdict v;
  const auto r1 = delete_race(true);
  const auto r2 = delete_race(false);
  const auto r3 = delete_race(true);
  for (const auto* r : {&r1, &r2, &r3})
    if (!r->detail.empty()) v.fail(r->detail);
  if (r1.winner != "alice" || r3.winner != "alice") v.fail("alice-first race won by " + r1.winner + "/" + r3.winner);
  if (r2.winner != "bob") v.fail("bob-first race won by " + r2.winner);
  report(7, "concurrent-deletes", v, "exactly one valid delete; the first in batch order wins, repeatably");
}

// Criterion 8: fault scenarios from scenarios/faults.
struct FaultCase {
  std::string file;
  bool tight = false;
  std::function<void(const Simulation&, Verdict&)> check;
};

void expect_op(const Simulation& sim, OpType type, std::size_t index, const std::string& want, Verdict& v) {
  const auto ops = operations_of(sim.state(), type);
  const auto position = [&](const OperationAsset& op) {
    const auto at = chaincode::locate_transaction(sim.ledger(), op.request_tx);
    return at ? std::pair{at->block_height, at->tx_index} : std::pair<std::uint64_t, std::uint64_t>{~0ull, 0};
  };
  std::vector<OperationAsset> sorted = ops;
  std::sort(sorted.begin(), sorted.end(), [&](const auto& x, const auto& y) { return position(x) < position(y); });
  if (index >= sorted.size()) {
    v.fail(std::string(assets::to_string(type)) + " op #" + std::to_string(index) + " missing");
    return;
  }
  const auto got = op_summary(sorted[index]);
  if (got != want)
    v.fail(std::string(assets::to_string(type)) + " op #" + std::to_string(index) + " is " + got + ", want " + want);
}

void expect_all_serving(const Simulation& sim, std::size_t want, Verdict& v) {
  std::size_t n = 0;
  for (const auto& p : sim.network().peers()) n += p.serving();
  if (n != want) v.fail(std::to_string(n) + " serving peers, want " + std::to_string(want));
}

void expect_no_temporaries(const Simulation& sim, Verdict& v) {
  for (const auto& f : testing::all_assets<assets::FileAsset>(sim.state()))
    if (f.temporary) v.fail("orphan provisional file " + f.name);
}

std::vector<FaultCase> fault_cases() {
  std::vector<FaultCase> c;
  c.push_back({"01-crash-recover.json", false, [](const Simulation& sim, Verdict& v) {
                 expect_all_serving(sim, 4, v);
                 if (!file_named(sim.state(), "b2.txt") || file_named(sim.state(), "a2.txt")) v.fail("wrong files");
               }});
  c.push_back({"02-crash-reference.json", false, [](const Simulation& sim, Verdict& v) {
                 expect_all_serving(sim, 4, v);
                 const auto a = file_named(sim.state(), "a.txt");
                 if (!a || a->home_storage != sim.network().config().storage_id("s2")) v.fail("a.txt not on s2");
               }});
  c.push_back({"03-crash-both-orgs.json", false, [](const Simulation& sim, Verdict& v) {
                 expect_all_serving(sim, 4, v);
                 expect_op(sim, OpType::download, 0, "completed", v);
                 expect_op(sim, OpType::copy_remote, 0, "completed", v);
               }});
  c.push_back({"04-crash-no-recover.json", false, [](const Simulation& sim, Verdict& v) {
                 expect_all_serving(sim, 3, v);
                 if (sim.network().peer("peer2b").up) v.fail("peer2b should stay down");
                 expect_op(sim, OpType::delete_file, 0, "completed", v);
               }});
  c.push_back({"05-drop-upload.json", false, [](const Simulation& sim, Verdict& v) {
                 expect_op(sim, OpType::upload, 0, "error(timeout)", v);
                 expect_op(sim, OpType::upload, 1, "completed", v);
                 expect_no_temporaries(sim, v);
                 if (file_named(sim.state(), "lost.txt")) v.fail("lost.txt still present");
               }});
  c.push_back({"06-drop-copy.json", false, [](const Simulation& sim, Verdict& v) {
                 expect_op(sim, OpType::copy_local, 0, "error(timeout)", v);
                 if (file_named(sim.state(), "a-copy.txt")) v.fail("copy output exists");
                 const auto a = file_named(sim.state(), "a.txt");
                 if (!a || !a->pending_op.empty()) v.fail("source still locked");
               }});
  c.push_back({"07-drop-delete.json", false, [](const Simulation& sim, Verdict& v) {
                 expect_op(sim, OpType::delete_file, 0, "error(timeout)", v);
                 const auto b = file_named(sim.state(), "b.txt");
                 if (!b || !b->pending_op.empty()) v.fail("b.txt missing or still locked");
                 else if (!sim.stores().at(b->home_storage).contains(b->file_id)) v.fail("b.txt blob removed");
               }});
  c.push_back({"08-capacity.json", true, [](const Simulation& sim, Verdict& v) {
                 expect_op(sim, OpType::upload, 1, "error(capacity)", v);
                 expect_op(sim, OpType::copy_remote, 0, "completed", v);
                 expect_op(sim, OpType::copy_remote, 1, "error(capacity)", v);
                 expect_no_temporaries(sim, v);
               }});
  c.push_back({"09-bad-program.json", false, [](const Simulation& sim, Verdict& v) {
                 expect_op(sim, OpType::process, 0, "completed", v);
                 expect_op(sim, OpType::process, 1, "error(bad program)", v);
                 const auto out = file_named(sim.state(), "out-ok.txt");
                 if (!out || out->content_digest != Digest::of(testing::bytes_of("SOME INPUT\n")))
                   v.fail("out-ok.txt wrong or missing");
                 if (file_named(sim.state(), "out-bad.txt")) v.fail("out-bad.txt exists");
                 expect_no_temporaries(sim, v);
               }});
  c.push_back({"10-diverge.json", false, [](const Simulation& sim, Verdict& v) {
                 bool mismatch = false;
                 for (const auto& t : sim.network().trace()) mismatch |= t.detail.find("endorsement mismatch") != std::string::npos;
                 if (!mismatch) v.fail("no endorsement mismatch recorded");
                 expect_all_serving(sim, 3, v);
                 const auto b = file_named(sim.state(), "b.txt");
                 if (!b || b->content_digest != Digest::of(testing::bytes_of("bob second try\n")))
                   v.fail("b.txt should hold the second upload");
                 if (!file_named(sim.state(), "a.txt")) v.fail("a.txt missing");
               }});
  return c;
}

void criterion_8() {
  Verdict v;
  const auto dir = testing::scenario_dir();
  std::size_t passed = 0;
  for (const auto& fc : fault_cases()) {
    Verdict one;
    try {
      const auto cfg = NetworkConfig::load(dir / (fc.tight ? "tight-network.json" : "network.json"));
      const auto sc = scenario::Scenario::load(dir / "faults" / fc.file, cfg);
      Simulation sim(cfg);
      const auto out = scenario::run(sim, sc);
      if (out.exit_code != 0) one.fail(out.message);
      if (!out.report.consistent()) one.fail("serving peers disagree");
      fc.check(sim, one);
      tally_audit(sim, fc.file);
    } catch (const std::exception& e) {
      one.fail(e.what());
    }
    if (one.ok)
      ++passed;
    else
      v.fail(fc.file + ": " + one.detail);
  }
  report(8, "faults", v, std::to_string(passed) + " fault scenarios converge with the expected outcomes");
}

void criterion_9() {
  Verdict v;
  if (audit_bad) v.fail(std::to_string(audit_bad) + " of " + std::to_string(audited) + " entries bad; " + audit_first_bad);
  if (audited == 0) v.fail("nothing audited");
  report(9, "audit", v, std::to_string(audited) + " audit entries across all runs, zero mismatches");
}

// Criterion 10: identical inputs give byte-identical artifacts.
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion_10() {
  Verdict v;
  const auto base = std::filesystem::temp_directory_path() / ("provledger-acceptance-" + std::to_string(::getpid()));
  std::size_t compared = 0;
  const auto compare = [&](const std::string& tag, const NetworkConfig& cfg, const scenario::Scenario& sc,
                           const Bytes* reference_dump) {
    const auto a = base / (tag + "-a"), b = base / (tag + "-b");
    scenario::run_to_directory(cfg, sc, a);
    scenario::run_to_directory(cfg, sc, b);
    for (const auto& entry : std::filesystem::directory_iterator(a)) {
      const auto name = entry.path().filename();
      if (slurp(entry.path()) != slurp(b / name)) v.fail(tag + ": " + name.string() + " differs");
      ++compared;
    }
    if (reference_dump) {
      const auto got = slurp(a / "ledger.bin");
      if (got != std::string(reference_dump->begin(), reference_dump->end()))
        v.fail(tag + ": replayed scenario differs from the live run");
    }
  };
  try {
    for (std::uint64_t seed : {3, 17, 42}) {
      const auto cfg = workload::random_network(seed);
      Simulation sim(cfg);
      workload::WorkloadOptions opt;
      opt.seed = seed;
      opt.operations = 60;
      const auto run = workload::run_random(sim, opt);
      // Round-trip through JSON as the CLI would.
      const auto sc = scenario::Scenario::from_json(run.recorded.to_json(), cfg);
      const auto dump = ledger::dump_ledger(sim.ledger());
      compare("random-" + std::to_string(seed), cfg, sc, &dump);
    }
    const auto dir = testing::scenario_dir();
    const auto cfg = NetworkConfig::load(dir / "network.json");
    compare("crash", cfg, scenario::Scenario::load(dir / "faults" / "01-crash-recover.json", cfg), nullptr);
  } catch (const std::exception& e) {
    v.fail(e.what());
  }
  std::filesystem::remove_all(base);
  report(10, "determinism", v, std::to_string(compared) + " artifact files byte-identical across reruns");
}

}  // namespace

int main() {
  std::printf("provledger acceptance (%d OpenMP threads)\n", parallel::max_threads());
  criteria_1_3_5();
  criterion_2();
  criterion_4();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  for (const auto& [n, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
