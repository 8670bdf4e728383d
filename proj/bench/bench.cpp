// SPDX-License-Identifier: Apache-2.0
//
// Serial reference vs OpenMP kernel for each data-parallel sweep.

#include "provledger/parallel.hpp"
#include "provledger/workload.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace provledger;

const Simulation& fixture() {
  static const auto sim = [] {
    auto s = std::make_unique<Simulation>(workload::random_network(1234));
    workload::WorkloadOptions opt;
    opt.seed = 1234;
    opt.operations = 400;
    opt.max_steps = 50000;
    workload::run_random(*s, opt);
    return s;
  }();
  return *sim;
}

void BM_VerifyChainSerial(benchmark::State& state) {
  const auto& blocks = fixture().ledger().blocks();
  for (auto _ : state) benchmark::DoNotOptimize(ledger::verify_chain(blocks));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(blocks.size()));
}

void BM_VerifyChainParallel(benchmark::State& state) {
  const auto& blocks = fixture().ledger().blocks();
  for (auto _ : state) benchmark::DoNotOptimize(parallel::verify_chain(blocks));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(blocks.size()));
}

void BM_AuditSerial(benchmark::State& state) {
  const auto& sim = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(storage::audit(sim.state(), sim.stores()));
}

void BM_AuditParallel(benchmark::State& state) {
  const auto& sim = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(parallel::audit(sim.state(), sim.stores()));
}

std::vector<parallel::AccessQuery> access_queries(const ledger::WorldState& st) {
  std::vector<parallel::AccessQuery> out;
  std::vector<std::string> participants;
  const std::string prefix = std::string(assets::tag::kParticipant) + "/";
  for (auto it = st.entries().lower_bound(prefix); it != st.entries().end() && it->first.starts_with(prefix); ++it)
    participants.push_back(assets::decode<assets::Participant>(it->second.value).participant_id);
  const std::string files = std::string(assets::tag::kFile) + "/";
  for (auto it = st.entries().lower_bound(files); it != st.entries().end() && it->first.starts_with(files); ++it) {
    const auto f = assets::decode<assets::FileAsset>(it->second.value);
    for (const auto& p : participants) out.push_back({p, f.read_acl, f.owner});
  }
  return out;
}

void BM_AccessSerial(benchmark::State& state) {
  const auto& st = fixture().state();
  const auto queries = access_queries(st);
  const assets::StateView view(st);
  for (auto _ : state) benchmark::DoNotOptimize(parallel::check_access_serial(view, queries));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(queries.size()));
}

void BM_AccessParallel(benchmark::State& state) {
  const auto& st = fixture().state();
  const auto queries = access_queries(st);
  const assets::StateView view(st);
  for (auto _ : state) benchmark::DoNotOptimize(parallel::check_access_batch(view, queries));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(queries.size()));
}

// Endorsement fan-out over every peer of a wide network.
void endorse_run(benchmark::State& state, bool parallel_endorsement) {
  workload::NetworkShape shape;
  shape.organizations = 8;
  shape.peers_per_org = 4;
  auto cfg = workload::random_network(99, shape);
  cfg.endorsement.mode = EndorsementPolicyConfig::Mode::k_of_n;
  cfg.endorsement.k = 1;
  cfg.endorsement.endorsers = cfg.all_peers();
  cfg.parallel_endorsement = parallel_endorsement;
  Simulation sim(cfg);
  std::uint64_t n = 0;
  for (auto _ : state) {
    auto r = sim.submit("user0_0", "mkdir",
                        {{"parent", root_directory_id()}, {"name", "d" + std::to_string(n++)}});
    benchmark::DoNotOptimize(r);
  }
}

void BM_EndorseSerial(benchmark::State& state) { endorse_run(state, false); }
void BM_EndorseParallel(benchmark::State& state) { endorse_run(state, true); }

BENCHMARK(BM_VerifyChainSerial);
BENCHMARK(BM_VerifyChainParallel);
BENCHMARK(BM_AuditSerial);
BENCHMARK(BM_AuditParallel);
BENCHMARK(BM_AccessSerial);
BENCHMARK(BM_AccessParallel);
BENCHMARK(BM_EndorseSerial);
BENCHMARK(BM_EndorseParallel);

}  // namespace

BENCHMARK_MAIN();
