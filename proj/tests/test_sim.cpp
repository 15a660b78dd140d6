#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "codedmm/analysis.hpp"
#include "codedmm/sim.hpp"

using namespace codedmm;

namespace {

SimConfig worked_example_sim() {
  SimConfig c;
  c.params.K = 6;
  c.params.q = 4;
  c.params.mu = Rat(1, 2);
  c.params.m = 20;
  c.params.n = 4;
  c.params.N = 12;
  c.model = LatencyModel::shifted_exponential(Rat(6));
  c.seed = 42;
  c.trials = 3;
  return c;
}

}  // namespace

TEST_CASE("seeded runs reproduce bit for bit") {
  const auto a = run_simulation(worked_example_sim());
  const auto b = run_simulation(worked_example_sim());
  CHECK(a.to_json().dump() == b.to_json().dump());

  auto shifted = worked_example_sim();
  shifted.seed = 43;
  const auto c = run_simulation(shifted);
  CHECK(c.mean_makespan != a.mean_makespan);

  CHECK(a.all_verified);
  CHECK(a.load == Rat(21, 5));
  CHECK(a.load_matches_analysis);
  CHECK(a.coded_symbols == 36);
  CHECK(a.uncoded_symbols == 48);
  CHECK(a.expected_wait_known);
  CHECK(a.expected_wait == doctest::Approx(11.7));

  const auto j = a.to_json();
  CHECK(j.at("load").get<std::string>() == "21/5");
  CHECK(j.at("load_decimal").get<double>() == doctest::Approx(4.2));
  CHECK(j.at("trials").size() == 3);
  CHECK(j.at("all_verified").get<bool>());
}

TEST_CASE("load is the same whoever finishes first") {
  const std::vector<std::vector<int>> quorums = {
      {0, 1, 2, 3}, {2, 3, 4, 5}, {0, 2, 4, 5}, {1, 3, 4, 5}, {0, 1, 4, 5}};
  for (const auto& quorum : quorums) {
    auto c = worked_example_sim();
    c.trials = 1;
    c.forced_quorum = quorum;
    const auto report = run_simulation(c);
    CHECK(report.load == Rat(21, 5));
    CHECK(report.load_matches_analysis);
    CHECK(report.all_verified);
    CHECK(report.coded_symbols == 36);
    CHECK(report.uncoded_symbols == 48);
  }
}

TEST_CASE("decode matches the plain product across configurations") {
  struct Setup {
    int K, q;
    Rat mu;
    long m, n, N;
    int w;
  };
  const Setup setups[] = {
      {6, 4, Rat(1, 2), 20, 4, 12, 8},    // two residual unicast rows
      {4, 4, Rat(1, 2), 12, 4, 4, 8},     // pure multicast corner
      {4, 2, Rat(1, 2), 12, 4, 4, 8},     // pure unicast corner
      {6, 5, Rat(4, 5), 25, 3, 30, 8},    // extended round residual
      {6, 4, Rat(1, 2), 180, 2, 4, 16},   // 270 coded rows, wide field
  };
  for (const auto& s : setups) {
    SimConfig c;
    c.params.K = s.K;
    c.params.q = s.q;
    c.params.mu = s.mu;
    c.params.m = s.m;
    c.params.n = s.n;
    c.params.N = s.N;
    c.params.w = s.w;
    c.model = LatencyModel::shifted_exponential(Rat(2));
    c.seed = 7;
    c.trials = 2;
    const auto report = run_simulation(c);
    CHECK(report.all_verified);
    CHECK(report.load_matches_analysis);
    CHECK(report.load == achievable_load(s.K, s.q, s.mu, s.N));
  }
}

TEST_CASE("sampled makespans track the closed form mean") {
  SimConfig c;
  c.params.K = 18;
  c.params.q = 12;
  c.params.mu = Rat(1, 12);
  c.params.m = 24;
  c.params.n = 2;
  c.params.N = 12;
  c.model = LatencyModel::shifted_exponential(Rat(60));
  c.seed = 2024;
  c.trials = 20000;
  c.verify = false;  // latency statistics only, no payloads
  const auto report = run_simulation(c);

  CHECK(report.expected_wait_known);
  CHECK(report.expected_wait ==
        doctest::Approx(to_double(expected_wait_exact(c.model, 18, 12))));
  CHECK(report.makespan_rel_error < 0.02);

  // many different quorums were exercised and all carried the same load
  std::set<std::vector<int>> seen;
  for (const auto& t : report.trials) seen.insert(t.quorum);
  CHECK(seen.size() > 1000);
  CHECK(report.load == Rat(11));
  CHECK(report.load_matches_analysis);
  CHECK(!report.all_verified);
}

TEST_CASE("random generator matrices run end to end") {
  auto c = worked_example_sim();
  c.trials = 1;
  c.mds = MdsKind::random;
  c.mds_seed = 5;
  const auto report = run_simulation(c);
  CHECK(report.all_verified);
  CHECK(report.load == Rat(21, 5));
}

TEST_CASE("single runs expose the transcript") {
  auto c = worked_example_sim();
  const auto run = run_single(c);
  CHECK(run.result.verified);
  CHECK(run.result.load == Rat(21, 5));
  CHECK(run.transcript.stats.total_symbols() == 84);
  CHECK(run.payload_hashes.size() == run.transcript.messages.size());

  const auto again = run_single(c);
  CHECK(again.payload_hashes == run.payload_hashes);
  CHECK(again.result.quorum == run.result.quorum);
}

TEST_CASE("simulation rejects bad setups") {
  auto c = worked_example_sim();
  c.trials = 0;
  CHECK_THROWS_AS(run_simulation(c), ValidationError);

  auto d = worked_example_sim();
  d.forced_quorum = std::vector<int>{0, 1, 2};
  CHECK_THROWS_AS(run_simulation(d), ValidationError);

  auto e = worked_example_sim();
  e.params.m = 21;  // batches no longer come out even
  CHECK_THROWS_AS(run_simulation(e), ValidationError);
}
