#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "codedmm/rng.hpp"
#include "codedmm/stragglers.hpp"

using namespace codedmm;

TEST_CASE("harmonic tails") {
  CHECK(harmonic_tail(4, 4) == Rat(25, 12));
  CHECK(harmonic_tail(4, 2) == Rat(7, 12));
  CHECK(harmonic_tail(6, 4) == Rat(19, 20));
  CHECK(harmonic_tail(5, 0) == Rat(0));
  CHECK(harmonic_tail(1, 1) == Rat(1));
  // telescoping: tail(K, q) + tail over the rest = full harmonic sum
  for (int K : {7, 12}) {
    for (int q = 0; q <= K; ++q)
      CHECK(harmonic_tail(K, q) + harmonic_tail(K - q, K - q) == harmonic_tail(K, K));
  }
}

TEST_CASE("expected waits in closed form") {
  const auto two = LatencyModel::shifted_exponential(Rat(2));
  CHECK(expected_wait_exact(two, 4, 4) == Rat(37, 6));
  CHECK(expected_wait_exact(two, 4, 2) == Rat(19, 6));

  const auto six = LatencyModel::shifted_exponential(Rat(6));
  CHECK(expected_wait_exact(six, 6, 4) == Rat(117, 10));

  const auto sixty = LatencyModel::shifted_exponential(Rat(60));
  CHECK(expected_wait_exact(sixty, 18, 3) == Rat(14405, 204));
  CHECK(expected_wait(sixty, 18, 3) == doctest::Approx(70.6127).epsilon(1e-4));

  // waiting for more servers can only take longer
  for (int q = 2; q <= 18; ++q)
    CHECK(expected_wait_exact(sixty, 18, q) > expected_wait_exact(sixty, 18, q - 1));
}

TEST_CASE("latency tables look up means and refuse everything else") {
  auto table = LatencyModel::from_table(Rat(2), {{{4, 2}, 1.75}, {{4, 4}, 3.0}});
  CHECK(expected_wait(table, 4, 2) == doctest::Approx(3.5));
  CHECK(expected_wait(table, 4, 4) == doctest::Approx(6.0));
  CHECK_THROWS_AS(expected_wait(table, 5, 2), ValidationError);
  CHECK_THROWS_AS(expected_wait_exact(table, 4, 2), ValidationError);
  CHECK_THROWS_AS(sample_latencies(table, 4, 1), ValidationError);
}

TEST_CASE("latency model parsing") {
  const auto def = LatencyModel::parse("shifted-exp", Rat(5, 2));
  CHECK(def.kind == LatencyModel::Kind::shifted_exponential);
  CHECK(def.scale == Rat(5, 2));

  const auto withscale = LatencyModel::parse("shifted-exp:muN=3/2", Rat(1));
  CHECK(withscale.scale == Rat(3, 2));

  CHECK_THROWS_AS(LatencyModel::parse("gaussian", Rat(1)), ValidationError);
  CHECK_THROWS_AS(LatencyModel::parse("table:/no/such/file.json", Rat(1)),
                  ValidationError);

  std::ofstream out("straggler_table.json");
  out << R"({"muN": "2", "entries": [{"K": 4, "q": 2, "wait": 1.75}]})";
  out.close();
  const auto fromfile = LatencyModel::parse("table:straggler_table.json", Rat(1));
  CHECK(fromfile.kind == LatencyModel::Kind::table);
  CHECK(expected_wait(fromfile, 4, 2) == doctest::Approx(3.5));
}

TEST_CASE("samples respect the support and the seed") {
  const auto model = LatencyModel::shifted_exponential(Rat(3, 2));
  const auto a = sample_latencies(model, 40, 11);
  const auto b = sample_latencies(model, 40, 11);
  const auto c = sample_latencies(model, 40, 12);
  REQUIRE(a.size() == 40);
  CHECK(a == b);
  CHECK(a != c);
  for (double t : a) CHECK(t >= 1.5);
}

TEST_CASE("fastest selection and tie breaking") {
  const auto sel = select_fastest({5, 3, 9, 4}, 2);
  CHECK(sel.servers == std::vector<int>{1, 3});
  CHECK(sel.makespan == 4.0);

  const auto ties = select_fastest({2, 2, 2}, 2);
  CHECK(ties.servers == std::vector<int>{0, 1});
  CHECK(ties.makespan == 2.0);

  const auto all = select_fastest({5, 3, 9, 4}, 4);
  CHECK(all.servers == std::vector<int>{0, 1, 2, 3});
  CHECK(all.makespan == 9.0);

  CHECK_THROWS_AS(select_fastest({1.0, 2.0}, 3), ValidationError);
  CHECK_THROWS_AS(select_fastest({1.0, 2.0}, 0), ValidationError);
}

TEST_CASE("Monte Carlo order statistics converge to the closed form") {
  struct Case {
    int K, q;
    Rat scale;
  };
  const Case cases[] = {{14, 5, Rat(420)}, {14, 10, Rat(420)}, {14, 14, Rat(420)},
                        {18, 12, Rat(60)}, {4, 2, Rat(2)}};
  const long trials = 100000;
  for (const auto& c : cases) {
    const auto model = LatencyModel::shifted_exponential(c.scale);
    double sum = 0, comp = 0;
    for (long t = 0; t < trials; ++t) {
      const auto lat =
          sample_latencies(model, c.K, SplitMix64::derive(999, static_cast<std::uint64_t>(t)));
      const double y = select_fastest(lat, c.q).makespan - comp;
      const double s = sum + y;
      comp = (s - sum) - y;
      sum = s;
    }
    const double mean = sum / static_cast<double>(trials);
    const double want = to_double(expected_wait_exact(model, c.K, c.q));
    CAPTURE(c.K);
    CAPTURE(c.q);
    CHECK(std::abs(mean - want) / want < 0.01);
  }
}
