#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "codedmm/analysis.hpp"
#include "codedmm/stragglers.hpp"

using namespace codedmm;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
};

// runs the installed binary; stderr is dropped unless the caller merges it
CmdResult run_cli(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(CODEDMM_CLI) + " " + args +
                          (merge_stderr ? " 2>&1" : " 2>/dev/null");
  CmdResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

TEST_CASE("named examples check out") {
  for (const char* preset : {"min-bandwidth-example", "min-latency-example",
                             "sec4-example", "fig1", "fig3"}) {
    const auto r = run_cli(std::string("example --preset ") + preset + " --check");
    CHECK(r.code == 0);
    CHECK(!r.out.empty());
  }
  const auto sim = run_cli("simulate --preset sec4-example --trials 2 --check");
  CHECK(sim.code == 0);
}

TEST_CASE("tradeoff table round trips through csv") {
  const auto r = run_cli("tradeoff --K 18 --mu 1/3 --N 180");
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 17);  // header plus q = 3..18
  CHECK(rows[0] == std::vector<std::string>{"q", "D", "L_ach", "L_lb", "gap"});

  const auto model = LatencyModel::shifted_exponential(Rat(60));
  for (size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 5);
    const int q = std::stoi(rows[i][0]);
    CHECK(q == static_cast<int>(i) + 2);
    // decimals reproduce the exact values at the printed precision
    CHECK(std::stod(rows[i][1]) ==
          doctest::Approx(to_double(expected_wait_exact(model, 18, q))).epsilon(1e-9));
    CHECK(std::stod(rows[i][2]) ==
          doctest::Approx(to_double(achievable_load(18, q, Rat(1, 3), 180))).epsilon(1e-9));
    CHECK(std::stod(rows[i][3]) ==
          doctest::Approx(to_double(lower_bound_load(18, q, Rat(1, 3), 180))).epsilon(1e-9));
  }

  // exact mode round trips with no tolerance at all
  const auto exact = run_cli("tradeoff --K 18 --mu 1/3 --N 180 --rational");
  REQUIRE(exact.code == 0);
  const auto exact_rows = parse_csv(exact.out);
  REQUIRE(exact_rows.size() == 17);
  for (size_t i = 1; i < exact_rows.size(); ++i) {
    const int q = std::stoi(exact_rows[i][0]);
    CHECK(parse_ratio(exact_rows[i][1]) == expected_wait_exact(model, 18, q));
    CHECK(parse_ratio(exact_rows[i][2]) == achievable_load(18, q, Rat(1, 3), 180));
    CHECK(parse_ratio(exact_rows[i][3]) == lower_bound_load(18, q, Rat(1, 3), 180));
    CHECK(parse_ratio(exact_rows[i][4]) ==
          achievable_load(18, q, Rat(1, 3), 180) / lower_bound_load(18, q, Rat(1, 3), 180));
  }
}

TEST_CASE("tradeoff json carries hulls and gap summaries") {
  const auto r = run_cli("tradeoff --preset fig3 --format json --check");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("points").size() == 16);
  CHECK(j.at("achievable_hull") == nlohmann::json({3, 9, 12, 15, 18}));
  const auto gaps = gap_report(18, Rat(1, 3), 180);
  CHECK(parse_ratio(j.at("max_gap").get<std::string>()) == max_gap(gaps));
  CHECK(parse_ratio(j.at("max_envelope_gap").get<std::string>()) == max_envelope_gap(gaps));
  CHECK(j.at("max_envelope_gap").get<std::string>() == "7595/1836");
}

TEST_CASE("full storage needs one table row") {
  const auto r = run_cli("tradeoff --K 4 --mu 1 --N 4");
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "1");
  CHECK(rows[1][2] == "0");
}

TEST_CASE("bound prints converse values") {
  const auto r = run_cli("bound --K 18 --mu 1/3 --N 180 --q 9 --rational");
  REQUIRE(r.code == 0);
  CHECK(r.out == "q,L_lb\n9,108/7\n");
}

TEST_CASE("plans round trip through verification") {
  const auto plan = run_cli("plan --K 4 --q 4 --mu 1/2 --m 12 --n 4 --N 4 --out cli_plan.json");
  REQUIRE(plan.code == 0);

  const auto ok = run_cli("verify-plan cli_plan.json");
  CHECK(ok.code == 0);
  const auto report = nlohmann::json::parse(ok.out);
  CHECK(report.at("pass").get<bool>());
  CHECK(report.at("exhaustive").get<bool>());

  // this plan has no slack: dropping a batch breaks some quorum
  auto j = nlohmann::json::parse(std::ifstream("cli_plan.json"));
  j["batches"].erase(0);
  std::ofstream("cli_plan_broken.json") << j.dump();
  const auto bad = run_cli("verify-plan cli_plan_broken.json");
  CHECK(bad.code == 2);
  const auto bad_report = nlohmann::json::parse(bad.out);
  CHECK(!bad_report.at("pass").get<bool>());
  CHECK(bad_report.contains("witness"));

  std::remove("cli_plan.json");
  std::remove("cli_plan_broken.json");
}

TEST_CASE("simulate writes transcripts and reports json") {
  const auto r = run_cli(
      "simulate --preset min-latency-example --transcript cli_transcript.jsonl");
  REQUIRE(r.code == 0);
  const auto report = nlohmann::json::parse(r.out);
  CHECK(report.at("load").get<std::string>() == "2");
  CHECK(report.at("all_verified").get<bool>());

  std::ifstream tr("cli_transcript.jsonl");
  REQUIRE(tr.good());
  std::string line;
  int lines = 0;
  long symbols = 0;
  while (std::getline(tr, line)) {
    const auto msg = nlohmann::json::parse(line);
    symbols += msg.at("symbols").get<long>();
    ++lines;
  }
  CHECK(lines == 2);  // one round message per member of the only pair
  CHECK(symbols == 24);
  std::remove("cli_transcript.jsonl");
}

TEST_CASE("exit codes distinguish failure kinds") {
  CHECK(run_cli("tradeoff --K 4 --mu 1/9 --N 4").code == 1);
  CHECK(run_cli("simulate --K 6 --q 4 --mu 1/2 --m 21 --n 4 --N 12").code == 1);
  CHECK(run_cli("simulate --preset fig3").code == 1);
  CHECK(run_cli("verify-plan does_not_exist.json").code == 1);
  CHECK(run_cli("example --preset no-such-preset").code == 1);
  CHECK(run_cli("tradeoff --K 18 --mu 1/3 --N 180 --check").code == 1);
  CHECK(run_cli("nonsense-verb").code == 1);

  const auto msg = run_cli("simulate --K 6 --q 4 --mu 1/2 --m 21 --n 4 --N 12", true);
  CHECK(msg.out.find("smallest padded m is 30") != std::string::npos);
}
