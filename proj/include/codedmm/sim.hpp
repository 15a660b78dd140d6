#pragma once

// End to end simulation: map the coded rows, sample stragglers, pick the
// quorum, shuffle, reduce, and compare every decoded output against a plain
// matrix product. Compute is simulated logically: all products exist up
// front, latency only decides who lands in the quorum and the reported
// makespan.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "codedmm/plan.hpp"
#include "codedmm/shuffle.hpp"
#include "codedmm/stragglers.hpp"

namespace codedmm {

struct SimConfig {
  SchemeParams params;
  LatencyModel model;
  std::uint64_t seed = 1;
  long trials = 1;
  bool verify = true;          // execute payloads and decode every output
  MdsKind mds = MdsKind::vandermonde;
  std::uint64_t mds_seed = 0;

  // pin the quorum instead of sampling latencies (used to show the load does
  // not depend on who finishes first)
  std::optional<std::vector<int>> forced_quorum;
};

struct TrialResult {
  long trial = 0;
  std::vector<int> quorum;
  double makespan = 0;
  Rat load;
  bool verified = false;  // meaningful when the config asks for verification
};

struct SimReport {
  std::vector<TrialResult> trials;
  double mean_makespan = 0;
  bool expected_wait_known = false;
  double expected_wait = 0;         // analytic, when the model has one
  double makespan_rel_error = 0;    // |mean - expected| / expected
  Rat load;                         // per trial load, identical across trials
  Rat analytic_load;
  bool load_matches_analysis = false;
  bool all_verified = false;
  long coded_symbols = 0;           // from the first trial's transcript
  long uncoded_symbols = 0;

  nlohmann::json to_json() const;
};

SimReport run_simulation(const SimConfig& config);

// Single trial with full payload execution; the transcript and execution
// hashes of trial 0 can be exported by the caller.
struct SingleRun {
  TrialResult result;
  ShuffleTranscript transcript;
  std::vector<std::uint64_t> payload_hashes;
};

SingleRun run_single(const SimConfig& config);

}  // namespace codedmm
