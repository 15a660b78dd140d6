#pragma once

// Straggler model. Server finish times are i.i.d. shifted exponential:
//
//   P(T <= t) = 1 - exp(-(t / (mu N) - 1))   for t >= mu N
//
// so everyone needs at least mu N time units (the work is proportional to
// the stored fraction) plus an exponential tail. The expected time until q
// of K servers finish has the closed form
//
//   D(q) = mu N (1 + H(K) - H(K - q)),  H(i) = sum_{j<=i} 1/j
//
// which is exact as a rational. A user supplied table of order statistic
// means can replace the closed form for empirically measured clusters.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "codedmm/rational.hpp"

namespace codedmm {

struct LatencyModel {
  enum class Kind { shifted_exponential, table };

  Kind kind = Kind::shifted_exponential;
  Rat scale;  // mu N, the per server minimum time

  // table maps (K, q) to the expected wait in units of scale
  std::map<std::pair<int, int>, double> table;

  static LatencyModel shifted_exponential(Rat mu_n);
  static LatencyModel from_table(Rat mu_n, std::map<std::pair<int, int>, double> entries);

  // "shifted-exp" | "shifted-exp:muN=<ratio>" | "table:<file.json>"
  // default_scale fills in muN when the string does not carry one.
  static LatencyModel parse(const std::string& text, const Rat& default_scale);
};

// H(K) - H(K - q) as an exact rational
Rat harmonic_tail(int K, int q);

// Expected time until the fastest q of K servers finish. The exact variant
// exists only for the closed form kind and throws for tables.
Rat expected_wait_exact(const LatencyModel& model, int K, int q);
double expected_wait(const LatencyModel& model, int K, int q);

// One latency draw per server by inverse CDF. Only the closed form kind can
// be sampled; tables carry means, not distributions.
std::vector<double> sample_latencies(const LatencyModel& model, int K,
                                     std::uint64_t seed);

struct FastestSelection {
  std::vector<int> servers;  // the q fastest ids, sorted ascending
  double makespan = 0;       // finish time of the last of them
};

// Ties broken toward the lower server id.
FastestSelection select_fastest(const std::vector<double>& latencies, int q);

}  // namespace codedmm
