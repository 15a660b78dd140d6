#pragma once

// Closed form communication load and latency analysis, all exact rationals.
//
// With quorum q and replication r = floor(mu q), the fraction of output rows
// a reducer still misses that are held by exactly j of the other q-1 quorum
// members is
//
//   B_j = C(q-1, j) C(K-q, r-j) / ((q/K) C(K, r))
//
// Rows with j >= 1 common holders can be served by XOR multicasts that carry
// one useful symbol to j reducers at once, so a round at level j costs B_j/j
// per output row. Rounds run from j = r down to a cutoff s; the leftover
// need below the cutoff is either sent uncoded or covered by one more coded
// round, whichever is cheaper.

#include <vector>

#include "codedmm/params.hpp"
#include "codedmm/rational.hpp"
#include "codedmm/stragglers.hpp"

namespace codedmm {

// B_j as above; zero outside the feasible range of j.
Rat b_coefficient(int K, int q, const Rat& mu, int j);

// Cutoff round: the smallest s whose tail sum_{j>=s} B_j already covers the
// missing fraction 1 - floor(mu q)/q, skipping values of s where B_s itself
// is zero (an empty round cannot be the last one run). Ranges over
// 0..r+1; r+1 means no coded round is needed at all.
int threshold_s(int K, int q, const Rat& mu);

// Achievable communication load in symbols per output row length m,
// multiplied by N outputs. Exact.
Rat achievable_load(int K, int q, const Rat& mu, long N);

// Information theoretic floor on the load of any scheme that stores a mu
// fraction per server and waits for q servers. Zero when q == 1.
Rat lower_bound_load(int K, int q, const Rat& mu, long N);

struct TradeoffPoint {
  int q = 0;
  Rat latency_exact;        // valid when latency_is_exact
  bool latency_is_exact = false;
  double latency = 0;       // always populated
  Rat load;                 // achievable
  Rat load_lower_bound;
  Rat gap;                  // load / lower bound, when defined
  bool gap_defined = false;
};

struct TradeoffCurve {
  std::vector<TradeoffPoint> points;   // q ascending
  std::vector<int> achievable_hull;    // indices of lower convex envelope
  std::vector<int> lower_bound_hull;

  // Envelope value at a given latency by linear interpolation between hull
  // vertices. Outside the covered range the nearest endpoint is returned
  // and *clamped is set.
  double envelope_load(double latency, bool lower_bound = false,
                       bool* clamped = nullptr) const;
};

// One point per feasible q, ceil(1/mu) .. K.
TradeoffCurve tradeoff_curve(int K, const Rat& mu, long N, const LatencyModel& model);

struct GapEntry {
  int q = 0;
  Rat ratio;             // pointwise achievable over bound at this q
  bool defined = false;  // false when the lower bound is zero and the load is not

  // Time sharing between quorum sizes puts the operating curve on the lower
  // convex envelope of the (latency, load) points, so the honest curve level
  // gap at q compares the envelope value at latency D(q) with the bound.
  // Exact: relative positions of the D(q) are scale free.
  Rat envelope_ratio;
  bool envelope_defined = false;
};

std::vector<GapEntry> gap_report(int K, const Rat& mu, long N);

// Largest defined pointwise ratio in a gap report; zero if none is defined.
Rat max_gap(const std::vector<GapEntry>& report);

// Largest envelope level ratio, the figure of merit for curve comparisons.
Rat max_envelope_gap(const std::vector<GapEntry>& report);

struct EndpointGap {
  Rat ratio;         // load over bound at q = K (0 when the load is 0)
  bool within_bound; // ratio < 3 + sqrt(5), decided exactly
};

// Gap at the latency minimizing endpoint q = K. Requires mu K integral,
// where the constant factor bound holds.
EndpointGap endpoint_gap(int K, const Rat& mu);

}  // namespace codedmm
