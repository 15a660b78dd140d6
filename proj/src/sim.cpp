#include "codedmm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "codedmm/analysis.hpp"
#include "codedmm/errors.hpp"
#include "codedmm/rng.hpp"

namespace codedmm {

namespace {

constexpr std::uint64_t kStreamA = 0xa;
constexpr std::uint64_t kStreamX = 0xb;
constexpr std::uint64_t kStreamLatencyBase = 0x10000;

template <unsigned W>
struct DataPlane {
  DenseMatrix<Gf<W>> products;  // R x N, coded row i times input j
  DenseMatrix<Gf<W>> expected;  // m x N, the uncoded ground truth
};

template <unsigned W>
DataPlane<W> make_data_plane(const StoragePlan& plan, std::uint64_t seed) {
  const auto& p = plan.params;
  SplitMix64 a_rng(SplitMix64::derive(seed, kStreamA));
  SplitMix64 x_rng(SplitMix64::derive(seed, kStreamX));
  const auto a = random_matrix<W>(p.m, p.n, a_rng);
  const auto x = random_matrix<W>(p.n, p.N, x_rng);
  DataPlane<W> d;
  d.expected = a * x;
  d.products = generator_matrix<W>(plan) * d.expected;
  return d;
}

// Shuffle execution plus reduce for one quorum. Every output vector is
// decoded from exactly the values its reducer holds after the shuffle and
// compared against the uncoded product.
template <unsigned W>
bool reduce_and_verify(const StoragePlan& plan, const ReduceAssignment& assignment,
                       const ShuffleExecution<W>& exec, const DataPlane<W>& d) {
  const long m = plan.params.m;
  const auto g = generator_matrix<W>(plan);
  const long outs_per = assignment.outputs_per_server();

  for (int pos = 0; pos < assignment.quorum(); ++pos) {
    const int server = assignment.finishers[static_cast<size_t>(pos)];
    const auto local = plan.rows_of_server(server);
    const auto [out_begin, out_end] = assignment.output_range(pos);

    // received rows must be the same for every output of this server
    const auto& received = exec.received[static_cast<size_t>(pos)];
    std::vector<long> received_rows;
    for (const auto& [key, value] : received) {
      (void)value;
      if (key.second == out_begin) received_rows.push_back(key.first);
    }
    for (long out = out_begin; out < out_end; ++out)
      for (long row : received_rows)
        if (!received.count({row, out}))
          throw InternalCheckFailure("received rows differ between outputs");
    if (received.size() != received_rows.size() * static_cast<size_t>(outs_per))
      throw InternalCheckFailure("received rows differ between outputs");

    std::vector<long> avail = local;
    avail.insert(avail.end(), received_rows.begin(), received_rows.end());
    std::sort(avail.begin(), avail.end());
    if (std::adjacent_find(avail.begin(), avail.end()) != avail.end())
      throw InternalCheckFailure("shuffle delivered a row the server already had");

    RowEchelon<Gf<W>> re(m);
    std::vector<long> chosen;
    for (long row : avail) {
      if (re.insert(g.row(row).transpose())) {
        chosen.push_back(row);
        if (re.rank() == m) break;
      }
    }
    if (re.rank() < m)
      throw InternalCheckFailure("server " + std::to_string(server) +
                                 " cannot reach rank m after the shuffle");

    DenseMatrix<Gf<W>> gd(m, m);
    DenseMatrix<Gf<W>> rhs(m, outs_per);
    for (long i = 0; i < m; ++i) {
      const long row = chosen[static_cast<size_t>(i)];
      gd.row(i) = g.row(row);
      const bool is_local = std::binary_search(local.begin(), local.end(), row);
      for (long out = out_begin; out < out_end; ++out) {
        rhs(i, out - out_begin) =
            is_local ? d.products(row, out) : received.at({row, out});
      }
    }
    const auto decoded = solve(gd, rhs);
    for (long i = 0; i < m; ++i)
      for (long out = 0; out < outs_per; ++out)
        if (decoded(i, out) != d.expected(i, out_begin + out)) return false;
  }
  return true;
}

struct QuorumOutcome {
  Rat load;
  bool verified = false;
  ShuffleTranscript transcript;
  std::vector<std::uint64_t> payload_hashes;
};

template <unsigned W>
QuorumOutcome run_quorum(const StoragePlan& plan, const std::vector<int>& quorum,
                         bool verify, const DataPlane<W>* data) {
  QuorumOutcome out;
  auto assignment = ReduceAssignment::balanced(quorum, plan.params.N);
  out.transcript = plan_shuffle(plan, assignment);
  out.load = measure_load(out.transcript, plan.params.m);
  if (verify) {
    if (!data) throw InternalCheckFailure("verification without a data plane");
    const auto exec = execute_shuffle<W>(out.transcript, plan, assignment,
                                         data->products);
    out.payload_hashes = exec.payload_hashes;
    out.verified = reduce_and_verify<W>(plan, assignment, exec, *data);
    if (!out.verified)
      throw InternalCheckFailure("reduce output differs from the direct product");
  }
  return out;
}

template <unsigned W>
SimReport run_simulation_impl(const SimConfig& config) {
  const auto& p = config.params;
  p.validate();
  if (config.trials < 1) throw ValidationError("trials must be at least 1");
  if (config.forced_quorum &&
      static_cast<int>(config.forced_quorum->size()) != p.q)
    throw ValidationError("forced quorum must have exactly q servers");

  const StoragePlan plan = config.mds == MdsKind::random
                               ? build_random_plan(p, config.mds_seed)
                               : build_plan(p);

  DataPlane<W> data;
  if (config.verify) data = make_data_plane<W>(plan, config.seed);

  SimReport report;
  report.analytic_load = achievable_load(p.K, p.q, p.mu, p.N);

  // The shuffle and its cost are a pure function of the quorum, so repeated
  // quorums reuse the executed outcome.
  std::map<std::vector<int>, QuorumOutcome> cache;

  double mean = 0, comp = 0;  // Kahan running mean terms
  bool all_verified = true;
  for (long t = 0; t < config.trials; ++t) {
    TrialResult trial;
    trial.trial = t;
    if (config.forced_quorum) {
      trial.quorum = *config.forced_quorum;
      std::sort(trial.quorum.begin(), trial.quorum.end());
      trial.makespan = 0;
    } else {
      const auto latencies = sample_latencies(
          config.model, p.K, SplitMix64::derive(config.seed, kStreamLatencyBase + static_cast<std::uint64_t>(t)));
      const auto sel = select_fastest(latencies, p.q);
      trial.quorum = sel.servers;
      trial.makespan = sel.makespan;
    }

    auto it = cache.find(trial.quorum);
    if (it == cache.end()) {
      it = cache.emplace(trial.quorum,
                         run_quorum<W>(plan, trial.quorum, config.verify,
                                       config.verify ? &data : nullptr))
               .first;
    }
    trial.load = it->second.load;
    trial.verified = it->second.verified;
    all_verified = all_verified && trial.verified;

    const double y = trial.makespan - comp;
    const double sum = mean + y;
    comp = (sum - mean) - y;
    mean = sum;

    report.trials.push_back(std::move(trial));
  }
  report.mean_makespan = mean / static_cast<double>(config.trials);
  report.all_verified = config.verify && all_verified;

  report.load = report.trials.front().load;
  for (const auto& t : report.trials)
    if (t.load != report.load)
      throw InternalCheckFailure("load varied across quorums");
  report.load_matches_analysis = report.load == report.analytic_load;

  const auto& first_outcome = cache.at(report.trials.front().quorum);
  report.coded_symbols = first_outcome.transcript.stats.coded_symbols;
  report.uncoded_symbols = first_outcome.transcript.stats.uncoded_symbols;

  if (!config.forced_quorum) {
    try {
      report.expected_wait = expected_wait(config.model, p.K, p.q);
      report.expected_wait_known = true;
      if (report.expected_wait != 0)
        report.makespan_rel_error =
            std::abs(report.mean_makespan - report.expected_wait) /
            report.expected_wait;
    } catch (const ValidationError&) {
      report.expected_wait_known = false;
    }
  }
  return report;
}

template <unsigned W>
SingleRun run_single_impl(const SimConfig& config) {
  SimConfig one = config;
  one.trials = 1;
  const auto& p = one.params;
  p.validate();

  const StoragePlan plan = one.mds == MdsKind::random
                               ? build_random_plan(p, one.mds_seed)
                               : build_plan(p);
  DataPlane<W> data;
  if (one.verify) data = make_data_plane<W>(plan, one.seed);

  SingleRun run;
  run.result.trial = 0;
  if (one.forced_quorum) {
    run.result.quorum = *one.forced_quorum;
    std::sort(run.result.quorum.begin(), run.result.quorum.end());
    run.result.makespan = 0;
  } else {
    const auto latencies = sample_latencies(
        one.model, p.K, SplitMix64::derive(one.seed, kStreamLatencyBase));
    const auto sel = select_fastest(latencies, p.q);
    run.result.quorum = sel.servers;
    run.result.makespan = sel.makespan;
  }
  auto outcome = run_quorum<W>(plan, run.result.quorum, one.verify,
                               one.verify ? &data : nullptr);
  run.result.load = outcome.load;
  run.result.verified = outcome.verified;
  run.transcript = std::move(outcome.transcript);
  run.payload_hashes = std::move(outcome.payload_hashes);
  return run;
}

}  // namespace

SimReport run_simulation(const SimConfig& config) {
  return dispatch_gf_width(config.params.w, [&](auto width) {
    return run_simulation_impl<decltype(width)::value>(config);
  });
}

SingleRun run_single(const SimConfig& config) {
  return dispatch_gf_width(config.params.w, [&](auto width) {
    return run_single_impl<decltype(width)::value>(config);
  });
}

nlohmann::json SimReport::to_json() const {
  nlohmann::json j;
  j["trials"] = nlohmann::json::array();
  for (const auto& t : trials) {
    j["trials"].push_back({{"trial", t.trial},
                           {"quorum", t.quorum},
                           {"makespan", t.makespan},
                           {"load", fraction_string(t.load)},
                           {"verified", t.verified}});
  }
  j["mean_makespan"] = mean_makespan;
  if (expected_wait_known) {
    j["expected_wait"] = expected_wait;
    j["makespan_rel_error"] = makespan_rel_error;
  }
  j["load"] = fraction_string(load);
  j["load_decimal"] = to_double(load);
  j["analytic_load"] = fraction_string(analytic_load);
  j["load_matches_analysis"] = load_matches_analysis;
  j["all_verified"] = all_verified;
  j["coded_symbols"] = coded_symbols;
  j["uncoded_symbols"] = uncoded_symbols;
  return j;
}

}  // namespace codedmm
