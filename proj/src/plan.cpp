#include "codedmm/plan.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "codedmm/errors.hpp"
#include "codedmm/subsets.hpp"

namespace codedmm {

namespace {

std::string subset_string(const std::vector<int>& s) {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "}";
  return os.str();
}

}  // namespace

std::vector<long> StoragePlan::rows_of_server(int server) const {
  std::vector<long> rows;
  const long b = batch_size();
  for (const auto& batch : batches) {
    if (!std::binary_search(batch.servers.begin(), batch.servers.end(), server))
      continue;
    for (long i = 0; i < b; ++i) rows.push_back(batch.first_row + i);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

bool StoragePlan::server_has_row(int server, long row) const {
  const long b = batch_size();
  for (const auto& batch : batches) {
    if (row < batch.first_row || row >= batch.first_row + b) continue;
    return std::binary_search(batch.servers.begin(), batch.servers.end(), server);
  }
  return false;
}

StoragePlan build_plan(const SchemeParams& p) {
  p.validate();
  StoragePlan plan;
  plan.params = p;
  plan.mds = MdsKind::vandermonde;
  const long b = p.batch_size();
  long next_row = 0;
  for (auto& subset : subsets_lex(p.K, p.replication())) {
    plan.batches.push_back(Batch{std::move(subset), next_row});
    next_row += b;
  }
  return plan;
}

StoragePlan build_random_plan(const SchemeParams& p, std::uint64_t seed,
                              long exhaustive_cap, long samples) {
  StoragePlan plan = build_plan(p);
  plan.mds = MdsKind::random;
  plan.mds_seed = seed;
  const auto report = verify_decodability(plan, exhaustive_cap, samples, seed);
  if (!report.pass) {
    throw ValidationError("random generator with seed " + std::to_string(seed) +
                          " is not decodable (" + report.reason +
                          " for servers " + subset_string(report.witness) +
                          "); pick another seed");
  }
  return plan;
}

nlohmann::json StoragePlan::to_json() const {
  nlohmann::json j;
  j["format"] = "codedmm.plan";
  j["version"] = 1;
  j["params"] = {{"K", params.K}, {"q", params.q},
                 {"mu", fraction_string(params.mu)}, {"m", params.m},
                 {"n", params.n}, {"N", params.N}, {"w", params.w}};
  if (mds == MdsKind::vandermonde) {
    j["mds"] = {{"kind", "vandermonde"}};
  } else {
    j["mds"] = {{"kind", "random"}, {"seed", mds_seed}};
  }
  j["batch_size"] = batch_size();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& batch : batches)
    arr.push_back({{"servers", batch.servers}, {"first_row", batch.first_row}});
  j["batches"] = std::move(arr);
  return j;
}

// Parsing checks types and ranges but deliberately not completeness: a
// damaged batch list should load and then fail verify_decodability with a
// concrete witness, not die here with a generic shape error.
StoragePlan StoragePlan::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "codedmm.plan")
      throw ValidationError("not a storage plan file");
    if (j.at("version").get<int>() != 1)
      throw ValidationError("unsupported plan version");

    StoragePlan plan;
    const auto& jp = j.at("params");
    plan.params.K = jp.at("K").get<int>();
    plan.params.q = jp.at("q").get<int>();
    plan.params.mu = parse_ratio(jp.at("mu").get<std::string>());
    plan.params.m = jp.at("m").get<long>();
    plan.params.n = jp.at("n").get<long>();
    plan.params.N = jp.at("N").get<long>();
    plan.params.w = jp.at("w").get<unsigned>();
    plan.params.validate();

    const auto& jm = j.at("mds");
    const std::string kind = jm.at("kind").get<std::string>();
    if (kind == "vandermonde") {
      plan.mds = MdsKind::vandermonde;
    } else if (kind == "random") {
      plan.mds = MdsKind::random;
      plan.mds_seed = jm.at("seed").get<std::uint64_t>();
    } else {
      throw ValidationError("unknown mds kind '" + kind + "'");
    }

    if (j.at("batch_size").get<long>() != plan.batch_size())
      throw ValidationError("batch_size does not match parameters");

    const long r_count = plan.coded_row_count();
    const long b = plan.batch_size();
    for (const auto& jb : j.at("batches")) {
      Batch batch;
      batch.servers = jb.at("servers").get<std::vector<int>>();
      batch.first_row = jb.at("first_row").get<long>();
      if (!std::is_sorted(batch.servers.begin(), batch.servers.end()))
        throw ValidationError("batch server list is not sorted");
      for (int s : batch.servers)
        if (s < 0 || s >= plan.params.K)
          throw ValidationError("batch server id out of range");
      if (batch.first_row < 0 || batch.first_row + b > r_count)
        throw ValidationError("batch row range out of bounds");
      plan.batches.push_back(std::move(batch));
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed plan file: ") + e.what());
  }
}

namespace {

template <unsigned W>
DecodabilityReport verify_decodability_impl(const StoragePlan& plan,
                                            long exhaustive_cap, long samples,
                                            std::uint64_t seed) {
  const auto& p = plan.params;
  const long m = p.m;
  const auto g = generator_matrix<W>(plan);

  // rows each server holds, as a bitmap over coded rows
  const long r_count = plan.coded_row_count();
  std::vector<std::vector<char>> holds(static_cast<size_t>(p.K),
                                       std::vector<char>(static_cast<size_t>(r_count), 0));
  const long b = plan.batch_size();
  for (const auto& batch : plan.batches)
    for (int s : batch.servers)
      for (long i = 0; i < b; ++i)
        holds[static_cast<size_t>(s)][static_cast<size_t>(batch.first_row + i)] = 1;

  DecodabilityReport report;

  auto check_subset = [&](const std::vector<int>& subset) -> bool {
    std::vector<char> in_union(static_cast<size_t>(r_count), 0);
    long union_size = 0;
    for (int s : subset)
      for (long i = 0; i < r_count; ++i)
        if (holds[static_cast<size_t>(s)][static_cast<size_t>(i)] &&
            !in_union[static_cast<size_t>(i)]) {
          in_union[static_cast<size_t>(i)] = 1;
          ++union_size;
        }
    if (union_size < m) {
      report.witness = subset;
      report.reason = "servers jointly hold " + std::to_string(union_size) +
                      " coded rows, fewer than m = " + std::to_string(m);
      return false;
    }
    RowEchelon<Gf<W>> re(m);
    for (long i = 0; i < r_count && re.rank() < m; ++i)
      if (in_union[static_cast<size_t>(i)]) re.insert(g.row(i).transpose());
    if (re.rank() < m) {
      report.witness = subset;
      report.reason = "generator rows have rank " + std::to_string(re.rank()) +
                      ", need " + std::to_string(m);
      return false;
    }
    return true;
  };

  const Int total = binomial(p.K, p.q);
  if (total <= exhaustive_cap) {
    report.exhaustive = true;
    for (const auto& subset : subsets_lex(p.K, p.q)) {
      ++report.subsets_checked;
      if (!check_subset(subset)) return report;
    }
  } else {
    report.exhaustive = false;
    SplitMix64 rng(SplitMix64::derive(seed, 0x766572696679ull));
    std::vector<int> ids(static_cast<size_t>(p.K));
    for (long t = 0; t < samples; ++t) {
      std::iota(ids.begin(), ids.end(), 0);
      for (int i = 0; i < p.q; ++i) {
        const auto j = i + static_cast<int>(rng.next() % static_cast<std::uint64_t>(p.K - i));
        std::swap(ids[static_cast<size_t>(i)], ids[static_cast<size_t>(j)]);
      }
      std::vector<int> subset(ids.begin(), ids.begin() + p.q);
      std::sort(subset.begin(), subset.end());
      ++report.subsets_checked;
      if (!check_subset(subset)) return report;
    }
  }
  report.pass = true;
  return report;
}

}  // namespace

DecodabilityReport verify_decodability(const StoragePlan& plan, long exhaustive_cap,
                                       long samples, std::uint64_t seed) {
  return dispatch_gf_width(plan.params.w, [&](auto width) {
    return verify_decodability_impl<decltype(width)::value>(plan, exhaustive_cap,
                                                            samples, seed);
  });
}

}  // namespace codedmm
