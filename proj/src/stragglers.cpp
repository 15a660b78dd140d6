#include "codedmm/stragglers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "codedmm/errors.hpp"
#include "codedmm/rng.hpp"

namespace codedmm {

LatencyModel LatencyModel::shifted_exponential(Rat mu_n) {
  LatencyModel m;
  m.kind = Kind::shifted_exponential;
  m.scale = std::move(mu_n);
  return m;
}

LatencyModel LatencyModel::from_table(Rat mu_n,
                                      std::map<std::pair<int, int>, double> entries) {
  LatencyModel m;
  m.kind = Kind::table;
  m.scale = std::move(mu_n);
  m.table = std::move(entries);
  return m;
}

LatencyModel LatencyModel::parse(const std::string& text, const Rat& default_scale) {
  if (text.empty() || text == "shifted-exp")
    return shifted_exponential(default_scale);

  if (text.rfind("shifted-exp:", 0) == 0) {
    const std::string arg = text.substr(12);
    if (arg.rfind("muN=", 0) != 0)
      throw ValidationError("latency spec '" + text + "' not understood; "
                            "use shifted-exp[:muN=<ratio>] or table:<file>");
    return shifted_exponential(parse_ratio(arg.substr(4)));
  }

  if (text.rfind("table:", 0) == 0) {
    const std::string path = text.substr(6);
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open latency table '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
      Rat scale = default_scale;
      if (j.contains("muN")) scale = parse_ratio(j.at("muN").get<std::string>());
      std::map<std::pair<int, int>, double> entries;
      for (const auto& row : j.at("entries")) {
        entries[{row.at("K").get<int>(), row.at("q").get<int>()}] =
            row.at("wait").get<double>();
      }
      return from_table(std::move(scale), std::move(entries));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("malformed latency table '" + path + "': " + e.what());
    }
  }

  throw ValidationError("latency spec '" + text + "' not understood; "
                        "use shifted-exp[:muN=<ratio>] or table:<file>");
}

Rat harmonic_tail(int K, int q) {
  if (q < 0 || q > K) throw ValidationError("need 0 <= q <= K for order statistics");
  Rat sum = 0;
  for (int j = K - q + 1; j <= K; ++j) sum += Rat(1, j);
  return sum;
}

Rat expected_wait_exact(const LatencyModel& model, int K, int q) {
  if (model.kind != LatencyModel::Kind::shifted_exponential)
    throw ValidationError("table latency models have no exact closed form");
  return model.scale * (1 + harmonic_tail(K, q));
}

double expected_wait(const LatencyModel& model, int K, int q) {
  if (model.kind == LatencyModel::Kind::shifted_exponential)
    return to_double(expected_wait_exact(model, K, q));
  const auto it = model.table.find({K, q});
  if (it == model.table.end())
    throw ValidationError("latency table has no entry for K=" + std::to_string(K) +
                          ", q=" + std::to_string(q));
  return to_double(model.scale) * it->second;
}

std::vector<double> sample_latencies(const LatencyModel& model, int K,
                                     std::uint64_t seed) {
  if (model.kind != LatencyModel::Kind::shifted_exponential)
    throw ValidationError("sampling needs a distribution; latency tables only "
                          "carry expected waits");
  const double scale = to_double(model.scale);
  SplitMix64 rng(seed);
  std::vector<double> t(static_cast<size_t>(K));
  for (auto& v : t) {
    const double u = rng.next_unit();         // [0, 1)
    v = scale * (1.0 - std::log1p(-u));       // inverse CDF, always >= scale
  }
  return t;
}

FastestSelection select_fastest(const std::vector<double>& latencies, int q) {
  const int K = static_cast<int>(latencies.size());
  if (q < 1 || q > K) throw ValidationError("need 1 <= q <= K to pick the fastest q");
  std::vector<int> order(latencies.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (latencies[static_cast<size_t>(a)] != latencies[static_cast<size_t>(b)])
      return latencies[static_cast<size_t>(a)] < latencies[static_cast<size_t>(b)];
    return a < b;
  });
  FastestSelection sel;
  sel.servers.assign(order.begin(), order.begin() + q);
  sel.makespan = latencies[static_cast<size_t>(order[static_cast<size_t>(q - 1)])];
  std::sort(sel.servers.begin(), sel.servers.end());
  return sel;
}

}  // namespace codedmm
