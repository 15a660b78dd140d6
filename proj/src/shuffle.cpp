#include "codedmm/shuffle.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>

#include "codedmm/errors.hpp"
#include "codedmm/subsets.hpp"

namespace codedmm {

int ReduceAssignment::position_of(int server) const {
  const auto it = std::lower_bound(finishers.begin(), finishers.end(), server);
  if (it == finishers.end() || *it != server)
    throw ValidationError("server " + std::to_string(server) + " is not in the quorum");
  return static_cast<int>(it - finishers.begin());
}

ReduceAssignment ReduceAssignment::balanced(std::vector<int> finishers,
                                            long total_outputs) {
  std::sort(finishers.begin(), finishers.end());
  if (finishers.empty()) throw ValidationError("quorum is empty");
  if (std::adjacent_find(finishers.begin(), finishers.end()) != finishers.end())
    throw ValidationError("duplicate server in quorum");
  if (total_outputs % static_cast<long>(finishers.size()) != 0)
    throw ValidationError("quorum size must divide the number of outputs");
  ReduceAssignment a;
  a.finishers = std::move(finishers);
  a.total_outputs = total_outputs;
  return a;
}

namespace {

// sorted intersection of a batch's servers with the quorum
std::vector<int> quorum_part(const std::vector<int>& servers,
                             const std::vector<int>& finishers) {
  std::vector<int> out;
  std::set_intersection(servers.begin(), servers.end(), finishers.begin(),
                        finishers.end(), std::back_inserter(out));
  return out;
}

using NeedKey = std::pair<std::vector<int>, int>;  // (holders, target)

std::map<NeedKey, std::vector<long>> needed_rows_by_set(
    const StoragePlan& plan, const ReduceAssignment& assignment) {
  std::map<NeedKey, std::vector<long>> needed;
  const long b = plan.batch_size();
  for (const auto& batch : plan.batches) {
    const auto holders = quorum_part(batch.servers, assignment.finishers);
    if (holders.empty()) continue;
    for (int k : assignment.finishers) {
      if (std::binary_search(holders.begin(), holders.end(), k)) continue;
      auto& rows = needed[{holders, k}];
      for (long i = 0; i < b; ++i) rows.push_back(batch.first_row + i);
    }
  }
  return needed;
}

}  // namespace

std::vector<NeededSet> build_needed_sets(const StoragePlan& plan,
                                         const ReduceAssignment& assignment) {
  std::vector<NeededSet> out;
  for (auto& [key, rows] : needed_rows_by_set(plan, assignment)) {
    NeededSet set;
    set.holders = key.first;
    set.target = key.second;
    set.rows = rows;
    out.push_back(std::move(set));
  }
  return out;  // map iteration is already (holders, target) lexicographic
}

ShuffleTranscript plan_shuffle(const StoragePlan& plan,
                               const ReduceAssignment& assignment) {
  const auto& p = plan.params;
  p.validate();
  if (assignment.quorum() != p.q)
    throw ValidationError("assignment quorum has " +
                          std::to_string(assignment.quorum()) +
                          " servers, parameters say q = " + std::to_string(p.q));
  if (assignment.total_outputs != p.N)
    throw ValidationError("assignment output count does not match N");
  for (int k : assignment.finishers)
    if (k < 0 || k >= p.K) throw ValidationError("quorum server id out of range");

  const int q = p.q;
  const int r = p.replication();
  const long outs_per = assignment.outputs_per_server();
  const int s = threshold_s(p.K, q, p.mu);
  if (s < 1 || s > r + 1) throw InternalCheckFailure("cutoff out of range");

  auto needed = needed_rows_by_set(plan, assignment);

  ShuffleTranscript tr;
  tr.cutoff = s;
  tr.recovered_rows.resize(static_cast<size_t>(q));

  // items of one needed set for one target, canonical (row, output) order
  auto materialize = [&](const std::vector<long>& rows, int target) {
    const auto [out_begin, out_end] =
        assignment.output_range(assignment.position_of(target));
    std::vector<std::pair<long, long>> items;
    items.reserve(rows.size() * static_cast<size_t>(outs_per));
    for (long row : rows)
      for (long out = out_begin; out < out_end; ++out) items.emplace_back(row, out);
    return items;
  };

  // Runs one coded round at level j. When `record` is false it only counts
  // symbols, leaving the transcript untouched; this prices the extended
  // round before committing to a residual strategy.
  auto run_round = [&](int j, bool record) -> long {
    long round_symbols = 0;
    for_each_subset_lex(q, j + 1, [&](const std::vector<int>& positions) {
      std::vector<int> group(positions.size());
      for (size_t i = 0; i < positions.size(); ++i)
        group[i] = assignment.finishers[static_cast<size_t>(positions[i])];

      // the set each member is missing: held by the other j members
      std::vector<const std::vector<long>*> rows_of(group.size(), nullptr);
      long v = -1;
      for (size_t ki = 0; ki < group.size(); ++ki) {
        std::vector<int> holders;
        holders.reserve(group.size() - 1);
        for (size_t o = 0; o < group.size(); ++o)
          if (o != ki) holders.push_back(group[o]);
        const auto it = needed.find({holders, group[ki]});
        if (it != needed.end()) rows_of[ki] = &it->second;
        const long size_k =
            rows_of[ki] ? static_cast<long>(rows_of[ki]->size()) * outs_per : 0;
        if (v < 0) v = size_k;
        if (v != size_k)
          throw InternalCheckFailure("uneven needed sets within one group");
      }
      if (v <= 0) return;

      std::vector<std::vector<std::pair<long, long>>> items(group.size());
      if (record)
        for (size_t ki = 0; ki < group.size(); ++ki)
          items[ki] = materialize(*rows_of[ki], group[ki]);

      const long seg = (v + j - 1) / j;  // ceil, zero padded on the wire
      for (size_t si = 0; si < group.size(); ++si) {
        round_symbols += seg;
        if (!record) continue;
        ShuffleMessage msg;
        msg.kind = ShuffleMessage::Kind::coded;
        msg.sender = group[si];
        msg.level = j;
        msg.group = group;
        msg.symbols = seg;
        for (size_t ki = 0; ki < group.size(); ++ki) {
          if (ki == si) continue;
          msg.recipients.push_back(group[ki]);
          // segment index of this sender within the j holders of items[ki]
          const size_t chunk = si - (si > ki ? 1 : 0);
          const long lo = std::min<long>(v, static_cast<long>(chunk) * seg);
          const long hi = std::min<long>(v, static_cast<long>(chunk + 1) * seg);
          MessagePart part;
          part.recipient = group[ki];
          part.items.assign(items[ki].begin() + lo, items[ki].begin() + hi);
          msg.parts.push_back(std::move(part));
        }
        tr.stats.coded_symbols += seg;
        tr.stats.coded_messages += 1;
        tr.messages.push_back(std::move(msg));
      }
      if (record) {
        for (size_t ki = 0; ki < group.size(); ++ki) {
          auto& rec = tr.recovered_rows[static_cast<size_t>(
              assignment.position_of(group[ki]))];
          if (rows_of[ki])
            rec.insert(rec.end(), rows_of[ki]->begin(), rows_of[ki]->end());
        }
      }
    });
    return round_symbols;
  };

  for (int j = r; j >= s; --j) run_round(j, true);

  // what is still missing, identical for every quorum member by symmetry
  const long rows_needed = p.m - p.rows_per_server();
  long need = -1;
  for (int pos = 0; pos < q; ++pos) {
    const long got = static_cast<long>(tr.recovered_rows[static_cast<size_t>(pos)].size());
    const long need_k = rows_needed - got;
    if (need < 0) need = need_k;
    if (need != need_k)
      throw InternalCheckFailure("recovered row counts diverge across the quorum");
  }
  if (need < 0 || need > rows_needed)
    throw InternalCheckFailure("residual need out of range");

  if (need > 0) {
    const long uncoded_cost = p.N * need;
    long extended_cost = std::numeric_limits<long>::max();
    if (s - 1 >= 1) {
      const long probe = run_round(s - 1, false);
      if (probe > 0) extended_cost = probe;
    }

    if (extended_cost < uncoded_cost) {
      run_round(s - 1, true);
      tr.extended_round = true;
    } else {
      // unicast the first `need` missing rows to each member, lowest id
      // holder sends; every output of the member costs one symbol per row
      for (int pos = 0; pos < q; ++pos) {
        const int k = assignment.finishers[static_cast<size_t>(pos)];
        std::vector<std::pair<long, int>> candidates;  // (row, sender)
        for (const auto& [key, rows] : needed) {
          if (key.second != k) continue;
          const int level = static_cast<int>(key.first.size());
          if (level >= s) continue;  // already delivered by the rounds
          for (long row : rows) candidates.emplace_back(row, key.first.front());
        }
        std::sort(candidates.begin(), candidates.end());
        if (static_cast<long>(candidates.size()) < need)
          throw InternalCheckFailure("not enough uncoded candidates to finish");
        const auto [out_begin, out_end] = assignment.output_range(pos);
        for (long i = 0; i < need; ++i) {
          const auto [row, sender] = candidates[static_cast<size_t>(i)];
          for (long out = out_begin; out < out_end; ++out) {
            ShuffleMessage msg;
            msg.kind = ShuffleMessage::Kind::uncoded;
            msg.sender = sender;
            msg.recipients = {k};
            msg.level = 1;
            msg.symbols = 1;
            msg.parts = {MessagePart{k, {{row, out}}}};
            tr.stats.uncoded_symbols += 1;
            tr.stats.uncoded_messages += 1;
            tr.messages.push_back(std::move(msg));
          }
          tr.recovered_rows[static_cast<size_t>(pos)].push_back(row);
        }
      }
    }
  }

  // final feasibility: every member ends with at least m rows in hand
  for (int pos = 0; pos < q; ++pos) {
    auto& rec = tr.recovered_rows[static_cast<size_t>(pos)];
    std::sort(rec.begin(), rec.end());
    if (std::adjacent_find(rec.begin(), rec.end()) != rec.end())
      throw InternalCheckFailure("row delivered twice to one server");
    if (static_cast<long>(rec.size()) < rows_needed)
      throw InternalCheckFailure("shuffle leaves a server short of rows");
  }

  return tr;
}

Rat measure_load(const ShuffleTranscript& transcript, long m) {
  if (m < 1) throw ValidationError("m must be at least 1");
  return Rat(transcript.stats.total_symbols(), m);
}

void write_transcript_jsonl(std::ostream& os, const ShuffleTranscript& transcript,
                            const std::vector<std::uint64_t>* payload_hashes) {
  if (payload_hashes && payload_hashes->size() != transcript.messages.size())
    throw ValidationError("one payload hash per message required");
  for (size_t i = 0; i < transcript.messages.size(); ++i) {
    const auto& msg = transcript.messages[i];
    nlohmann::json j;
    j["kind"] = msg.kind == ShuffleMessage::Kind::coded ? "coded" : "uncoded";
    j["sender"] = msg.sender;
    j["recipients"] = msg.recipients;
    j["level"] = msg.level;
    if (!msg.group.empty()) j["group"] = msg.group;
    j["symbols"] = msg.symbols;
    nlohmann::json decoded = nlohmann::json::object();
    for (const auto& part : msg.parts)
      decoded[std::to_string(part.recipient)] = part.items.size();
    j["decoded_symbols"] = std::move(decoded);
    if (payload_hashes) {
      char buf[19];
      std::snprintf(buf, sizeof buf, "0x%016llx",
                    static_cast<unsigned long long>((*payload_hashes)[i]));
      j["payload_hash"] = buf;
    }
    os << j.dump() << "\n";
  }
}

}  // namespace codedmm
