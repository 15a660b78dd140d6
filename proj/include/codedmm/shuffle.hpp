#pragma once

// Shuffle planning and execution.
//
// After the map phase each of the q quorum members owns its stored coded
// rows and must collect, for every output assigned to it, enough further
// values to reach rank m. The plan below serves those needs with XOR
// multicasts: within a group S of j+1 quorum members, every member is
// missing a value block that the j others share, so one XOR of j segments
// gives each recipient one useful segment for free.
//
// Rounds run at coding levels j = r down to the analysis cutoff s. Whatever
// the rounds do not cover is handled by the cheaper of two residual
// strategies: plain unicasts, or one extra coded round at level s-1.
//
// plan_shuffle is pure bookkeeping (senders, recipients, symbol counts);
// execute_shuffle materializes payloads over GF(2^w) and checks that every
// recipient decodes exactly the values the plan promised.

#include <cstdint>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "codedmm/analysis.hpp"
#include "codedmm/plan.hpp"

namespace codedmm {

struct ReduceAssignment {
  std::vector<int> finishers;  // quorum server ids, sorted ascending
  long total_outputs = 0;

  int quorum() const { return static_cast<int>(finishers.size()); }
  long outputs_per_server() const { return total_outputs / quorum(); }

  // contiguous block of output indices owned by the finisher at `position`
  std::pair<long, long> output_range(int position) const {
    const long per = outputs_per_server();
    return {position * per, (position + 1) * per};
  }

  int position_of(int server) const;

  // Splits N outputs evenly over the given finishers. Throws unless the
  // quorum size divides N.
  static ReduceAssignment balanced(std::vector<int> finishers, long total_outputs);
};

// The values exactly the servers of `holders` own and `target` needs:
// every stored row of those batches, paired with every output of `target`.
struct NeededSet {
  std::vector<int> holders;  // nonempty subset of the quorum, sorted
  int target = 0;            // quorum member, not in holders
  std::vector<long> rows;    // coded rows, ascending
};

std::vector<NeededSet> build_needed_sets(const StoragePlan& plan,
                                         const ReduceAssignment& assignment);

struct MessagePart {
  int recipient = 0;
  std::vector<std::pair<long, long>> items;  // (coded row, output), in order
};

struct ShuffleMessage {
  enum class Kind { coded, uncoded };
  Kind kind = Kind::coded;
  int sender = 0;
  std::vector<int> recipients;
  long symbols = 0;          // transmitted field symbols, padding included
  int level = 0;             // coding gain j of the round; 1 for uncoded
  std::vector<int> group;    // the group S of a coded round, empty otherwise
  std::vector<MessagePart> parts;  // per recipient: what it recovers
};

struct ShuffleStats {
  long coded_symbols = 0;
  long uncoded_symbols = 0;
  long coded_messages = 0;
  long uncoded_messages = 0;
  long total_symbols() const { return coded_symbols + uncoded_symbols; }
};

struct ShuffleTranscript {
  std::vector<ShuffleMessage> messages;
  ShuffleStats stats;
  int cutoff = 0;                   // analysis threshold s actually used
  bool extended_round = false;      // residual served by a round at s-1
  // rows recovered by each quorum position during coded rounds and residual,
  // valid for every output of that server
  std::vector<std::vector<long>> recovered_rows;
};

ShuffleTranscript plan_shuffle(const StoragePlan& plan,
                               const ReduceAssignment& assignment);

// symbols transmitted per row of A; N outputs of length m each
Rat measure_load(const ShuffleTranscript& transcript, long m);

// One JSON object per message: sender, recipients, level, symbol count and
// an optional payload hash (filled by execution).
void write_transcript_jsonl(std::ostream& os, const ShuffleTranscript& transcript,
                            const std::vector<std::uint64_t>* payload_hashes = nullptr);

// ---------------------------------------------------------------------------
// Execution over a concrete field.

template <unsigned W>
struct ShuffleExecution {
  // per quorum position: received (row, output) -> value
  std::vector<std::map<std::pair<long, long>, Gf<W>>> received;
  std::vector<std::uint64_t> payload_hashes;  // FNV-1a per message
  long symbols_sent = 0;
};

namespace detail {

inline std::uint64_t fnv1a_init() { return 0xcbf29ce484222325ull; }

inline std::uint64_t fnv1a_step(std::uint64_t h, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) {
    h ^= (value >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

// `products` is the full R x N table of coded intermediate values, row i and
// column j holding (E A)_i x_j. Senders only ever read entries their server
// stores; that and every recipient side decode are checked against the plan
// and any mismatch throws InternalCheckFailure.
template <unsigned W>
ShuffleExecution<W> execute_shuffle(const ShuffleTranscript& transcript,
                                    const StoragePlan& plan,
                                    const ReduceAssignment& assignment,
                                    const DenseMatrix<Gf<W>>& products) {
  ShuffleExecution<W> exec;
  exec.received.resize(static_cast<size_t>(assignment.quorum()));
  exec.payload_hashes.reserve(transcript.messages.size());

  // membership bitmaps, server id -> coded row -> holds?
  const long r_count = plan.coded_row_count();
  std::vector<std::vector<char>> holds(static_cast<size_t>(plan.params.K),
                                       std::vector<char>(static_cast<size_t>(r_count), 0));
  const long b = plan.batch_size();
  for (const auto& batch : plan.batches)
    for (int s : batch.servers)
      for (long i = 0; i < b; ++i)
        holds[static_cast<size_t>(s)][static_cast<size_t>(batch.first_row + i)] = 1;

  auto has = [&](int server, long row) {
    return holds[static_cast<size_t>(server)][static_cast<size_t>(row)] != 0;
  };

  for (const auto& msg : transcript.messages) {
    // sender must own everything it transmits
    for (const auto& part : msg.parts)
      for (const auto& [row, out] : part.items)
        if (!has(msg.sender, row))
          throw InternalCheckFailure("sender " + std::to_string(msg.sender) +
                                     " does not store coded row " + std::to_string(row));

    // payload = XOR of the per recipient segments, each padded with zeros
    std::vector<Gf<W>> payload(static_cast<size_t>(msg.symbols), Gf<W>(0));
    for (const auto& part : msg.parts) {
      for (size_t t = 0; t < part.items.size(); ++t)
        payload[t] += products(part.items[t].first, part.items[t].second);
    }

    std::uint64_t h = detail::fnv1a_init();
    for (const auto& v : payload) h = detail::fnv1a_step(h, v.value());
    exec.payload_hashes.push_back(h);
    exec.symbols_sent += msg.symbols;

    // each recipient cancels the other segments with locally stored values
    for (const auto& dest : msg.parts) {
      std::vector<Gf<W>> mine(payload.begin(),
                              payload.begin() + static_cast<long>(dest.items.size()));
      for (const auto& other : msg.parts) {
        if (other.recipient == dest.recipient) continue;
        for (size_t t = 0; t < mine.size() && t < other.items.size(); ++t) {
          const auto [row, out] = other.items[t];
          if (!has(dest.recipient, row))
            throw InternalCheckFailure("recipient " + std::to_string(dest.recipient) +
                                       " cannot cancel coded row " + std::to_string(row));
          mine[t] += products(row, out);
        }
      }
      const int pos = assignment.position_of(dest.recipient);
      for (size_t t = 0; t < dest.items.size(); ++t) {
        if (mine[t] != products(dest.items[t].first, dest.items[t].second))
          throw InternalCheckFailure("decoded value mismatch at recipient " +
                                     std::to_string(dest.recipient));
        exec.received[static_cast<size_t>(pos)][dest.items[t]] = mine[t];
      }
    }
  }
  return exec;
}

}  // namespace codedmm
