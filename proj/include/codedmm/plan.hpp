#pragma once

// Storage planning. The m rows of A are expanded to R = (K/q) m coded rows
// by an MDS generator, grouped into equal batches, and each batch is placed
// on a distinct subset of replication() servers. Waiting for any q servers
// then leaves every output recoverable: their combined rows span the row
// space of A.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "codedmm/linalg.hpp"
#include "codedmm/params.hpp"

namespace codedmm {

enum class MdsKind { vandermonde, random };

struct Batch {
  std::vector<int> servers;  // sorted subset of {0..K-1}, size replication()
  long first_row = 0;        // rows [first_row, first_row + batch_size)
};

struct StoragePlan {
  SchemeParams params;
  MdsKind mds = MdsKind::vandermonde;
  std::uint64_t mds_seed = 0;  // meaningful for MdsKind::random only

  // batches in lexicographic subset order; together they partition
  // [0, coded_row_count)
  std::vector<Batch> batches;

  long batch_size() const { return params.batch_size(); }
  long coded_row_count() const { return params.coded_row_count(); }

  // sorted coded row indices stored on one server
  std::vector<long> rows_of_server(int server) const;
  bool server_has_row(int server, long row) const;

  nlohmann::json to_json() const;
  static StoragePlan from_json(const nlohmann::json& j);
};

// Deterministic plan with the Vandermonde generator.
StoragePlan build_plan(const SchemeParams& p);

// Plan with a seeded random generator. Random matrices are only MDS with
// high probability, so this verifies decodability before returning and
// throws ValidationError if the draw is unlucky.
StoragePlan build_random_plan(const SchemeParams& p, std::uint64_t seed,
                              long exhaustive_cap = 10000, long samples = 1000);

struct DecodabilityReport {
  bool pass = false;
  bool exhaustive = false;        // every q-subset checked, else sampled
  long subsets_checked = 0;
  std::vector<int> witness;       // first failing q-subset when !pass
  std::string reason;
};

// Checks that each q-subset of servers jointly holds rows of full rank m.
// Exhaustive when C(K, q) <= exhaustive_cap, otherwise `samples` random
// subsets drawn from `seed`.
DecodabilityReport verify_decodability(const StoragePlan& plan,
                                       long exhaustive_cap = 10000,
                                       long samples = 1000,
                                       std::uint64_t seed = 7);

// R x m generator matrix of the plan over GF(2^w).
template <unsigned W>
DenseMatrix<Gf<W>> generator_matrix(const StoragePlan& plan) {
  const long r_count = plan.coded_row_count();
  if (plan.mds == MdsKind::vandermonde)
    return vandermonde<W>(r_count, plan.params.m);
  SplitMix64 rng(SplitMix64::derive(plan.mds_seed, 0x6d64732d67656eull));
  return random_matrix<W>(r_count, plan.params.m, rng);
}

// Rows a server stores after the map phase: E_k A, one row per stored
// coded row, in rows_of_server order.
template <unsigned W>
DenseMatrix<Gf<W>> server_storage_matrix(const StoragePlan& plan, int server,
                                         const DenseMatrix<Gf<W>>& a) {
  const auto& g = generator_matrix<W>(plan);
  const auto rows = plan.rows_of_server(server);
  DenseMatrix<Gf<W>> u(static_cast<Index>(rows.size()), a.cols());
  for (size_t i = 0; i < rows.size(); ++i)
    u.row(static_cast<Index>(i)) = g.row(rows[i]) * a;
  return u;
}

// Recover one output vector y = A x from at least m coded values c_i x.
// `values` pairs a coded row index with its value; duplicates are ignored.
template <unsigned W>
DenseVector<Gf<W>> reduce_decode(const StoragePlan& plan,
                                 const std::vector<std::pair<long, Gf<W>>>& values) {
  const long m = plan.params.m;
  const auto g = generator_matrix<W>(plan);

  // pick the first subset of rows that reaches full rank
  RowEchelon<Gf<W>> re(m);
  std::vector<long> chosen;
  std::vector<Gf<W>> chosen_values;
  std::vector<char> seen(static_cast<size_t>(plan.coded_row_count()), 0);
  for (const auto& [row, value] : values) {
    if (row < 0 || row >= plan.coded_row_count())
      throw ValidationError("coded row index out of range in decode");
    if (seen[static_cast<size_t>(row)]) continue;
    seen[static_cast<size_t>(row)] = 1;
    if (re.insert(g.row(row).transpose())) {
      chosen.push_back(row);
      chosen_values.push_back(value);
      if (re.rank() == m) break;
    }
  }
  if (re.rank() < m)
    throw SingularMatrix("decode needs " + std::to_string(m) +
                         " independent coded values, got rank " +
                         std::to_string(re.rank()));

  DenseMatrix<Gf<W>> gd(m, m);
  DenseMatrix<Gf<W>> rhs(m, 1);
  for (long i = 0; i < m; ++i) {
    gd.row(i) = g.row(chosen[static_cast<size_t>(i)]);
    rhs(i, 0) = chosen_values[static_cast<size_t>(i)];
  }
  return solve(gd, rhs).col(0);
}

}  // namespace codedmm
