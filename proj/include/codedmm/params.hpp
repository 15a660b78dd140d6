#pragma once

// Scheme parameters. Naming follows the standard erasure coding convention:
// K servers, wait for the fastest q, each server stores a mu fraction of the
// input matrix. The job multiplies an m x n matrix A by N input vectors.

#include <string>

#include "codedmm/rational.hpp"

namespace codedmm {

struct SchemeParams {
  int K = 0;       // number of servers
  int q = 0;       // quorum: servers we wait for before reducing
  Rat mu;          // per server storage fraction, 1/K <= mu <= 1
  long m = 0;      // rows of A (length of each output vector)
  long n = 0;      // columns of A (length of each input vector)
  long N = 0;      // number of input vectors
  unsigned w = 8;  // field width, GF(2^w)

  // replication degree: how many servers hold each stored batch
  int replication() const;

  // storage fraction actually used, floor(mu q) / q; equals mu when mu q is
  // an integer and is never larger than mu
  Rat effective_storage() const;

  long batch_count() const;        // C(K, replication)
  long batch_size() const;         // rows per batch
  long coded_row_count() const;    // total coded rows, (K/q) m
  long rows_per_server() const;    // effective_storage * m
  long outputs_per_reducer() const;  // N / q

  // Throws ValidationError naming the violated constraint. Every public
  // entry point calls this before doing real work.
  void validate() const;
};

// Smallest m' >= m for which the batch partition is integral. validate()
// quotes this in its error message so callers can self serve the fix.
long padded_rows_for(const SchemeParams& p);

}  // namespace codedmm
