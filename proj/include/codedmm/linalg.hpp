#pragma once

// Dense linear algebra over GF(2^w) on top of Eigen storage. Eigen's own
// decompositions assume ordered fields, so rank and solve are done here with
// plain Gaussian elimination; pivoting picks the first nonzero entry, which
// is exact in a finite field.

#include <algorithm>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "codedmm/errors.hpp"
#include "codedmm/gf.hpp"
#include "codedmm/rng.hpp"

namespace codedmm {

template <class Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

// rows x cols Vandermonde matrix on the evaluation points 0..rows-1,
// entry (i, j) = i^j with 0^0 = 1. Any cols of its rows with distinct
// points are linearly independent, which is what makes it an MDS generator.
template <unsigned W>
DenseMatrix<Gf<W>> vandermonde(Index rows, Index cols) {
  if (rows < 0 || cols < 0) throw ValidationError("negative matrix dimension");
  if (static_cast<std::uint64_t>(rows) > Gf<W>::field_size)
    throw ValidationError("field too small: need as many evaluation points as rows");
  DenseMatrix<Gf<W>> v(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Gf<W> x(static_cast<std::uint64_t>(i));
    Gf<W> p(1);
    for (Index j = 0; j < cols; ++j) {
      v(i, j) = p;
      p *= x;
    }
  }
  return v;
}

template <unsigned W>
DenseMatrix<Gf<W>> random_matrix(Index rows, Index cols, SplitMix64& rng) {
  DenseMatrix<Gf<W>> m(rows, cols);
  const std::uint64_t mask = Gf<W>::field_size - 1;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Gf<W>(rng.next() & mask);
  return m;
}

// Incremental row echelon form. Rows are inserted one at a time; insert()
// reports whether the rank grew, so callers can stop early or record which
// input rows form an independent set.
template <class Scalar>
class RowEchelon {
 public:
  explicit RowEchelon(Index cols) : cols_(cols) {}

  bool insert(DenseVector<Scalar> row) {
    if (row.size() != cols_) throw ValidationError("row length mismatch");
    for (const auto& [pivot, basis] : rows_) {
      const Scalar c = row(pivot);
      if (c != Scalar(0)) row += c * basis;  // characteristic 2: add is subtract
    }
    Index pivot = -1;
    for (Index j = 0; j < cols_; ++j) {
      if (row(j) != Scalar(0)) {
        pivot = j;
        break;
      }
    }
    if (pivot < 0) return false;
    row *= row(pivot).inverse();
    auto pos = rows_.begin();
    while (pos != rows_.end() && pos->first < pivot) ++pos;
    rows_.insert(pos, {pivot, std::move(row)});
    return true;
  }

  Index rank() const { return static_cast<Index>(rows_.size()); }

 private:
  Index cols_;
  std::vector<std::pair<Index, DenseVector<Scalar>>> rows_;
};

template <class Derived>
Index rank_of(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  RowEchelon<Scalar> re(m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    re.insert(m.row(i).transpose());
    if (re.rank() == std::min(m.rows(), m.cols())) break;
  }
  return re.rank();
}

// Gauss-Jordan solve of A X = B for square A, any number of right hand
// sides. Throws SingularMatrix when A has no inverse.
template <class Scalar>
DenseMatrix<Scalar> solve(DenseMatrix<Scalar> a, DenseMatrix<Scalar> b) {
  const Index n = a.rows();
  if (a.cols() != n) throw ValidationError("solve needs a square matrix");
  if (b.rows() != n) throw ValidationError("right hand side has wrong row count");
  for (Index col = 0; col < n; ++col) {
    Index pivot = -1;
    for (Index r = col; r < n; ++r) {
      if (a(r, col) != Scalar(0)) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) throw SingularMatrix("matrix is singular");
    if (pivot != col) {
      a.row(col).swap(a.row(pivot));
      b.row(col).swap(b.row(pivot));
    }
    const Scalar inv = a(col, col).inverse();
    a.row(col) *= inv;
    b.row(col) *= inv;
    for (Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const Scalar c = a(r, col);
      if (c == Scalar(0)) continue;
      a.row(r) += c * a.row(col);
      b.row(r) += c * b.row(col);
    }
  }
  return b;
}

}  // namespace codedmm
