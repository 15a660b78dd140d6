#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "codedmm/gf.hpp"
#include "codedmm/linalg.hpp"
#include "codedmm/rng.hpp"
#include "oracles.hpp"

using namespace codedmm;

TEST_CASE("carry-less oracle reproduces known products") {
  // frozen by hand: (x^6+x^4+x+1)(x^7+x^6+x^3+x) mod x^8+x^4+x^3+x+1 = 1
  CHECK(oracles::clmul_mod(0x53, 0xCA, 0x11b, 8) == 0x01);
  CHECK(oracles::clmul_mod(0x02, 0x03, 0x11b, 8) == 0x06);  // no reduction
  CHECK(oracles::clmul_mod(0x80, 0x02, 0x11b, 8) == 0x1b);  // one reduction
  CHECK(oracles::clmul_mod(0x02, 0x03, 0x1100b, 16) == 0x06);
  CHECK(oracles::clmul_mod(0x8000, 0x02, 0x1100b, 16) == 0x100b);
}

TEST_CASE("GF(2^8) multiplication matches the carry-less oracle exhaustively") {
  for (unsigned a = 0; a < 256; ++a)
    for (unsigned b = 0; b < 256; ++b) {
      const auto got = (Gf8(a) * Gf8(b)).value();
      const auto want = oracles::clmul_mod(a, b, 0x11b, 8);
      if (got != want) {
        CAPTURE(a);
        CAPTURE(b);
        REQUIRE(got == want);
      }
    }
  CHECK((Gf8(0x53) * Gf8(0xCA)).value() == 0x01);
}

TEST_CASE("GF(2^16) multiplication matches the carry-less oracle on samples") {
  SplitMix64 rng(42);
  for (int i = 0; i < 20000; ++i) {
    const auto a = static_cast<std::uint32_t>(rng.next() & 0xffff);
    const auto b = static_cast<std::uint32_t>(rng.next() & 0xffff);
    const auto got = (Gf16(a) * Gf16(b)).value();
    const auto want = oracles::clmul_mod(a, b, 0x1100b, 16);
    if (got != want) {
      CAPTURE(a);
      CAPTURE(b);
      REQUIRE(got == want);
    }
  }
  CHECK((Gf16(0xffff) * Gf16(0xffff)).value() ==
        oracles::clmul_mod(0xffff, 0xffff, 0x1100b, 16));
  CHECK((Gf16(1) * Gf16(0x1234)).value() == 0x1234);
}

TEST_CASE_TEMPLATE("field axioms hold on random triples", T, Gf8, Gf16) {
  SplitMix64 rng(7);
  const std::uint64_t mask = T::field_size - 1;
  for (int i = 0; i < 5000; ++i) {
    const T a(rng.next() & mask), b(rng.next() & mask), c(rng.next() & mask);
    CHECK(a + b == b + a);
    CHECK(a * b == b * a);
    CHECK((a + b) + c == a + (b + c));
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a + a == T(0));
    CHECK(a * T(1) == a);
    CHECK(a * T(0) == T(0));
    CHECK(a - b == a + b);
  }
}

TEST_CASE("inverses: exhaustive for w=8, sampled for w=16") {
  for (unsigned a = 1; a < 256; ++a) CHECK((Gf8(a) * Gf8(a).inverse()).value() == 1);
  CHECK_THROWS_AS(Gf8(0).inverse(), std::domain_error);

  SplitMix64 rng(9);
  for (int i = 0; i < 4000; ++i) {
    const auto a = (rng.next() & 0xfffe) + 1;  // nonzero
    CHECK((Gf16(a) * Gf16(a).inverse()).value() == 1);
  }
  CHECK_THROWS_AS(Gf16(0).inverse(), std::domain_error);
}

TEST_CASE_TEMPLATE("powers", T, Gf8, Gf16) {
  SplitMix64 rng(11);
  const std::uint64_t mask = T::field_size - 1;
  for (int i = 0; i < 200; ++i) {
    const T a((rng.next() & (mask - 1)) + 1);
    CHECK(a.pow(0) == T(1));
    CHECK(a.pow(1) == a);
    CHECK(a.pow(2) == a * a);
    CHECK(a.pow(T::field_size - 1) == T(1));  // multiplicative group order
    const auto e1 = rng.next() % 1000, e2 = rng.next() % 1000;
    CHECK(a.pow(e1) * a.pow(e2) == a.pow(e1 + e2));
  }
  CHECK(T(0).pow(0) == T(1));
  CHECK(T(0).pow(5) == T(0));
}

TEST_CASE_TEMPLATE("Eigen products agree with the schoolbook oracle", T, Gf8, Gf16) {
  SplitMix64 rng(1234);
  for (int round = 0; round < 8; ++round) {
    const auto a = random_matrix<T::width>(7, 5, rng);
    const auto b = random_matrix<T::width>(5, 6, rng);
    const auto c = random_matrix<T::width>(6, 4, rng);
    const DenseMatrix<T> ab = a * b;
    const DenseMatrix<T> want = oracles::naive_product(a, b);
    for (Index i = 0; i < ab.rows(); ++i)
      for (Index j = 0; j < ab.cols(); ++j) REQUIRE(ab(i, j) == want(i, j));
    // associativity through Eigen's evaluators
    const DenseMatrix<T> left = (a * b) * c;
    const DenseMatrix<T> right = a * (b * c);
    for (Index i = 0; i < left.rows(); ++i)
      for (Index j = 0; j < left.cols(); ++j) REQUIRE(left(i, j) == right(i, j));
  }
}

TEST_CASE("vandermonde entries and rank") {
  const auto v = vandermonde<8>(6, 3);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 3; ++j) {
      std::uint32_t want = 1;
      for (Index t = 0; t < j; ++t)
        want = oracles::clmul_mod(want, static_cast<std::uint32_t>(i), 0x11b, 8);
      CHECK(v(i, j).value() == want);
    }

  // every 3-row subset of 6 distinct evaluation points has full rank
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b)
      for (int c = b + 1; c < 6; ++c) {
        DenseMatrix<Gf8> sub(3, 3);
        sub.row(0) = v.row(a);
        sub.row(1) = v.row(b);
        sub.row(2) = v.row(c);
        REQUIRE(rank_of(sub) == 3);
      }

  CHECK_THROWS_AS(vandermonde<8>(300, 4), ValidationError);
  CHECK(vandermonde<16>(300, 4).rows() == 300);
}

TEST_CASE_TEMPLATE("rank detects dependent rows", T, Gf8, Gf16) {
  SplitMix64 rng(5);
  auto m = random_matrix<T::width>(4, 6, rng);
  m.row(3) = m.row(0) + m.row(1);  // dependent by construction
  CHECK(rank_of(m) <= 3);

  DenseMatrix<T> z = DenseMatrix<T>::Zero(3, 3);
  CHECK(rank_of(z) == 0);
  CHECK(rank_of(DenseMatrix<T>::Identity(5, 5)) == 5);
}

TEST_CASE_TEMPLATE("solve inverts known systems", T, Gf8, Gf16) {
  SplitMix64 rng(77);
  const auto a = vandermonde<T::width>(6, 6);  // invertible: distinct points
  const auto x = random_matrix<T::width>(6, 3, rng);
  const DenseMatrix<T> b = a * x;
  const auto got = solve<T>(a, b);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 3; ++j) REQUIRE(got(i, j) == x(i, j));

  DenseMatrix<T> sing = a;
  sing.row(5) = sing.row(0);
  CHECK_THROWS_AS(solve<T>(sing, b), SingularMatrix);
}

TEST_CASE("row echelon inserts report rank growth") {
  const auto v = vandermonde<8>(8, 4);
  RowEchelon<Gf8> re(4);
  CHECK(re.insert(v.row(0).transpose()));
  CHECK(re.insert(v.row(3).transpose()));
  CHECK(re.rank() == 2);
  DenseVector<Gf8> dep = v.row(0).transpose();
  dep += v.row(3).transpose();
  CHECK_FALSE(re.insert(dep));
  CHECK(re.insert(v.row(5).transpose()));
  CHECK(re.insert(v.row(6).transpose()));
  CHECK(re.rank() == 4);
  CHECK_FALSE(re.insert(v.row(7).transpose()));  // already full rank
}
