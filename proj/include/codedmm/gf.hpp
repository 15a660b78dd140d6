#pragma once

// Finite field scalars GF(2^w) for w in {8, 16}, table driven.
//
// Addition is XOR. Multiplication goes through log/antilog tables built
// once per width from a fixed reduction polynomial and group generator:
//
//   w = 8   poly x^8+x^4+x^3+x+1   (0x11b), generator 0x03
//   w = 16  poly x^16+x^12+x^3+x+1 (0x1100b), generator 0x02
//
// Both polynomials are irreducible; the generators have full multiplicative
// order, so every nonzero element appears exactly once in the antilog cycle.
// The scalar satisfies the field axioms and plugs into Eigen dense matrices
// via the NumTraits specialization at the bottom of this file.

#include <array>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <type_traits>
#include <utility>

#include <Eigen/Core>

namespace codedmm {

template <unsigned W>
struct GfTraits;

template <>
struct GfTraits<8> {
  using value_type = std::uint8_t;
  static constexpr std::uint32_t poly = 0x11b;
  static constexpr std::uint32_t generator = 0x03;
};

template <>
struct GfTraits<16> {
  using value_type = std::uint16_t;
  static constexpr std::uint32_t poly = 0x1100b;
  static constexpr std::uint32_t generator = 0x02;
};

constexpr bool gf_width_supported(unsigned w) { return w == 8 || w == 16; }

namespace detail {

// Shift-and-add product reduced mod poly. Only used to seed the tables and
// as a slow fallback; hot paths use the tables.
constexpr std::uint32_t gf_mul_bitwise(std::uint32_t a, std::uint32_t b,
                                       std::uint32_t poly, unsigned w) {
  std::uint32_t acc = 0;
  const std::uint32_t high_bit = 1u << (w - 1);
  const std::uint32_t mask = (1u << w) - 1;
  for (unsigned i = 0; i < w; ++i) {
    if (b & 1u) acc ^= a;
    b >>= 1;
    const bool carry = (a & high_bit) != 0;
    a = (a << 1) & mask;
    if (carry) a ^= (poly & mask);
  }
  return acc & mask;
}

template <unsigned W>
struct GfTables {
  using value_type = typename GfTraits<W>::value_type;
  static constexpr std::uint32_t field_size = 1u << W;
  static constexpr std::uint32_t order = field_size - 1;

  // antilog doubled so products can skip the mod on the exponent sum
  std::array<value_type, 2 * order> exp{};
  std::array<std::uint32_t, field_size> log{};

  GfTables() {
    std::uint32_t value = 1;
    for (std::uint32_t e = 0; e < order; ++e) {
      exp[e] = static_cast<value_type>(value);
      log[value] = e;
      value = gf_mul_bitwise(value, GfTraits<W>::generator, GfTraits<W>::poly, W);
    }
    if (value != 1)
      throw std::logic_error("GF table generator does not have full order");
    for (std::uint32_t e = order; e < 2 * order; ++e) exp[e] = exp[e - order];
  }

  static const GfTables& instance() {
    static const GfTables tables;
    return tables;
  }
};

}  // namespace detail

template <unsigned W>
class Gf {
  static_assert(gf_width_supported(W), "unsupported field width");

 public:
  using value_type = typename GfTraits<W>::value_type;
  static constexpr unsigned width = W;
  static constexpr std::uint32_t field_size = 1u << W;
  static constexpr std::uint32_t reduction_poly = GfTraits<W>::poly;

  constexpr Gf() = default;
  constexpr explicit Gf(std::uint64_t v) : v_(static_cast<value_type>(v)) {}

  constexpr std::uint32_t value() const { return v_; }

  friend constexpr Gf operator+(Gf a, Gf b) { return Gf(a.v_ ^ b.v_); }
  friend constexpr Gf operator-(Gf a, Gf b) { return Gf(a.v_ ^ b.v_); }
  constexpr Gf operator-() const { return *this; }

  friend Gf operator*(Gf a, Gf b) {
    if (a.v_ == 0 || b.v_ == 0) return Gf();
    const auto& t = detail::GfTables<W>::instance();
    return Gf(t.exp[t.log[a.v_] + t.log[b.v_]]);
  }

  friend Gf operator/(Gf a, Gf b) { return a * b.inverse(); }

  Gf& operator+=(Gf o) { v_ ^= o.v_; return *this; }
  Gf& operator-=(Gf o) { v_ ^= o.v_; return *this; }
  Gf& operator*=(Gf o) { *this = *this * o; return *this; }
  Gf& operator/=(Gf o) { *this = *this / o; return *this; }

  friend constexpr bool operator==(Gf a, Gf b) { return a.v_ == b.v_; }
  friend constexpr bool operator!=(Gf a, Gf b) { return a.v_ != b.v_; }

  Gf inverse() const {
    if (v_ == 0) throw std::domain_error("inverse of zero in GF(2^w)");
    const auto& t = detail::GfTables<W>::instance();
    const std::uint32_t order = field_size - 1;
    return Gf(t.exp[order - t.log[v_]]);
  }

  Gf pow(std::uint64_t e) const {
    if (v_ == 0) return e == 0 ? Gf(1) : Gf();
    const auto& t = detail::GfTables<W>::instance();
    const std::uint64_t order = field_size - 1;
    const std::uint64_t le = (static_cast<std::uint64_t>(t.log[v_]) * (e % order)) % order;
    return Gf(t.exp[le]);
  }

  friend std::ostream& operator<<(std::ostream& os, Gf g) {
    return os << static_cast<std::uint32_t>(g.v_);
  }

 private:
  value_type v_ = 0;
};

using Gf8 = Gf<8>;
using Gf16 = Gf<16>;

// Runtime width dispatch: calls f with an integral_constant for the width.
template <class F>
decltype(auto) dispatch_gf_width(unsigned w, F&& f) {
  switch (w) {
    case 8:
      return std::forward<F>(f)(std::integral_constant<unsigned, 8>{});
    case 16:
      return std::forward<F>(f)(std::integral_constant<unsigned, 16>{});
    default:
      throw std::invalid_argument("unsupported GF(2^w) width, use 8 or 16");
  }
}

}  // namespace codedmm

namespace Eigen {

template <unsigned W>
struct NumTraits<codedmm::Gf<W>> {
  using Self = codedmm::Gf<W>;
  using Real = Self;
  using NonInteger = Self;
  using Literal = Self;
  using Nested = Self;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 0,
    RequireInitialization = 0,
    ReadCost = 1,
    AddCost = 1,
    MulCost = 4
  };
  static inline Self epsilon() { return Self(0); }
  static inline Self dummy_precision() { return Self(0); }
  static inline Self highest() { return Self(Self::field_size - 1); }
  static inline Self lowest() { return Self(0); }
  static inline int digits10() { return W == 8 ? 3 : 5; }
};

}  // namespace Eigen
