#pragma once

// Exact rational arithmetic for loads, latencies and counting. All closed
// form quantities in this library are rationals; doubles only appear at the
// rendering and sampling boundaries.

#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "codedmm/errors.hpp"

namespace codedmm {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return Int(0);
  if (k > n - k) k = n - k;
  Int acc = 1;
  for (long i = 1; i <= k; ++i) {
    acc *= (n - k + i);
    acc /= i;  // exact: acc is always a binomial coefficient times nothing
  }
  return acc;
}

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline Int floor_rat(const Rat& r) {
  Int num = boost::multiprecision::numerator(r);
  Int den = boost::multiprecision::denominator(r);
  Int q = num / den;
  if (num < 0 && q * den != num) --q;
  return q;
}

inline long to_long_checked(const Int& v, const char* what) {
  if (v < std::numeric_limits<long>::min() || v > std::numeric_limits<long>::max())
    throw ValidationError(std::string(what) + " does not fit in a machine integer");
  return v.convert_to<long>();
}

// Accepts "p/q", integers, and plain decimals ("0.25" becomes 1/4 exactly).
inline Rat parse_ratio(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw ValidationError("empty rational literal");
  auto bad = [&] { throw ValidationError("cannot parse rational literal '" + s + "'"); };
  try {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      Int num(s.substr(0, slash));
      Int den(s.substr(slash + 1));
      if (den == 0) throw ValidationError("zero denominator in '" + s + "'");
      return Rat(num, den);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      if (digits.empty() || digits == "-" || digits == "+") bad();
      Int num(digits);
      Int den = 1;
      for (size_t i = dot + 1; i < s.size(); ++i) den *= 10;
      return Rat(num, den);
    }
    return Rat(Int(s));
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    bad();
  }
  return Rat(0);  // unreachable
}

inline std::string fraction_string(const Rat& r) {
  Int num = boost::multiprecision::numerator(r);
  Int den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline std::string decimal_string(const Rat& r, int significant_digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, to_double(r));
  return buf;
}

}  // namespace codedmm
