#include "codedmm/params.hpp"

#include <sstream>

#include "codedmm/errors.hpp"
#include "codedmm/gf.hpp"

namespace codedmm {

int SchemeParams::replication() const {
  return static_cast<int>(to_long_checked(floor_rat(mu * q), "replication degree"));
}

Rat SchemeParams::effective_storage() const { return Rat(replication(), q); }

long SchemeParams::batch_count() const {
  return to_long_checked(binomial(K, replication()), "batch count");
}

long SchemeParams::batch_size() const {
  const Int total = Int(K) * m;
  const Int denom = Int(q) * binomial(K, replication());
  return to_long_checked(total / denom, "batch size");
}

long SchemeParams::coded_row_count() const {
  return to_long_checked(Int(K) * m / q, "coded row count");
}

long SchemeParams::rows_per_server() const {
  return to_long_checked(Int(replication()) * m / q, "rows per server");
}

long SchemeParams::outputs_per_reducer() const { return N / q; }

void SchemeParams::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };

  if (K < 1) fail("K must be at least 1");
  if (m < 1) fail("m must be at least 1");
  if (n < 1) fail("n must be at least 1");
  if (N < 1) fail("N must be at least 1");
  if (!gf_width_supported(w)) fail("field width must be 8 or 16");

  if (mu < Rat(1, K) || mu > 1) {
    fail("mu must lie in [1/K, 1], got " + fraction_string(mu) + " with K=" +
         std::to_string(K));
  }

  const Rat inv_mu = 1 / mu;
  const Int q_min = -floor_rat(-inv_mu);  // ceil(1/mu)
  if (Int(q) < q_min || q > K) {
    fail("q must lie in [ceil(1/mu), K] = [" + q_min.str() + ", " +
         std::to_string(K) + "], got " + std::to_string(q));
  }

  if (N % q != 0) {
    fail("q must divide N: q=" + std::to_string(q) + ", N=" + std::to_string(N));
  }

  const int r = replication();
  if (r < 1) fail("replication degree floor(mu q) must be at least 1");

  const Int batches = binomial(K, r);
  const Int km = Int(K) * m;
  const Int denom = Int(q) * batches;
  if (km % denom != 0) {
    std::ostringstream msg;
    msg << "batch partition is not integral: K*m = " << km.str()
        << " is not divisible by q*C(K," << r << ") = " << denom.str()
        << "; smallest padded m is " << padded_rows_for(*this);
    fail(msg.str());
  }

  const Int coded_rows = km / q;
  if (coded_rows > Int(Gf<8>::field_size) && w == 8) {
    fail("field too small: " + coded_rows.str() +
         " coded rows need distinct evaluation points, GF(2^8) has 256; use w=16");
  }
  if (coded_rows > Int(Gf<16>::field_size)) {
    fail("field too small: " + coded_rows.str() +
         " coded rows exceed the 65536 points of GF(2^16)");
  }
}

long padded_rows_for(const SchemeParams& p) {
  const int r = static_cast<int>(to_long_checked(floor_rat(p.mu * p.q), "replication"));
  const Int denom = Int(p.q) * binomial(p.K, r);
  const Int g = boost::multiprecision::gcd(Int(p.K), denom);
  const Int step = denom / g;  // m must be a multiple of this
  const Int padded = (Int(p.m) + step - 1) / step * step;
  return to_long_checked(padded, "padded m");
}

}  // namespace codedmm
