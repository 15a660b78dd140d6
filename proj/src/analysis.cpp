#include "codedmm/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "codedmm/errors.hpp"

namespace codedmm {

namespace {

void check_args(int K, int q, const Rat& mu) {
  if (K < 1) throw ValidationError("K must be at least 1");
  if (mu < Rat(1, K) || mu > 1)
    throw ValidationError("mu must lie in [1/K, 1]");
  const Int q_min = -floor_rat(-(1 / mu));
  if (Int(q) < q_min || q > K)
    throw ValidationError("q must lie in [ceil(1/mu), K] = [" + q_min.str() +
                          ", " + std::to_string(K) + "]");
}

int replication_of(int q, const Rat& mu) {
  return static_cast<int>(to_long_checked(floor_rat(mu * q), "replication"));
}

}  // namespace

Rat b_coefficient(int K, int q, const Rat& mu, int j) {
  check_args(K, q, mu);
  const int r = replication_of(q, mu);
  const Int num = binomial(q - 1, j) * binomial(K - q, r - j);
  if (num == 0) return Rat(0);
  return Rat(Int(K) * num, Int(q) * binomial(K, r));
}

int threshold_s(int K, int q, const Rat& mu) {
  check_args(K, q, mu);
  const int r = replication_of(q, mu);
  const Rat target = 1 - Rat(r, q);  // fraction each reducer is missing

  std::vector<Rat> b(static_cast<size_t>(r) + 1);
  for (int j = 0; j <= r; ++j) b[static_cast<size_t>(j)] = b_coefficient(K, q, mu, j);

  Rat tail = 0;
  for (int j = 0; j <= r; ++j) tail += b[static_cast<size_t>(j)];
  for (int s = 0; s <= r + 1; ++s) {
    // tail is sum_{j >= s} B_j here
    const bool last_round_nonempty = (s == r + 1) || b[static_cast<size_t>(s)] > 0;
    if (tail <= target && last_round_nonempty) return s;
    if (s <= r) tail -= b[static_cast<size_t>(s)];
  }
  throw InternalCheckFailure("no feasible shuffle cutoff found");
}

Rat achievable_load(int K, int q, const Rat& mu, long N) {
  check_args(K, q, mu);
  if (N < 1) throw ValidationError("N must be at least 1");
  const int r = replication_of(q, mu);
  const Rat target = 1 - Rat(r, q);
  const int s = threshold_s(K, q, mu);

  Rat coded = 0;
  Rat tail = 0;
  for (int j = s; j <= r; ++j) {
    const Rat bj = b_coefficient(K, q, mu, j);
    if (bj == 0) continue;
    if (j == 0) throw InternalCheckFailure("coded round at level 0");
    coded += bj / j;
    tail += bj;
  }

  Rat residual_need = target - tail;
  if (residual_need < 0) residual_need = 0;

  Rat residual = 0;
  if (residual_need > 0) {
    if (s <= 1) {
      residual = residual_need;  // plain unicast of what is left
    } else {
      const Rat extra_round = b_coefficient(K, q, mu, s - 1) / (s - 1);
      if (extra_round == 0)
        throw InternalCheckFailure("residual need with an empty round below cutoff");
      residual = std::min(residual_need, extra_round);
    }
  }
  return Rat(N) * (coded + residual);
}

Rat lower_bound_load(int K, int q, const Rat& mu, long N) {
  check_args(K, q, mu);
  if (N < 1) throw ValidationError("N must be at least 1");
  Rat best = 0;
  for (int t = 1; t < q; ++t) {
    Rat missing = 1 - Rat(t) * mu;
    if (missing < 0) missing = 0;
    const int groups = (q + t - 1) / t;  // ceil(q / t)
    const Rat value = missing * Rat(q, 1) / (Rat(groups) * (q - t));
    if (value > best) best = value;
  }
  return Rat(N) * best;
}

namespace {

// Lower convex hull by monotone chain. Coordinates are given exactly when
// available so collinearity decisions never hinge on rounding.
template <class X, class Y>
std::vector<int> lower_hull(const std::vector<std::pair<X, Y>>& pts) {
  std::vector<int> order(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& pa = pts[static_cast<size_t>(a)];
    const auto& pb = pts[static_cast<size_t>(b)];
    if (pa.first != pb.first) return pa.first < pb.first;
    return pa.second < pb.second;
  });
  // one point per x, the lowest
  std::vector<int> uniq;
  for (int i : order) {
    if (!uniq.empty() &&
        pts[static_cast<size_t>(uniq.back())].first == pts[static_cast<size_t>(i)].first)
      continue;
    uniq.push_back(i);
  }
  auto cross_sign = [&](int o, int a, int b) {
    const auto& po = pts[static_cast<size_t>(o)];
    const auto& pa = pts[static_cast<size_t>(a)];
    const auto& pb = pts[static_cast<size_t>(b)];
    const auto lhs = (pa.first - po.first) * (pb.second - po.second);
    const auto rhs = (pa.second - po.second) * (pb.first - po.first);
    if (lhs < rhs) return -1;
    if (lhs > rhs) return 1;
    return 0;
  };
  std::vector<int> hull;
  for (int i : uniq) {
    while (hull.size() >= 2 &&
           cross_sign(hull[hull.size() - 2], hull[hull.size() - 1], i) <= 0)
      hull.pop_back();
    hull.push_back(i);
  }
  return hull;
}

std::vector<int> hull_of_points(const std::vector<TradeoffPoint>& points,
                                bool lower_bound) {
  bool all_exact = true;
  for (const auto& p : points) all_exact = all_exact && p.latency_is_exact;
  if (all_exact) {
    std::vector<std::pair<Rat, Rat>> pts;
    pts.reserve(points.size());
    for (const auto& p : points)
      pts.emplace_back(p.latency_exact, lower_bound ? p.load_lower_bound : p.load);
    return lower_hull(pts);
  }
  std::vector<std::pair<double, double>> pts;
  pts.reserve(points.size());
  for (const auto& p : points)
    pts.emplace_back(p.latency,
                     to_double(lower_bound ? p.load_lower_bound : p.load));
  return lower_hull(pts);
}

}  // namespace

double TradeoffCurve::envelope_load(double latency, bool lower_bound,
                                    bool* clamped) const {
  const auto& hull = lower_bound ? lower_bound_hull : achievable_hull;
  if (clamped) *clamped = false;
  if (hull.empty()) throw ValidationError("empty tradeoff curve");
  auto x_of = [&](int i) { return points[static_cast<size_t>(i)].latency; };
  auto y_of = [&](int i) {
    const auto& p = points[static_cast<size_t>(i)];
    return to_double(lower_bound ? p.load_lower_bound : p.load);
  };
  if (latency <= x_of(hull.front())) {
    if (clamped && latency < x_of(hull.front())) *clamped = true;
    return y_of(hull.front());
  }
  if (latency >= x_of(hull.back())) {
    if (clamped && latency > x_of(hull.back())) *clamped = true;
    return y_of(hull.back());
  }
  for (size_t i = 1; i < hull.size(); ++i) {
    const double x0 = x_of(hull[i - 1]);
    const double x1 = x_of(hull[i]);
    if (latency <= x1) {
      const double f = (latency - x0) / (x1 - x0);
      return y_of(hull[i - 1]) + f * (y_of(hull[i]) - y_of(hull[i - 1]));
    }
  }
  return y_of(hull.back());  // unreachable
}

TradeoffCurve tradeoff_curve(int K, const Rat& mu, long N, const LatencyModel& model) {
  if (K < 1) throw ValidationError("K must be at least 1");
  if (mu < Rat(1, K) || mu > 1) throw ValidationError("mu must lie in [1/K, 1]");
  const int q_min = static_cast<int>(to_long_checked(-floor_rat(-(1 / mu)), "q"));

  TradeoffCurve curve;
  for (int q = q_min; q <= K; ++q) {
    TradeoffPoint pt;
    pt.q = q;
    if (model.kind == LatencyModel::Kind::shifted_exponential) {
      pt.latency_exact = expected_wait_exact(model, K, q);
      pt.latency_is_exact = true;
      pt.latency = to_double(pt.latency_exact);
    } else {
      pt.latency = expected_wait(model, K, q);
    }
    pt.load = achievable_load(K, q, mu, N);
    pt.load_lower_bound = lower_bound_load(K, q, mu, N);
    if (pt.load == 0) {
      pt.gap = 0;
      pt.gap_defined = true;
    } else if (pt.load_lower_bound > 0) {
      pt.gap = pt.load / pt.load_lower_bound;
      pt.gap_defined = true;
    }
    const bool exhausted = pt.load == 0;
    curve.points.push_back(std::move(pt));
    // a zero load point dominates every slower quorum, so the table ends here
    if (exhausted) break;
  }
  curve.achievable_hull = hull_of_points(curve.points, false);
  curve.lower_bound_hull = hull_of_points(curve.points, true);
  return curve;
}

std::vector<GapEntry> gap_report(int K, const Rat& mu, long N) {
  if (K < 1) throw ValidationError("K must be at least 1");
  if (mu < Rat(1, K) || mu > 1) throw ValidationError("mu must lie in [1/K, 1]");
  const int q_min = static_cast<int>(to_long_checked(-floor_rat(-(1 / mu)), "q"));

  // Latency coordinates at unit scale. The envelope value at each vertex is
  // invariant under the affine rescaling a real wait model applies, so the
  // report does not need one.
  std::vector<std::pair<Rat, Rat>> pts;
  std::vector<Rat> bounds;
  for (int q = q_min; q <= K; ++q) {
    pts.emplace_back(1 + harmonic_tail(K, q), achievable_load(K, q, mu, N));
    bounds.push_back(lower_bound_load(K, q, mu, N));
  }
  const std::vector<int> hull = lower_hull(pts);
  auto envelope_at = [&](const Rat& x) -> Rat {
    auto x_of = [&](size_t i) { return pts[static_cast<size_t>(hull[i])].first; };
    auto y_of = [&](size_t i) { return pts[static_cast<size_t>(hull[i])].second; };
    if (x <= x_of(0)) return y_of(0);
    for (size_t i = 1; i < hull.size(); ++i) {
      if (x <= x_of(i)) {
        const Rat f = (x - x_of(i - 1)) / (x_of(i) - x_of(i - 1));
        return y_of(i - 1) + f * (y_of(i) - y_of(i - 1));
      }
    }
    return y_of(hull.size() - 1);
  };

  std::vector<GapEntry> out;
  for (size_t i = 0; i < pts.size(); ++i) {
    GapEntry e;
    e.q = q_min + static_cast<int>(i);
    const Rat& ach = pts[i].second;
    const Rat& lb = bounds[i];
    if (ach == 0) {
      e.ratio = 0;
      e.defined = true;
    } else if (lb > 0) {
      e.ratio = ach / lb;
      e.defined = true;
    }
    const Rat env = envelope_at(pts[i].first);
    if (env == 0) {
      e.envelope_ratio = 0;
      e.envelope_defined = true;
    } else if (lb > 0) {
      e.envelope_ratio = env / lb;
      e.envelope_defined = true;
    }
    out.push_back(std::move(e));
  }
  return out;
}

Rat max_gap(const std::vector<GapEntry>& report) {
  Rat best = 0;
  for (const auto& e : report)
    if (e.defined && e.ratio > best) best = e.ratio;
  return best;
}

Rat max_envelope_gap(const std::vector<GapEntry>& report) {
  Rat best = 0;
  for (const auto& e : report)
    if (e.envelope_defined && e.envelope_ratio > best) best = e.envelope_ratio;
  return best;
}

EndpointGap endpoint_gap(int K, const Rat& mu) {
  if (K < 1) throw ValidationError("K must be at least 1");
  const Rat muk = mu * K;
  if (boost::multiprecision::denominator(muk) != 1)
    throw ValidationError("endpoint gap bound needs mu K to be an integer");
  const Rat ach = achievable_load(K, K, mu, 1);
  EndpointGap gap;
  if (ach == 0) {
    gap.ratio = 0;
    gap.within_bound = true;
    return gap;
  }
  const Rat lb = lower_bound_load(K, K, mu, 1);
  if (lb == 0) throw InternalCheckFailure("positive load above a zero lower bound");
  gap.ratio = ach / lb;
  // ratio < 3 + sqrt(5), decided without floating point
  if (gap.ratio <= 3) {
    gap.within_bound = true;
  } else {
    const Rat excess = gap.ratio - 3;
    gap.within_bound = excess * excess < 5;
  }
  return gap;
}

}  // namespace codedmm
