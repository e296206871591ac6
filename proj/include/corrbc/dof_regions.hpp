#pragma once

#include "channel.hpp"
#include "hull.hpp"
#include "rational.hpp"

#include <map>
#include <string>
#include <vector>

namespace corrbc {

inline Q nstar(int N, int r) { return Q(std::min(N, r)); }

inline Q single_user_dof(int N, int r, int T, bool csir) {
  require(N >= 0 && r >= 0, errc::invalid_input, "negative dimension");
  const Q n = nstar(N, r);
  if (csir) return n;
  require(T >= 2 * std::max(N, r), errc::invalid_input, "T must be at least 2 max(N, r)");
  return n * (Q(1) - n / T);
}

// ---------------------------------------------------------------- two users, CSIR

inline std::vector<QPoint> two_user_csir_points(int N1, int N2, int r1, int r2, int r0) {
  require(r0 >= 0 && r0 <= std::min(r1, r2), errc::invalid_input, "r0 exceeds min(r1, r2)");
  const Q n1 = nstar(N1, r1), n2 = nstar(N2, r2);
  std::vector<QPoint> pts{{n1, 0}, {0, n2}, {pos(n1 - r0), n2}, {n1, pos(n2 - r0)}};
  if (N1 <= r1 && N2 <= r2) {
    const Q extra = qmin(pos(Q(N1 - r1 + r0)), pos(Q(N2 - r2 + r0)));
    const Q a = Q(std::min(N1, r1 - r0)), b = Q(std::min(N2, r2 - r0));
    pts.push_back({a + extra, b});
    pts.push_back({a, b + extra});
  }
  return pts;
}

// Nested eigenspaces (span U2 inside span U1).
inline std::vector<QPoint> nested_csir_points(int N1, int N2, int r1, int r2) {
  require(r2 <= r1, errc::invalid_structure, "nested case needs r2 <= r1");
  const Q n1 = nstar(N1, r1), n2 = nstar(N2, r2);
  std::vector<QPoint> pts{{n1, 0}, {0, n2}, {pos(n1 - r2), n2}};
  if (r1 >= N1 && N1 >= r1 - r2) pts.push_back({Q(r1 - r2), qmin(Q(N1 - r1 + r2), n2)});
  return pts;
}

struct OuterBound {
  Q d1_max, d2_max, sum_max;
  bool tight = false;

  bool satisfied(const QPoint& p) const {
    return p.x >= Q(0) && p.y >= Q(0) && p.x <= d1_max && p.y <= d2_max && p.x + p.y <= sum_max;
  }
  std::vector<QPoint> vertices() const {
    std::vector<QPoint> v{{0, 0}, {d1_max, 0}, {0, d2_max}};
    v.push_back({d1_max, qmin(d2_max, pos(sum_max - d1_max))});
    v.push_back({qmin(d1_max, pos(sum_max - d2_max)), d2_max});
    return convex_hull(v);
  }
};

inline OuterBound two_user_csir_outer(int N1, int N2, int r1, int r2, int r0) {
  OuterBound o;
  o.d1_max = nstar(N1, r1);
  o.d2_max = nstar(N2, r2);
  o.sum_max = Q(std::min(r1 + r2 - r0, N1 + N2));
  o.tight = (r1 <= N1 && r2 <= N2) || (N1 <= r1 - r0 && N2 <= r2 - r0);
  return o;
}

// ---------------------------------------------------------------- two users, no CSIR

struct LabeledPoint {
  QPoint p;
  std::string label;
  int s0 = -1, s1 = -1, s2 = -1;
};

// D1..D5 for one allocation.
inline std::vector<LabeledPoint> nocsir_allocation_points(int N1, int N2, int s0, int s1, int s2, int T) {
  const auto m = [](int a, int b) { return Q(std::min(a, b)); };
  const auto pp = [](int a) { return std::max(a, 0); };
  std::vector<LabeledPoint> out;
  auto add = [&](Q x, Q y, const char* l) { out.push_back({{x, y}, l, s0, s1, s2}); };
  add(m(s0, N1) * s2 / T, m(s2 + s0, N2) * (Q(1) - Q(s2 + s0, T)), "D1");
  add(m(s1 + s0, N1) * (Q(1) - Q(s1 + s0, T)), m(s0, N2) * s1 / T, "D2");
  if (s1 >= s2) {
    const Q f = Q(1) - Q(s1 + s0, T), g = Q(s1 - s2, T);
    add(m(s1 + s0, N1) * f, m(s2, N2) * g + m(s2, pp(N2 - s0)) * f, "D3");
    add(m(s1, pp(N1 - s0)) * f, m(s2, N2) * g + m(s2 + s0, N2) * f, "D4");
    add(m(s1 + s0, N1) * f, m(s2 + s0, N2) * g + m(s2, N2) * f, "D5");
  }
  if (s1 <= s2) {
    const Q f = Q(1) - Q(s2 + s0, T), g = Q(s2 - s1, T);
    add(m(s1, N1) * g + m(s1, pp(N1 - s0)) * f, m(s2 + s0, N2) * f, "D3");
    add(m(s1, N1) * g + m(s1 + s0, N1) * f, m(s2, pp(N2 - s0)) * f, "D4");
    add(m(s1 + s0, N1) * g + m(s1, N1) * f, m(s2 + s0, N2) * f, "D5");
  }
  return out;
}

inline std::vector<LabeledPoint> two_user_nocsir_points(int N1, int N2, int r1, int r2, int r0, int T) {
  require(r0 >= 0 && r0 <= std::min(r1, r2), errc::invalid_input, "r0 exceeds min(r1, r2)");
  require(T >= 2 * std::max({N1, N2, r1, r2}), errc::invalid_input, "T too small");
  std::vector<LabeledPoint> out;
  out.push_back({{single_user_dof(N1, r1, T, false), 0}, "single1"});
  out.push_back({{0, single_user_dof(N2, r2, T, false)}, "single2"});
  for (int s0 = 0; s0 <= r0; ++s0)
    for (int s1 = 0; s1 <= r1 - r0; ++s1)
      for (int s2 = 0; s2 <= r2 - r0; ++s2) {
        if (s0 + std::max(s1, s2) > T) continue;
        auto v = nocsir_allocation_points(N1, N2, s0, s1, s2, T);
        out.insert(out.end(), v.begin(), v.end());
      }
  return out;
}

inline QRegion hull_of(const std::vector<LabeledPoint>& pts) {
  std::vector<QPoint> v;
  v.reserve(pts.size());
  for (const auto& p : pts) v.push_back(p.p);
  return QRegion::from_points(v);
}

inline QRegion tdma_dof_region(int N1, int N2, int r1, int r2, int T, bool csir) {
  return QRegion::from_points({{single_user_dof(N1, r1, T, csir), 0}, {0, single_user_dof(N2, r2, T, csir)}});
}

// Product superposition with span U2 inside span U1.
inline QPoint nested_superposition_point(int N1, int N2, int r1, int r2, int T) {
  require(r2 <= r1, errc::invalid_structure, "nested case needs r2 <= r1");
  require(T > r1, errc::invalid_input, "T must exceed r1");
  return {nstar(N1, r1) * (Q(1) - Q(r1, T)), nstar(N2, r2) * Q(r1 - r2, T)};
}

// ---------------------------------------------------------------- K users

using DofTuple = std::vector<Q>;

// tau[J][k] is user k's time share of the stream in V_J.
inline DofTuple kuser_csir_tuple(const OverlapStructure& s, const std::vector<int>& N,
                                 const std::map<SubsetMask, int>& d,
                                 const std::map<SubsetMask, std::vector<Q>>& tau) {
  validate(s);
  require(static_cast<int>(N.size()) == s.K, errc::invalid_input, "N must have length K");
  for (const auto& [J, dj] : d) {
    require(dj >= 0, errc::feasibility, "d_J must be nonnegative");
    require(dj <= s.r_of(J), errc::feasibility, "d_J exceeds r_J for J=" + std::to_string(J));
  }
  for (int k = 0; k < s.K; ++k) {
    int sum = 0;
    for (const auto& [J, dj] : d)
      if (contains_user(J, k)) sum += dj;
    require(sum <= std::min(s.rank(k), N[k]), errc::feasibility,
            "sum of d_J exceeds min(r_k, N_k) for user " + std::to_string(k + 1));
  }
  DofTuple out(s.K, Q(0));
  for (const auto& [J, dj] : d) {
    if (dj == 0) continue;
    auto it = tau.find(J);
    require(it != tau.end() && static_cast<int>(it->second.size()) == s.K, errc::feasibility,
            "missing time-sharing row for J=" + std::to_string(J));
    Q total(0);
    for (int k = 0; k < s.K; ++k) {
      const Q t = it->second[k];
      require(t >= Q(0), errc::feasibility, "negative time share");
      require(t == Q(0) || contains_user(J, k), errc::feasibility, "time share outside J");
      total += t;
      out[k] += t * dj;
    }
    require(total == Q(1), errc::feasibility, "time shares of J=" + std::to_string(J) + " do not sum to 1");
  }
  return out;
}

// Nested eigenvectors, r descending (user 1 largest).
inline DofTuple nested_ps_tuple(const std::vector<int>& r, const std::vector<int>& N, int T) {
  require(!r.empty() && r.size() == N.size(), errc::invalid_input, "r and N must have equal nonzero length");
  for (std::size_t k = 1; k < r.size(); ++k)
    require(r[k] <= r[k - 1], errc::invalid_structure, "ranks must be non-increasing");
  require(T > r[0], errc::invalid_input, "T must exceed r_1");
  DofTuple d(r.size());
  d[0] = nstar(N[0], r[0]) * (Q(1) - Q(r[0], T));
  for (std::size_t k = 1; k < r.size(); ++k) d[k] = nstar(N[k], r[k]) * Q(r[k - 1] - r[k], T);
  return d;
}

inline void require_ascending_ranks(const OverlapStructure& s) {
  for (int k = 1; k < s.K; ++k)
    require(s.rank(k) >= s.rank(k - 1), errc::invalid_structure, "user ranks must be non-decreasing");
}

// Three-user hybrid construction (user 3 largest).
inline DofTuple asym_hybrid_tuple(const OverlapStructure& s, int T) {
  validate(s);
  require(s.K == 3, errc::invalid_structure, "the construction is defined for three users");
  require_ascending_ranks(s);
  const int r1 = s.rank(0), r2 = s.rank(1), r3 = s.rank(2);
  auto R = [&](SubsetMask J) { return Q(s.r_of(J)); };
  constexpr SubsetMask u1 = 1, u2 = 2, u3 = 4;
  DofTuple d(3);
  d[2] = Q(r3) * (Q(1) - Q(r3, T));
  d[1] = (R(u1 | u2 | u3) + R(u2 | u3)) * Q(r3 - r2, T) + (R(u1 | u2) + R(u2)) * (Q(1) - Q(r2, T));
  d[0] = R(u1 | u3) * Q(r3 - r1, T) + R(u1 | u2) * Q(r2 - r1, T) + R(u1) * (Q(1) - Q(r1, T));
  return d;
}

struct FlaggedTuple {
  DofTuple d;
  bool as_printed = true;
};

// General-K closed form evaluated literally; disagrees with the construction on asymmetric inputs.
inline FlaggedTuple asym_hybrid_printed(const OverlapStructure& s, int T) {
  validate(s);
  require_ascending_ranks(s);
  FlaggedTuple out{DofTuple(s.K, Q(0)), true};
  for (int k = 0; k < s.K; ++k) {
    const int rk = s.rank(k);
    const SubsetMask upto = (1u << (k + 1)) - 1;
    const SubsetMask later = ((1u << s.K) - 1) & ~upto;
    for (const auto& [J, r] : s.r_J) {
      if (!contains_user(J, k)) continue;
      if ((J & ~upto) == 0) out.d[k] += Q(r) * (Q(1) - Q(rk, T));
      if (popcount(J & later) < 2)
        for (int l = k + 1; l < s.K; ++l) out.d[k] += Q(r) * Q(s.rank(l) - rk, T);
    }
  }
  return out;
}

}  // namespace corrbc
