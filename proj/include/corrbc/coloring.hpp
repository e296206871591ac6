#pragma once

#include "channel.hpp"
#include "rational.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace corrbc {

// k-subsets of [K] in lexicographic order of their sorted element lists.
inline std::vector<SubsetMask> k_subsets(int K, int k) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<SubsetMask> out;
  if (k < 0 || k > K) return out;
  while (true) {
    SubsetMask m = 0;
    for (int i : idx) m |= 1u << i;
    out.push_back(m);
    int i = k - 1;
    while (i >= 0 && idx[i] == K - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

inline std::string subset_label(SubsetMask J) {
  std::string s = "{";
  bool first = true;
  for (int k = 0; k < 32; ++k)
    if (contains_user(J, k)) {
      if (!first) s += ",";
      s += std::to_string(k + 1);
      first = false;
    }
  return s + "}";
}

struct InterferenceGraph {
  int K = 0, k = 0;
  std::vector<SubsetMask> vertices;

  std::size_t size() const { return vertices.size(); }
  bool adjacent(std::size_t a, std::size_t b) const { return a != b && (vertices[a] & vertices[b]) != 0; }
  int degree(std::size_t a) const {
    int d = 0;
    for (std::size_t b = 0; b < size(); ++b) d += adjacent(a, b);
    return d;
  }
};

inline long long degree_formula(int K, int k) { return binom(K, k) - binom(K - k, k) - 1; }

inline InterferenceGraph interference_graph(int K, int k) {
  require(K >= 1 && K <= 16 && k >= 1 && k <= K, errc::invalid_input, "need 1 <= k <= K <= 16");
  InterferenceGraph g{K, k, k_subsets(K, k)};
  return g;
}

// Deterministic greedy: degree descending, ties in lexicographic subset order.
inline std::vector<int> greedy_coloring(const InterferenceGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> deg(n);
  for (std::size_t i = 0; i < n; ++i) deg[i] = g.degree(i);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return deg[a] > deg[b]; });
  std::vector<int> color(n, -1);
  for (std::size_t v : order) {
    std::vector<char> used(n + 1, 0);
    for (std::size_t u = 0; u < n; ++u)
      if (color[u] >= 0 && g.adjacent(u, v)) used[color[u]] = 1;
    int c = 0;
    while (used[c]) ++c;
    color[v] = c;
  }
  return color;
}

namespace detail {

using Bits = std::uint32_t;

inline int max_independent(const std::vector<Bits>& adj, Bits cand) {
  if (!cand) return 0;
  const int v = __builtin_ctz(cand);
  const Bits rest = cand & ~(1u << v);
  const int with = 1 + max_independent(adj, rest & ~adj[v]);
  if (!(adj[v] & cand)) return with;
  return std::max(with, max_independent(adj, rest));
}

struct ColorSearch {
  const std::vector<Bits>& adj;
  int n, limit;
  std::vector<int> color;
  std::vector<int> best;

  bool run(int colored, int used) {
    if (colored == n) {
      best = color;
      return true;
    }
    // DSATUR pick
    int pick = -1, sat_best = -1, deg_best = -1;
    for (int v = 0; v < n; ++v) {
      if (color[v] >= 0) continue;
      unsigned seen = 0;
      for (int u = 0; u < n; ++u)
        if (color[u] >= 0 && (adj[v] >> u & 1u)) seen |= 1u << color[u];
      const int sat = __builtin_popcount(seen);
      const int deg = __builtin_popcount(adj[v]);
      if (sat > sat_best || (sat == sat_best && deg > deg_best)) pick = v, sat_best = sat, deg_best = deg;
    }
    for (int c = 0; c < std::min(used + 1, limit); ++c) {
      bool ok = true;
      for (int u = 0; u < n && ok; ++u)
        if (color[u] == c && (adj[pick] >> u & 1u)) ok = false;
      if (!ok) continue;
      color[pick] = c;
      if (run(colored + 1, std::max(used, c + 1))) return true;
      color[pick] = -1;
    }
    return false;
  }
};

}  // namespace detail

enum class ChromaticMode { exact, bound };

inline int degree_bound(int K, int k) {
  if (k == 1) return 1;
  if (k > K / 2) return static_cast<int>(binom(K, k));
  return static_cast<int>(degree_formula(K, k));
}

inline std::vector<int> exact_coloring(const InterferenceGraph& g) {
  const int n = static_cast<int>(g.size());
  require(n <= 30, errc::size, "exact coloring is limited to 30 vertices");
  if (n == 0) return {};
  std::vector<detail::Bits> adj(n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (g.adjacent(a, b)) adj[a] |= 1u << b;
  std::vector<int> best = greedy_coloring(g);
  int ub = *std::max_element(best.begin(), best.end()) + 1;
  const int alpha = detail::max_independent(adj, n == 32 ? ~0u : ((1u << n) - 1));
  const int lb = (n + alpha - 1) / alpha;
  while (ub > lb) {
    detail::ColorSearch s{adj, n, ub - 1, std::vector<int>(n, -1), {}};
    if (!s.run(0, 0)) break;
    best = s.best;
    ub = *std::max_element(best.begin(), best.end()) + 1;
  }
  return best;
}

inline int chromatic_number(const InterferenceGraph& g, ChromaticMode mode = ChromaticMode::exact) {
  if (mode == ChromaticMode::bound) return degree_bound(g.K, g.k);
  const auto c = exact_coloring(g);
  return c.empty() ? 0 : *std::max_element(c.begin(), c.end()) + 1;
}

enum class TrainingMode { exact, bound, degree_count };

inline int chromatic_for(int K, int k, TrainingMode mode) {
  switch (mode) {
    case TrainingMode::exact: {
      const auto g = interference_graph(K, k);
      if (g.size() > 30) {
        const auto c = greedy_coloring(g);
        return *std::max_element(c.begin(), c.end()) + 1;
      }
      return chromatic_number(g);
    }
    case TrainingMode::bound: return degree_bound(K, k);
    case TrainingMode::degree_count:
      return static_cast<int>(binom(K, k) - binom(K - k, k) - ((k > 1 && k <= K / 2) ? 1 : 0));
  }
  return 0;
}

inline long long training_time(int K, int L, const std::vector<int>& p, TrainingMode mode = TrainingMode::exact) {
  require(static_cast<int>(p.size()) == K, errc::invalid_input, "p must have length K");
  require(L >= 0 && L < K, errc::invalid_input, "L must be in [0, K-1]");
  long long t = 0;
  for (int k = 1; k <= K - L; ++k)
    if (p[k - 1] > 0) t += static_cast<long long>(chromatic_for(K, k, mode)) * p[k - 1];
  return t;
}

// ---------------------------------------------------------------- schedules

struct Phase {
  int duration = 0;
  std::vector<SubsetMask> pilot, data;
};

struct PilotSchedule {
  int K = 0, L = 0, T = 0;
  std::vector<int> p;
  std::vector<SubsetMask> active;  ///< subspaces in use
  std::vector<Phase> phases;

  int dims(SubsetMask J) const { return p[popcount(J) - 1]; }
  int total_duration() const {
    int s = 0;
    for (const auto& ph : phases) s += ph.duration;
    return s;
  }
};

enum class ColoringChoice { exact, greedy };

// Independent check of the schedule invariants; throws on violation.
inline void validate(const PilotSchedule& s) {
  require(s.total_duration() <= s.T, errc::schedule, "schedule exceeds the coherence block");
  std::vector<SubsetMask> trained;
  auto is_trained = [&](SubsetMask J) { return std::find(trained.begin(), trained.end(), J) != trained.end(); };
  for (const auto& ph : s.phases) {
    require(ph.duration >= 0, errc::schedule, "negative phase duration");
    for (std::size_t a = 0; a < ph.pilot.size(); ++a)
      for (std::size_t b = a + 1; b < ph.pilot.size(); ++b)
        require((ph.pilot[a] & ph.pilot[b]) == 0, errc::schedule,
                "interfering pilots " + subset_label(ph.pilot[a]) + " and " + subset_label(ph.pilot[b]));
    for (SubsetMask J : ph.data) {
      for (SubsetMask P : ph.pilot)
        require((J & P) == 0, errc::schedule, "data in " + subset_label(J) + " collides with pilot " + subset_label(P));
      require(is_trained(J), errc::schedule, "data in untrained subspace " + subset_label(J));
    }
    trained.insert(trained.end(), ph.pilot.begin(), ph.pilot.end());
  }
  for (SubsetMask J : s.active) require(is_trained(J), errc::schedule, "subspace never trained " + subset_label(J));
}

inline PilotSchedule build_schedule(int K, int L, const std::vector<int>& p, int T,
                                    ColoringChoice coloring = ColoringChoice::exact) {
  require(K >= 1 && K <= 16, errc::invalid_input, "K out of range");
  require(static_cast<int>(p.size()) == K, errc::invalid_input, "p must have length K");
  require(L >= 0 && L < K, errc::invalid_input, "L must be in [0, K-1]");
  for (int v : p) require(v >= 0, errc::invalid_input, "negative p_k");
  PilotSchedule s{K, L, T, p, {}, {}};
  for (int k = 1; k <= K - L; ++k)
    if (p[k - 1] > 0)
      for (SubsetMask J : k_subsets(K, k)) s.active.push_back(J);

  std::vector<SubsetMask> trained;
  for (int k = 1; k <= K - L; ++k) {
    if (p[k - 1] == 0) continue;
    const auto g = interference_graph(K, k);
    const auto color =
        (coloring == ColoringChoice::exact && g.size() <= 30) ? exact_coloring(g) : greedy_coloring(g);
    const int nc = *std::max_element(color.begin(), color.end()) + 1;
    for (int c = 0; c < nc; ++c) {
      Phase ph;
      ph.duration = p[k - 1];
      for (std::size_t v = 0; v < g.size(); ++v)
        if (color[v] == c) ph.pilot.push_back(g.vertices[v]);
      if (k > K / 2) {
        SubsetMask pilots = 0;
        for (SubsetMask P : ph.pilot) pilots |= P;
        for (SubsetMask J : trained)
          if ((J & pilots) == 0) ph.data.push_back(J);
      }
      s.phases.push_back(ph);
    }
    for (SubsetMask J : k_subsets(K, k)) trained.push_back(J);
  }
  const int tt = s.total_duration();
  require(tt <= T, errc::schedule, "T is smaller than the training time " + std::to_string(tt));
  if (T > tt) s.phases.push_back({T - tt, {}, s.active});
  validate(s);
  return s;
}

// DoF per user; order[i] is the user with priority i (identity by default). A user owns every
// subspace containing it and no higher-priority user.
inline std::vector<Q> schedule_dof(const PilotSchedule& s, const std::vector<int>& N,
                                   std::vector<int> order = {}) {
  validate(s);
  require(static_cast<int>(N.size()) == s.K, errc::invalid_input, "N must have length K");
  if (order.empty()) {
    order.resize(s.K);
    std::iota(order.begin(), order.end(), 0);
  }
  std::vector<SubsetMask> owner_mask(s.K);
  SubsetMask before = 0;
  for (int i = 0; i < s.K; ++i) {
    owner_mask[order[i]] = before;
    before |= 1u << order[i];
  }
  std::vector<Q> d(s.K, Q(0));
  for (const auto& ph : s.phases) {
    if (ph.duration == 0) continue;
    for (int k = 0; k < s.K; ++k) {
      int dims = 0;
      for (SubsetMask J : ph.data)
        if (contains_user(J, k) && (J & owner_mask[k]) == 0) dims += s.dims(J);
      d[k] += Q(std::min(dims, N[k]) * ph.duration, s.T);
    }
  }
  return d;
}

inline std::vector<Q> schedule_dof(int K, int L, const std::vector<int>& p, int T, const std::vector<int>& N) {
  return schedule_dof(build_schedule(K, L, p, T), N);
}

// Subspace x phase table, one row per active subspace.
inline std::string schedule_csv(const PilotSchedule& s) {
  std::ostringstream os;
  os << "subspace,dims";
  for (std::size_t i = 0; i < s.phases.size(); ++i) os << ",phase" << i + 1 << "(" << s.phases[i].duration << ")";
  os << "\n";
  for (SubsetMask J : s.active) {
    os << '"' << subset_label(J) << '"' << ',' << s.dims(J);
    for (const auto& ph : s.phases) {
      const char* cell = "";
      if (std::find(ph.pilot.begin(), ph.pilot.end(), J) != ph.pilot.end()) cell = "pilot";
      else if (std::find(ph.data.begin(), ph.data.end(), J) != ph.data.end()) cell = "data";
      os << ',' << cell;
    }
    os << "\n";
  }
  return os.str();
}

inline std::vector<int> reduce_symmetric(int K, int k, const std::vector<int>& p) {
  require(static_cast<int>(p.size()) == K && k >= 1 && k <= K, errc::invalid_input, "need k <= K = |p|");
  std::vector<int> out(k, 0);
  for (int l = 1; l <= k; ++l)
    for (int i = 0; i <= K - k; ++i) out[l - 1] += static_cast<int>(binom(K - k, i)) * p[l + i - 1];
  return out;
}

// Explicit three-user tuples.
inline std::vector<Q> d30_closed(int p1, int p2, int p3, int T) {
  const Q f = Q(1) - Q(p1 + 3 * p2 + p3, T), x = Q(p1 * p2, T);
  return {Q(p1 + 2 * p2 + p3) * f + x, Q(p1 + p2) * f + x, Q(p1) * f + x};
}

inline std::vector<Q> d31_closed(int p1, int p2, int T) {
  const Q f = Q(1) - Q(p1 + 3 * p2, T), x = Q(p1 * p2, T);
  return {Q(p1 + 2 * p2) * f + x, Q(p1 + p2) * f + x, Q(p1) * f + x};
}

// As printed; disagrees with the schedule accounting.
inline std::vector<Q> printed_d32(int p1, int p2, int p3, int T) {
  return {Q(p1) * (Q(1) - Q(p1, T)), Q(p2) * (Q(1) - Q(p2, T)), Q(p3) * (Q(1) - Q(p3, T))};
}

// General-K symmetric tuple evaluated literally as printed (flagged; not used for acceptance).
inline std::vector<Q> eq45_as_printed(int K, int L, const std::vector<int>& p, int T, const std::vector<int>& N,
                                      TrainingMode mode = TrainingMode::exact) {
  const long long tt = training_time(K, L, p, mode);
  std::vector<Q> d(K, Q(0));
  for (int k = 1; k <= K; ++k) {
    for (int i = 1; i <= K - std::max(k - 1, L); ++i) {
      Q extra(0);
      for (int j = K / 2 + 1; j <= K - i; ++j) extra += Q(binom(K - i, k) * p[j - 1]);
      const long long coef = std::min<long long>(binom(K - i, i - 1) * p[i - 1], N[k - 1]);
      d[k - 1] += Q(coef) * (Q(T - tt) + extra) / T;
    }
  }
  return d;
}

}  // namespace corrbc
