#pragma once

#include "bc2_rates.hpp"
#include "coloring.hpp"
#include "dof_regions.hpp"
#include "hull.hpp"
#include "mmimo.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace corrbc {

using json = nlohmann::ordered_json;

struct ExperimentSpec {
  std::string name;
  std::string figure;
  std::string operation;
  json params = json::object();
  std::vector<std::string> axes;
  std::int64_t trials = 0;  ///< 0 for exact experiments
  std::uint64_t seed = 1;
  double est_seconds = 0.0;  ///< CPU seconds at the registered trial count, one thread
  std::string output;        ///< file stem; defaults to name
};

inline json to_json(const ExperimentSpec& s) {
  return json{{"name", s.name},     {"figure", s.figure}, {"operation", s.operation},
              {"params", s.params}, {"axes", s.axes},     {"trials", s.trials},
              {"seed", s.seed},     {"est_seconds", s.est_seconds}, {"output", s.output}};
}

inline json q_json(const Q& q) { return json{{"num", q.numerator()}, {"den", q.denominator()}}; }

inline Q json_q(const json& j) { return Q(j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>()); }

// Shortest round-trip decimal, independent of the C locale.
inline std::string fmt_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

struct DataRow {
  std::vector<std::string> axes;
  std::string quantity;
  double value = 0.0;
  double ci = 0.0;
};

struct Dataset {
  std::vector<DataRow> rows;
  json extra = json::object();  ///< exact vertices, facets, point metadata
};

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string to_csv(const ExperimentSpec& spec, const Dataset& d) {
  std::ostringstream os;
  for (const auto& a : spec.axes) os << csv_field(a) << ',';
  os << "quantity,value,ci,seed,trials\n";
  for (const auto& r : d.rows) {
    for (std::size_t i = 0; i < spec.axes.size(); ++i) os << csv_field(i < r.axes.size() ? r.axes[i] : "") << ',';
    os << csv_field(r.quantity) << ',' << fmt_double(r.value) << ',' << fmt_double(r.ci) << ',' << spec.seed << ','
       << spec.trials << '\n';
  }
  return os.str();
}

namespace detail {

template <class T>
T param(const json& p, const char* key) {
  require(p.contains(key), errc::invalid_config, std::string("missing parameter '") + key + "'");
  try {
    return p.at(key).get<T>();
  } catch (const json::exception&) {
    throw error(errc::invalid_config, std::string("bad type for parameter '") + key + "'");
  }
}

template <class T>
T param_or(const json& p, const char* key, T fallback) {
  return p.contains(key) ? param<T>(p, key) : fallback;
}

inline McConfig mc_of(const ExperimentSpec& s, unsigned threads) {
  require(s.trials >= 1, errc::invalid_config, "Monte Carlo experiment needs trials >= 1");
  return {s.seed, s.trials, 0.95, threads};
}

inline double db(double x) { return std::pow(10.0, x / 10.0); }

inline std::string istr(long long v) { return std::to_string(v); }

inline json qpoints_json(const std::vector<QPoint>& v) {
  json a = json::array();
  for (const auto& p : v) a.push_back(json::array({q_json(p.x), q_json(p.y)}));
  return a;
}

inline void push_vertices(Dataset& d, const std::vector<std::string>& prefix, const std::vector<QPoint>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto ax = prefix;
    ax.push_back(istr(static_cast<long long>(i)));
    d.rows.push_back({ax, "d1", to_double(v[i].x), 0.0});
    d.rows.push_back({ax, "d2", to_double(v[i].y), 0.0});
  }
}

// ---------------------------------------------------------------- operations

using Operation = std::function<Dataset(const ExperimentSpec&, bool dry, unsigned threads)>;

inline Dataset op_two_user_csir(const ExperimentSpec& s, bool dry, unsigned) {
  const json& p = s.params;
  const int N1 = param<int>(p, "N1"), N2 = param<int>(p, "N2"), r1 = param<int>(p, "r1"), r2 = param<int>(p, "r2");
  const auto r0s = param<std::vector<int>>(p, "r0");
  for (int r0 : r0s) two_user_csir_outer(N1, N2, r1, r2, r0);
  Dataset d;
  if (dry) return d;
  for (int r0 : r0s) {
    const QRegion ach = QRegion::from_points(two_user_csir_points(N1, N2, r1, r2, r0));
    const auto outer = two_user_csir_outer(N1, N2, r1, r2, r0).vertices();
    push_vertices(d, {istr(r0), "achievable"}, ach.hull);
    push_vertices(d, {istr(r0), "outer"}, QRegion::from_points(outer).hull);
    d.extra["regions"].push_back({{"r0", r0},
                                  {"achievable", qpoints_json(ach.hull)},
                                  {"outer", qpoints_json(QRegion::from_points(outer).hull)},
                                  {"equal", same_vertex_set(ach.hull, QRegion::from_points(outer).hull)}});
  }
  return d;
}

inline Dataset op_two_user_nocsir(const ExperimentSpec& s, bool dry, unsigned) {
  const json& p = s.params;
  const int T = param<int>(p, "T"), N1 = param<int>(p, "N1"), N2 = param<int>(p, "N2");
  const int r1 = param<int>(p, "r1"), r2 = param<int>(p, "r2");
  const auto r0s = param<std::vector<int>>(p, "r0");
  for (int r0 : r0s) {
    require(r0 >= 0 && r0 <= std::min(r1, r2), errc::invalid_structure, "r0 exceeds min(r1, r2)");
    require(T >= 2 * std::max({r1, r2, N1, N2}), errc::invalid_config, "T must be at least 2 max(r_k, N_k)");
  }
  Dataset d;
  if (dry) return d;
  const QRegion tdma = tdma_dof_region(N1, N2, r1, r2, T, false);
  push_vertices(d, {"", "tdma"}, tdma.hull);
  d.extra["tdma"] = qpoints_json(tdma.hull);
  for (int r0 : r0s) {
    const auto pts = two_user_nocsir_points(N1, N2, r1, r2, r0, T);
    const QRegion h = hull_of(pts);
    push_vertices(d, {istr(r0), "nocsir"}, h.hull);
    json labeled = json::array();
    for (const auto& lp : pts)
      labeled.push_back({{"label", lp.label},
                         {"s", {lp.s0, lp.s1, lp.s2}},
                         {"d", json::array({q_json(lp.p.x), q_json(lp.p.y)})}});
    d.extra["regions"].push_back(
        {{"r0", r0}, {"hull", qpoints_json(h.hull)}, {"contains_tdma", h.contains(tdma)}, {"points", labeled}});
  }
  return d;
}

// Every embedding of a k-user tuple into K positions, the rest zero.
inline std::vector<Q3> embeddings3(const std::vector<Q>& t) {
  std::vector<int> pos{0, 1, 2};
  std::set<std::array<std::pair<std::int64_t, std::int64_t>, 3>> seen;
  std::vector<Q3> out;
  do {
    Q3 x{Q(0), Q(0), Q(0)};
    for (std::size_t i = 0; i < t.size(); ++i) x[pos[i]] = t[i];
    std::array<std::pair<std::int64_t, std::int64_t>, 3> key;
    for (int i = 0; i < 3; ++i) key[i] = {x[i].numerator(), x[i].denominator()};
    if (seen.insert(key).second) out.push_back(x);
  } while (std::next_permutation(pos.begin(), pos.end()));
  return out;
}

inline Dataset op_sym3(const ExperimentSpec& s, bool dry, unsigned) {
  const json& p = s.params;
  const auto pv = param<std::vector<int>>(p, "p");
  const int T = param<int>(p, "T");
  const int N = param_or<int>(p, "N", 1 << 20);
  require(pv.size() == 3, errc::invalid_input, "p must have three entries");
  struct Src {
    int k, L;
    std::vector<Q> d;
  };
  std::vector<Src> src;
  for (int k = 1; k <= 3; ++k)
    for (int L = 0; L < k; ++L) {
      const auto pk = reduce_symmetric(3, k, pv);
      const auto sched = build_schedule(k, L, pk, T);
      src.push_back({k, L, dry ? std::vector<Q>{} : schedule_dof(sched, std::vector<int>(k, N))});
    }
  Dataset d;
  if (dry) return d;
  std::vector<Q3> cloud{{Q(0), Q(0), Q(0)}};
  std::vector<std::string> label{"origin"};
  for (const auto& sr : src)
    for (const auto& x : embeddings3(sr.d)) {
      cloud.push_back(x);
      label.push_back("D_" + istr(sr.k) + "," + istr(sr.L));
    }
  json pts = json::array();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::vector<std::string> ax{"point", istr(static_cast<long long>(i)), label[i]};
    for (int c = 0; c < 3; ++c) d.rows.push_back({ax, "d" + istr(c + 1), to_double(cloud[i][c]), 0.0});
    pts.push_back({{"label", label[i]}, {"d", {q_json(cloud[i][0]), q_json(cloud[i][1]), q_json(cloud[i][2])}}});
  }
  json fac = json::array();
  const auto facets = hull3_facets(cloud);
  for (std::size_t f = 0; f < facets.size(); ++f) {
    const auto& F = facets[f];
    const std::vector<std::string> ax{"facet", istr(static_cast<long long>(f)), ""};
    for (int c = 0; c < 3; ++c) d.rows.push_back({ax, "n" + istr(c + 1), to_double(F.normal[c]), 0.0});
    d.rows.push_back({ax, "offset", to_double(F.offset), 0.0});
    fac.push_back({{"normal", {q_json(F.normal[0]), q_json(F.normal[1]), q_json(F.normal[2])}},
                   {"offset", q_json(F.offset)},
                   {"vertices", F.on}});
  }
  json tuples = json::array();
  for (const auto& sr : src) {
    json t = json::array();
    for (const auto& q : sr.d) t.push_back(q_json(q));
    tuples.push_back({{"k", sr.k}, {"L", sr.L}, {"d", t}});
  }
  d.extra = {{"tuples", tuples}, {"points", pts}, {"facets", fac}};
  return d;
}

inline SweepGrid grid_of(const json& g) {
  SweepGrid out;
  if (g.contains("dims"))
    for (const auto& t : g.at("dims")) {
      require(t.is_array() && t.size() == 3, errc::invalid_config, "dims entries are [s0, s1, s2]");
      out.dims.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
    }
  out.a = param_or(g, "a", out.a);
  out.b = param_or(g, "b", out.b);
  out.c = param_or(g, "c", out.c);
  out.swap_roles = param_or(g, "swap_roles", false);
  return out;
}

inline Scheme scheme_of(const std::string& n) {
  if (n == "rate_splitting") return Scheme::rate_splitting;
  if (n == "product_superposition") return Scheme::product_superposition;
  if (n == "hybrid") return Scheme::hybrid;
  throw error(errc::invalid_config, "unknown scheme '" + n + "'");
}

inline BroadcastConfig bc2_config(const json& p) {
  const int M = param<int>(p, "M"), T = param<int>(p, "T");
  const auto [u1, u2] = make_two_user_overlap(M, param<int>(p, "r1"), param<int>(p, "r2"), param<int>(p, "r0"),
                                              param<int>(p, "N1"), param<int>(p, "N2"), param_or(p, "trace", 0.0));
  return {M, T, db(param<double>(p, "snr_db")), {u1, u2}};
}

inline Dataset op_bc2_regions(const ExperimentSpec& s, bool dry, unsigned threads) {
  const BroadcastConfig cfg = bc2_config(s.params);
  const json schemes = param<json>(s.params, "schemes");
  std::vector<std::pair<Scheme, SweepGrid>> runs;
  for (const auto& [name, g] : schemes.items()) runs.push_back({scheme_of(name), grid_of(g)});
  const McConfig mc = mc_of(s, threads);
  Dataset d;
  if (dry) return d;
  const TdmaResult td = tdma_region(cfg, mc);
  const std::vector<std::string> blank(7, "");
  auto ax = [&](const std::string& scheme, const std::string& kind, std::size_t i) {
    std::vector<std::string> a{scheme, kind, istr(static_cast<long long>(i))};
    a.insert(a.end(), blank.begin(), blank.end());
    return a;
  };
  d.rows.push_back({ax("tdma", "corner", 0), "R1", td.R1.mean, td.R1.ci});
  d.rows.push_back({ax("tdma", "corner", 1), "R2", td.R2.mean, td.R2.ci});
  d.extra["tdma"] = {{"R1", td.R1.mean}, {"R2", td.R2.mean}, {"equal_rate", td.region.equal_rate()}};
  for (std::size_t r = 0; r < runs.size(); ++r) {
    McConfig m = mc;
    m.master_seed = mix64(mc.master_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(runs[r].first) + 1));
    const SweepResult res = region_sweep(cfg, runs[r].first, runs[r].second, m, &td);
    const std::string nm = scheme_name(runs[r].first);
    for (std::size_t i = 0; i < res.points.size(); ++i) {
      const auto& pt = res.points[i];
      std::vector<std::string> a{nm,
                                 "point",
                                 istr(static_cast<long long>(i)),
                                 istr(pt.dims.s0),
                                 istr(pt.dims.s1),
                                 istr(pt.dims.s2),
                                 fmt_double(pt.params[0]),
                                 fmt_double(pt.params[1]),
                                 fmt_double(pt.params[2]),
                                 pt.swapped ? "1" : "0"};
      d.rows.push_back({a, "R1", pt.R1.mean, pt.R1.ci});
      d.rows.push_back({a, "R2", pt.R2.mean, pt.R2.ci});
    }
    json hull = json::array();
    for (std::size_t i = 0; i < res.region.hull.size(); ++i) {
      const auto& v = res.region.hull[i];
      d.rows.push_back({ax(nm, "hull", i), "R1", v.x, 0.0});
      d.rows.push_back({ax(nm, "hull", i), "R2", v.y, 0.0});
      hull.push_back({v.x, v.y});
    }
    d.extra["schemes"][nm] = {{"hull", hull}, {"equal_rate", res.region.equal_rate()}, {"points", res.points.size()}};
  }
  return d;
}

inline FddScheme mm_builder(const json& p, double rho) {
  const std::string b = param<std::string>(p, "builder");
  const int M = param<int>(p, "M"), T = param<int>(p, "T");
  if (b == "two_user_fdd") return two_user_fdd_scheme(M, param<int>(p, "r2"), T, rho);
  if (b == "two_user_partial")
    return two_user_partial_scheme(M, param<int>(p, "r1"), param<int>(p, "r2"), param<int>(p, "r0"), T, rho);
  if (b == "sym3") return sym3_scheme(M, param<std::vector<int>>(p, "p"), T, rho);
  if (b == "onoff") return onoff_scheme(M, param<int>(p, "K"), param<int>(p, "L"), T, rho);
  throw error(errc::invalid_config, "unknown massive-MIMO builder '" + b + "'");
}

inline std::vector<MmUser> mm_users(const json& p) {
  const std::string b = param<std::string>(p, "builder");
  const int M = param<int>(p, "M");
  if (b == "two_user_fdd") return two_user_fdd_users(M, param<int>(p, "r2"));
  if (b == "two_user_partial")
    return partial_users(partial_geometry(M, param<int>(p, "r1"), param<int>(p, "r2"), param<int>(p, "r0")));
  if (b == "sym3") return sym3_users(M, param<std::vector<int>>(p, "p"), nullptr);
  return onoff_users(onoff_layout(M, param<int>(p, "K"), param<int>(p, "L")));
}

inline Dataset op_mmimo_compare(const ExperimentSpec& s, bool dry, unsigned threads) {
  const json& p = s.params;
  const auto snrs = param<std::vector<double>>(p, "snr_db");
  const std::size_t pre = param_or<std::size_t>(p, "prepass_trials", 20000);
  const int T = param<int>(p, "T");
  for (double x : snrs) mm_builder(p, db(x));
  const McConfig mc = mc_of(s, threads);
  Dataset d;
  if (dry) return d;
  for (std::size_t i = 0; i < snrs.size(); ++i) {
    const double rho = db(snrs[i]);
    McConfig m = mc;
    m.master_seed = mix64(mc.master_seed + 0x632be59bd9b4e019ULL * (i + 1));
    const FddComparison c = fdd_compare(mm_builder(p, rho), conventional_scheme(mm_users(p), T, rho), {m, pre});
    const std::string snr = fmt_double(snrs[i]);
    for (const auto* r : {&c.proposed, &c.conventional}) {
      const std::string arm = r == &c.proposed ? "proposed" : "conventional";
      for (std::size_t k = 0; k < r->R.size(); ++k)
        d.rows.push_back({{snr, arm}, "R" + istr(static_cast<long long>(k + 1)), r->R[k].mean, r->R[k].ci});
      for (std::size_t j = 0; j < r->dR.size(); ++j)
        d.rows.push_back({{snr, arm}, "dR" + istr(static_cast<long long>(j + 1)) + "_user" +
                                          istr(r->dR_user[j] + 1), r->dR[j].mean, r->dR[j].ci});
      d.rows.push_back({{snr, arm}, "sum", r->sum.mean, r->sum.ci});
    }
    d.rows.push_back({{snr, "paired"}, "difference", c.difference.mean, c.difference.ci});
  }
  return d;
}

inline const std::map<std::string, Operation>& operations() {
  static const std::map<std::string, Operation> ops{
      {"dof.two_user_csir", op_two_user_csir},
      {"dof.two_user_nocsir", op_two_user_nocsir},
      {"dof.sym3_schedule", op_sym3},
      {"bc2.regions", op_bc2_regions},
      {"mmimo.compare", op_mmimo_compare},
  };
  return ops;
}

inline json bc2_axes() { return json::array({"scheme", "kind", "index", "s0", "s1", "s2", "a", "b", "c", "swapped"}); }

}  // namespace detail

// ---------------------------------------------------------------- registry

inline const std::vector<ExperimentSpec>& registry() {
  static const std::vector<ExperimentSpec> reg = [] {
    const std::vector<std::string> bc2ax = detail::bc2_axes().get<std::vector<std::string>>();
    const json coarse_rs = {{"dims", {{0, 6, 4}, {0, 10, 4}, {3, 6, 4}, {3, 10, 4}, {6, 6, 4}, {6, 10, 4}}},
                            {"a", {0.6, 0.8}},
                            {"b", {0.0, 0.3}},
                            {"c", {0.4, 0.6}}};
    std::vector<ExperimentSpec> r;
    r.push_back({"fig2", "Fig. 2", "dof.two_user_csir",
                 {{"N1", 12}, {"N2", 12}, {"r1", 12}, {"r2", 10}, {"r0", {0, 3, 6, 9}}},
                 {"r0", "region", "vertex"}, 0, 1, 0.05, ""});
    r.push_back({"fig3a", "Fig. 3(a)", "dof.two_user_nocsir",
                 {{"T", 24}, {"N1", 12}, {"N2", 12}, {"r1", 12}, {"r2", 10}, {"r0", {0, 3, 6, 9}}},
                 {"r0", "region", "vertex"}, 0, 1, 0.05, ""});
    r.push_back({"fig3b", "Fig. 3(b)", "dof.two_user_nocsir",
                 {{"T", 24}, {"N1", 12}, {"N2", 12}, {"r1", 12}, {"r2", 12}, {"r0", {0, 3, 6, 9}}},
                 {"r0", "region", "vertex"}, 0, 1, 0.05, ""});
    r.push_back({"fig4", "Fig. 4", "dof.sym3_schedule", {{"p", {4, 2, 1}}, {"T", 24}},
                 {"set", "index", "label"}, 0, 1, 0.05, ""});
    // ambient dimension lifted to 20 so that r1 + r2 - r0 fits; trace kept at 16
    r.push_back({"fig5a", "Fig. 5(a)", "bc2.regions",
                 {{"T", 24}, {"M", 20}, {"trace", 16.0}, {"N1", 12}, {"N2", 12}, {"r1", 16}, {"r2", 10},
                  {"r0", 6}, {"snr_db", 30.0},
                  {"schemes",
                   {{"rate_splitting", coarse_rs},
                    {"product_superposition",
                     {{"dims", {{2, 0, 2}, {4, 0, 2}, {6, 0, 2}, {2, 0, 4}, {4, 0, 4}, {6, 0, 4}}},
                      {"a", {0.5, 0.8}}, {"b", {0.3, 0.7}}, {"c", {1.0}}, {"swap_roles", true}}}}}},
                 bc2ax, 20000, 1, 100.0, ""});
    r.push_back({"fig5b", "Fig. 5(b)", "bc2.regions",
                 {{"T", 32}, {"M", 16}, {"N1", 16}, {"N2", 16}, {"r1", 15}, {"r2", 8}, {"r0", 7},
                  {"snr_db", 30.0},
                  {"schemes",
                   {{"rate_splitting",
                     {{"dims", {{0, 4, 1}, {0, 8, 1}, {4, 4, 1}, {4, 8, 1}, {7, 4, 1}, {7, 8, 1}}},
                      {"a", {0.6, 0.8}}, {"b", {0.0, 0.3}}, {"c", {0.4, 0.6}}}},
                    {"product_superposition",
                     {{"dims", {{3, 0, 1}, {7, 0, 1}, {3, 0, 4}, {7, 0, 4}, {7, 0, 8}}},
                      {"a", {0.5, 0.8}}, {"b", {0.3, 0.7}}, {"c", {1.0}}, {"swap_roles", true}}}}}},
                 bc2ax, 20000, 1, 90.0, ""});
    r.push_back({"fig6", "Fig. 6", "bc2.regions",
                 {{"T", 20}, {"M", 10}, {"N1", 10}, {"N2", 10}, {"r1", 10}, {"r2", 5}, {"r0", 5},
                  {"snr_db", 30.0},
                  {"schemes",
                   {{"product_superposition",
                     {{"dims", {{1, 0, 5}, {3, 0, 5}, {5, 0, 5}, {5, 0, 3}, {5, 0, 1}}},
                      {"a", {0.3, 0.5, 0.7, 0.9}}, {"b", {0.2, 0.5, 0.8}}, {"c", {1.0}}, {"swap_roles", true}}}}}},
                 bc2ax, 20000, 1, 45.0, ""});
    r.push_back({"fig7", "Fig. 7", "mmimo.compare",
                 {{"builder", "two_user_fdd"}, {"M", 32}, {"r2", 1}, {"T", 64}, {"snr_db", {0, 10, 20, 30}}},
                 {"snr_db", "arm"}, 20000, 1, 10.0, ""});
    r.push_back({"fig8", "Fig. 8", "mmimo.compare",
                 {{"builder", "onoff"}, {"M", 64}, {"K", 10}, {"L", 9}, {"T", 128}, {"snr_db", {0, 10, 20, 30}}},
                 {"snr_db", "arm"}, 10000, 1, 80.0, ""});
    for (auto& e : r) e.output = e.name;
    return r;
  }();
  return reg;
}

inline const ExperimentSpec& find_experiment(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  throw error(errc::unknown_experiment, "unknown experiment '" + name + "'");
}

// Full spec, a registry reference with overrides ({"experiment": name, ...}), or a sidecar ({"spec": ...}).
inline ExperimentSpec spec_from_json(const json& j) {
  try {
    if (j.contains("spec")) return spec_from_json(j.at("spec"));
    ExperimentSpec s;
    if (j.contains("experiment")) {
      s = find_experiment(j.at("experiment").get<std::string>());
      if (j.contains("params")) s.params.merge_patch(j.at("params"));
    } else {
      s.name = j.at("name").get<std::string>();
      s.operation = j.at("operation").get<std::string>();
      s.params = j.at("params");
      s.axes = j.at("axes").get<std::vector<std::string>>();
    }
    if (j.contains("figure")) s.figure = j.at("figure").get<std::string>();
    if (j.contains("trials")) s.trials = j.at("trials").get<std::int64_t>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("est_seconds")) s.est_seconds = j.at("est_seconds").get<double>();
    if (j.contains("output")) s.output = j.at("output").get<std::string>();
    if (s.output.empty()) s.output = s.name;
    require(detail::operations().count(s.operation) == 1, errc::invalid_config,
            "unknown operation '" + s.operation + "'");
    return s;
  } catch (const json::exception& e) {
    throw error(errc::invalid_config, std::string("malformed experiment config: ") + e.what());
  }
}

inline ExperimentSpec load_spec(const std::filesystem::path& file) {
  std::ifstream in(file);
  require(static_cast<bool>(in), errc::io, "cannot read " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw error(errc::invalid_config, std::string("config parse error: ") + e.what());
  }
  return spec_from_json(j);
}

struct ExperimentOutput {
  ExperimentSpec spec;
  Dataset data;
  std::string csv;
  json sidecar;
  double seconds = 0.0;
};

// dry = validate the parameters and echo the config without computing.
inline ExperimentOutput run_experiment(const ExperimentSpec& spec, bool dry = false, unsigned threads = 0) {
  const auto it = detail::operations().find(spec.operation);
  require(it != detail::operations().end(), errc::unknown_experiment, "unknown operation '" + spec.operation + "'");
  ExperimentOutput out{spec, {}, {}, {}, 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  out.data = it->second(spec, dry, threads);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.sidecar = {{"spec", to_json(spec)}, {"dry_run", dry}};
  if (dry) return out;
  out.csv = to_csv(spec, out.data);
  out.sidecar["results"] = out.data.extra;
  out.sidecar["rows"] = out.data.rows.size();
  return out;
}

inline ExperimentOutput run_experiment(const std::string& name, bool dry = false, unsigned threads = 0) {
  return run_experiment(find_experiment(name), dry, threads);
}

// Writes <dir>/<output>.csv and <dir>/<output>.json.
inline void write_outputs(const ExperimentOutput& o, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, errc::io, "cannot create " + dir.string());
  auto put = [&](const std::filesystem::path& f, const std::string& text) {
    std::ofstream os(f, std::ios::binary);
    require(static_cast<bool>(os), errc::io, "cannot write " + f.string());
    os << text;
    require(static_cast<bool>(os), errc::io, "write failed for " + f.string());
  };
  if (!o.csv.empty() || !o.data.rows.empty()) put(dir / (o.spec.output + ".csv"), o.csv);
  put(dir / (o.spec.output + ".json"), o.sidecar.dump(2) + "\n");
}

inline std::string list_experiments() {
  std::ostringstream os;
  os << "name    figure      operation            trials  est. runtime\n";
  for (const auto& e : registry()) {
    char line[160];
    std::snprintf(line, sizeof line, "%-7s %-11s %-20s %6lld  %.0f s\n", e.name.c_str(), e.figure.c_str(),
                  e.operation.c_str(), static_cast<long long>(e.trials), std::max(1.0, e.est_seconds));
    os << line;
  }
  return os.str();
}

inline bool operation_exists(const std::string& op) { return detail::operations().count(op) == 1; }

}  // namespace corrbc
