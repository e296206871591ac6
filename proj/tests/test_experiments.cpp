#include "corrbc/experiments.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace corrbc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
      else if (c == '"') quoted = false;
      else cur += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

// Field-wise CSV comparison: numbers to a relative tolerance, everything else exactly.
void expect_csv_close(const std::string& got, const std::string& want, double rel) {
  const auto g = lines_of(got), w = lines_of(want);
  ASSERT_EQ(g.size(), w.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto a = split_line(g[i]), b = split_line(w[i]);
    ASSERT_EQ(a.size(), b.size()) << "line " << i;
    for (std::size_t k = 0; k < a.size(); ++k) {
      char* ea = nullptr;
      char* eb = nullptr;
      const double x = std::strtod(a[k].c_str(), &ea), y = std::strtod(b[k].c_str(), &eb);
      const bool num = !a[k].empty() && !b[k].empty() && *ea == '\0' && *eb == '\0';
      if (num)
        EXPECT_LE(std::abs(x - y), rel * std::max({1.0, std::abs(x), std::abs(y)})) << "line " << i << " field " << k;
      else
        EXPECT_EQ(a[k], b[k]) << "line " << i << " field " << k;
    }
  }
}

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("corrbc_test_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

// Same experiment with the trial count (and the massive-MIMO power prepass) scaled down.
ExperimentSpec shrunk(const std::string& name, std::int64_t trials) {
  ExperimentSpec s = find_experiment(name);
  if (s.operation == "mmimo.compare") {
    const auto pre = s.params.value("prepass_trials", std::int64_t{20000});
    s.params["prepass_trials"] = std::max<std::int64_t>(pre * trials / s.trials, 1);
  }
  s.trials = trials;
  return s;
}

}  // namespace

// ---------------------------------------------------------------- registry

TEST(Registry, HasEveryFigureAndResolves) {
  const auto& r = registry();
  EXPECT_GE(r.size(), 8u);
  std::set<std::string> names;
  for (const auto& e : r) {
    EXPECT_TRUE(operation_exists(e.operation)) << e.name;
    EXPECT_TRUE(names.insert(e.name).second) << "duplicate " << e.name;
    EXPECT_EQ(e.output, e.name);
    EXPECT_GT(e.est_seconds, 0.0);
    if (e.operation == "bc2.regions" || e.operation == "mmimo.compare") {
      EXPECT_GE(e.trials, 1) << e.name;
    }
  }
  for (const char* n : {"fig2", "fig3a", "fig3b", "fig4", "fig5a", "fig5b", "fig6", "fig7", "fig8"})
    EXPECT_EQ(names.count(n), 1u) << n;
}

TEST(Registry, UnknownNameIsReported) {
  try {
    find_experiment("fig99");
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::unknown_experiment);
  }
}

TEST(Registry, UnknownOperationInConfig) {
  json j = to_json(find_experiment("fig2"));
  j["operation"] = "dof.nonexistent";
  try {
    spec_from_json(j);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::invalid_config);
  }
}

TEST(Registry, ListingNamesEveryExperiment) {
  const std::string s = list_experiments();
  for (const auto& e : registry()) EXPECT_NE(s.find(e.name), std::string::npos);
}

TEST(Registry, OverridesMergeIntoRegisteredSpec) {
  const ExperimentSpec s = spec_from_json(json{{"experiment", "fig3a"}, {"params", {{"r0", {3}}}}, {"output", "x"}});
  EXPECT_EQ(s.operation, "dof.two_user_nocsir");
  EXPECT_EQ(s.params.at("r0"), json::array({3}));
  EXPECT_EQ(s.params.at("T"), 24);
  EXPECT_EQ(s.output, "x");
}

// ---------------------------------------------------------------- runs

TEST(Run, DryRunValidatesWithoutRows) {
  for (const auto& e : registry()) {
    const auto o = run_experiment(e, true, 1);
    EXPECT_TRUE(o.data.rows.empty()) << e.name;
    EXPECT_TRUE(o.csv.empty());
    EXPECT_TRUE(o.sidecar.at("dry_run").get<bool>());
    EXPECT_FALSE(o.sidecar.contains("results"));
    EXPECT_EQ(o.sidecar.at("spec").at("name"), e.name);
  }
}

TEST(Run, DryRunStillRejectsBadParameters) {
  ExperimentSpec s = find_experiment("fig3a");
  s.params["T"] = 10;
  try {
    run_experiment(s, true, 1);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::invalid_config);
  }
  ExperimentSpec m = find_experiment("fig7");
  m.params["builder"] = "nope";
  EXPECT_THROW(run_experiment(m, true, 1), error);
}

TEST(Run, CsirFigureHasFourVertexLists) {
  const auto o = run_experiment("fig2", false, 1);
  const json& regs = o.sidecar.at("results").at("regions");
  ASSERT_EQ(regs.size(), 4u);
  std::vector<int> r0;
  for (const auto& r : regs) {
    r0.push_back(r.at("r0").get<int>());
    EXPECT_FALSE(r.at("achievable").empty());
    EXPECT_TRUE(r.at("equal").get<bool>());
  }
  EXPECT_EQ(r0, (std::vector<int>{0, 3, 6, 9}));
  // header: axes, then quantity, value, ci, seed, trials
  EXPECT_EQ(lines_of(o.csv).front(), "r0,region,vertex,quantity,value,ci,seed,trials");
}

TEST(Run, NoCsirFigureContainsTdma) {
  for (const char* n : {"fig3a", "fig3b"}) {
    const auto o = run_experiment(n, false, 1);
    const json& regs = o.sidecar.at("results").at("regions");
    ASSERT_EQ(regs.size(), 4u);
    for (const auto& r : regs) EXPECT_TRUE(r.at("contains_tdma").get<bool>()) << n;
  }
}

TEST(Run, ThreeUserFigureGivesCloudAndFacets) {
  const auto o = run_experiment("fig4", false, 1);
  const json& res = o.sidecar.at("results");
  EXPECT_EQ(res.at("tuples").size(), 6u);
  EXPECT_GT(res.at("points").size(), 4u);
  ASSERT_GE(res.at("facets").size(), 4u);
  // every cloud point lies on or below every facet plane
  for (const auto& f : res.at("facets")) {
    const Q3 n{json_q(f.at("normal")[0]), json_q(f.at("normal")[1]), json_q(f.at("normal")[2])};
    const Q off = json_q(f.at("offset"));
    for (const auto& p : res.at("points")) {
      const auto& d = p.at("d");
      EXPECT_TRUE(n[0] * json_q(d[0]) + n[1] * json_q(d[1]) + n[2] * json_q(d[2]) <= off);
    }
  }
}

TEST(Run, ExactSidecarRoundTripReproducesCsv) {
  for (const char* n : {"fig2", "fig3b", "fig4"}) {
    const auto a = run_experiment(n, false, 1);
    const auto b = run_experiment(spec_from_json(json::parse(a.sidecar.dump())), false, 1);
    EXPECT_EQ(a.csv, b.csv) << n;
  }
}

TEST(Run, MonteCarloSidecarRoundTripReproducesCsv) {
  const ExperimentSpec s = shrunk("fig7", 300);
  const auto a = run_experiment(s, false, 1);
  const auto b = run_experiment(spec_from_json(json::parse(a.sidecar.dump())), false, 2);
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_EQ(a.sidecar.at("rows"), b.sidecar.at("rows"));
}

TEST(Run, FilesOnDiskRoundTrip) {
  const fs::path dir = scratch("rt");
  const auto a = run_experiment(shrunk("fig6", 100), false, 1);
  write_outputs(a, dir);
  const ExperimentSpec s = load_spec(dir / "fig6.json");
  const auto b = run_experiment(s, false, 1);
  EXPECT_EQ(slurp(dir / "fig6.csv"), b.csv);
  fs::remove_all(dir);
}

TEST(Run, UnwritablePathIsIoError) {
  const auto o = run_experiment("fig2", false, 1);
  for (const fs::path& p : {fs::path("/proc/corrbc/out"), fs::path("/dev/null/out")}) {
    try {
      write_outputs(o, p);
      FAIL() << p;
    } catch (const error& e) {
      EXPECT_EQ(e.code(), errc::io);
    }
  }
  try {
    load_spec("/nonexistent/corrbc.json");
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::io);
  }
}

TEST(Run, MalformedConfigIsRejected) {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "a.json") << "{not json";
  std::ofstream(dir / "b.json") << R"({"name": "x"})";
  for (const char* f : {"a.json", "b.json"}) {
    try {
      load_spec(dir / f);
      FAIL() << f;
    } catch (const error& e) {
      EXPECT_EQ(e.code(), errc::invalid_config);
    }
  }
  fs::remove_all(dir);
}

// ---------------------------------------------------------------- golden fixtures

// Each golden pair is <name>.json (the sidecar) and <name>.csv, written by the CLI.
TEST(Golden, RerunMatchesStoredOutput) {
  const fs::path dir = CORRBC_GOLDEN_DIR;
  int n = 0;
  for (const auto& f : fs::directory_iterator(dir)) {
    if (f.path().extension() != ".json") continue;
    const fs::path csv = fs::path(f.path()).replace_extension(".csv");
    ASSERT_TRUE(fs::exists(csv)) << csv;
    const auto o = run_experiment(load_spec(f.path()), false, 1);
    SCOPED_TRACE(f.path().filename().string());
    expect_csv_close(o.csv, slurp(csv), 1e-6);
    ++n;
  }
  EXPECT_GE(n, 9);
}

// ---------------------------------------------------------------- runtime estimates

// Registered estimates are for the full trial count; a run at a fraction of the trials should
// take that fraction of the estimate, within a factor of two.
TEST(Timing, EstimatesWithinFactorTwo) {
  constexpr double floor_s = 0.25;
  for (const auto& e : registry()) {
    const std::int64_t t = e.trials > 0 ? std::max<std::int64_t>(e.trials / 20, 1) : 0;
    const double expected = e.trials > 0 ? e.est_seconds * static_cast<double>(t) / e.trials : e.est_seconds;
    // CPU time of a single-threaded run, so a loaded machine does not skew it
    const std::clock_t c0 = std::clock();
    run_experiment(e.trials > 0 ? shrunk(e.name, t) : e, false, 1);
    const double took = static_cast<double>(std::clock() - c0) / CLOCKS_PER_SEC;
    const double a = std::max(took, floor_s), b = std::max(expected, floor_s);
    EXPECT_LE(a, 2.0 * b) << e.name << " took " << took << " s, estimate " << expected;
    EXPECT_LE(b, 2.0 * a) << e.name << " took " << took << " s, estimate " << expected;
  }
}

// ---------------------------------------------------------------- command line

namespace {

int sh(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Cli, ListRunDryAndErrors) {
  const std::string cli = CORRBC_CLI_PATH;
  const fs::path dir = scratch("cli");
  EXPECT_EQ(sh(cli + " list"), 0);
  EXPECT_EQ(sh(cli + " run fig2 -o " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "fig2.csv"));
  EXPECT_TRUE(fs::exists(dir / "fig2.json"));
  EXPECT_EQ(slurp(dir / "fig2.csv"), run_experiment("fig2", false, 1).csv);

  EXPECT_EQ(sh(cli + " run -c " + (dir / "fig2.json").string() + " -o " + (dir / "again").string()), 0);
  EXPECT_EQ(slurp(dir / "again" / "fig2.csv"), slurp(dir / "fig2.csv"));

  EXPECT_EQ(sh(cli + " run fig8 --dry-run -o " + (dir / "dry").string()), 0);
  EXPECT_FALSE(fs::exists(dir / "dry"));

  EXPECT_EQ(sh(cli + " run fig99"), 1);
  EXPECT_EQ(sh(cli + " run fig2 -o /proc/corrbc"), 1);
  EXPECT_NE(sh(cli + " run"), 0);
  fs::remove_all(dir);
}
