#include "corrbc/bc2_rates.hpp"

#include <gtest/gtest.h>

using namespace corrbc;

namespace {

BroadcastConfig config(int M, int r1, int r2, int r0, int T, double rho, int N1 = 0, int N2 = 0) {
  auto [a, b] = make_two_user_overlap(M, r1, r2, r0, N1, N2);
  return {M, T, rho, {a, b}};
}

bool same_hull(const DRegion& a, const DRegion& b, double tol = 1e-12) {
  return a.contains(b, tol) && b.contains(a, tol);
}

}  // namespace

TEST(Pentagon, Vertices) {
  const auto v = pentagon(3, 2, 4);
  EXPECT_TRUE(same_vertex_set(v, {{0, 0}, {3, 0}, {3, 1}, {2, 2}, {0, 2}}));
  EXPECT_TRUE(same_vertex_set(pentagon(3, 2, 10), {{0, 0}, {3, 0}, {3, 2}, {0, 2}}));
  EXPECT_TRUE(same_vertex_set(pentagon(3, 2, 1), {{0, 0}, {1, 0}, {0, 1}}));
  EXPECT_TRUE(same_vertex_set(pentagon(-1, 2, 5), {{0, 0}, {0, 2}}));
}

TEST(Pentagon, MacBoundsMatchRateSplitting) {
  Rng rng(1);
  std::uniform_real_distribution<double> U(0.0, 5.0);
  for (int rep = 0; rep < 200; ++rep) {
    RsTerms t;
    for (Estimate* e : {&t.R1_prime, &t.R1_p, &t.R1_dprime, &t.R2_prime, &t.R2_p, &t.R0_dprime}) e->mean = U(rng);
    const MacInfos m{t.R1_prime.mean, t.R1_p.mean, t.R1_dprime.mean, t.R2_prime.mean, t.R2_p.mean, t.R0_dprime.mean};
    EXPECT_TRUE(same_hull(rs_region_point(t), lemma4_bounds(m)));
  }
}

TEST(Budgets, RateSplittingSpendsRhoT) {
  const int T = 20;
  for (SchemeDims d : {SchemeDims{2, 3, 1}, SchemeDims{0, 3, 3}, SchemeDims{2, 0, 0}, SchemeDims{1, 4, 0}})
    for (double a : {0.2, 0.7})
      for (double g : {0.0, 0.4})
        for (double w : {0.3, 1.0}) EXPECT_NEAR(rs_energy(rs_powers_from(5.0, T, d, a, g, w), d, T), 5.0 * T, 1e-9);
}

TEST(Budgets, ProductSuperpositionSpendsRhoT) {
  const int T = 20;
  for (auto [s0, s2] : {std::pair{2, 3}, std::pair{0, 4}, std::pair{3, 0}})
    for (double a : {0.2, 0.7})
      for (double b : {0.0, 0.5}) {
        const PsPowers p = ps_powers_from(5.0, T, s0, s2, a, b, 0.8);
        EXPECT_NEAR(ps_energy(p, s0, s2, T), 5.0 * T, 1e-9);
      }
}

TEST(Budgets, ProductSuperpositionTransmitEnergy) {
  const BroadcastConfig cfg = config(10, 6, 5, 3, 16, 4.0);
  const PsPowers p = ps_powers_from(cfg.rho, cfg.T, 2, 2, 0.6, 0.5, 1.0);
  const PrecoderSet2 V = build_precoders2(cfg.users[0].U, cfg.users[1].U, 2, 0, 2);
  const Estimate e = expect({7, 20000, 0.95, 0}, [&](Rng& rng, std::uint64_t) {
    return ps_transmit_block(V.V0, V.V2, p, cfg.T, rng).squaredNorm();
  });
  EXPECT_NEAR(e.mean, ps_energy(p, 2, 2, cfg.T), 4 * e.ci);
}

TEST(Budgets, HybridWithinBudget) {
  const int T = 20;
  for (SchemeDims d : {SchemeDims{2, 3, 1}, SchemeDims{2, 2, 2}, SchemeDims{0, 3, 1}})
    for (double f : {0.2, 0.8}) {
      const HybridPowers p = hybrid_powers_from(5.0, T, d, 0.6, d.s0 ? 0.3 : 0.0, f);
      EXPECT_LE(hybrid_energy(p, d, T), 5.0 * T * (1 + 1e-9));
    }
}

TEST(RateSplitting, NoCommonStreamMeansNoCommonRate) {
  const BroadcastConfig cfg = config(10, 5, 4, 2, 16, 10.0);
  const SchemeDims d{0, 3, 2};
  const RsTerms t = rs_terms(cfg, d, rs_powers_from(cfg.rho, cfg.T, d, 0.6, 0.3, 0.5), {3, 500, 0.95, 0});
  EXPECT_EQ(t.R1_dprime.mean, 0.0);
  EXPECT_EQ(t.R0_dprime.mean, 0.0);
  EXPECT_GT(t.R1_prime.mean, 0.0);
  EXPECT_GT(t.R2_prime.mean, 0.0);
}

TEST(RateSplitting, DisjointUsersReduceToSingleUser) {
  // no overlap: each user sees a white 3-dimensional prior, as a point-to-point link
  const BroadcastConfig cfg = config(6, 3, 3, 0, 12, 20.0, 3, 3);
  const SchemeDims d{0, 3, 3};
  const RsPowers pw = rs_powers_from(cfg.rho, cfg.T, d, 0.6, 0.0, 0.5);
  const RsTerms t = rs_terms(cfg, d, pw, {11, 40000, 0.95, 0});
  const Mat Rbar = cfg.users[0].Sigma_mat();
  const Estimate ref = rate_orth_pilot(3, 3, cfg.T, Rbar, {pw.rho1_tau, pw.rho1_delta, 3, 9}, {12, 40000, 0.95, 0});
  EXPECT_NEAR(t.R1_prime.mean, ref.mean, 4 * std::hypot(t.R1_prime.ci, ref.ci));
  EXPECT_NEAR(t.R1_p.mean, ref.mean, 4 * std::hypot(t.R1_p.ci, ref.ci));
}

TEST(RateSplitting, SwappedDimsAreMirrored) {
  const BroadcastConfig cfg = config(10, 5, 5, 2, 16, 10.0);
  const SchemeDims d{1, 1, 3};
  const RsPowers pw = rs_powers_from(cfg.rho, cfg.T, d, 0.6, 0.3, 0.5);
  const RsTerms t = rs_terms_any(cfg, d, pw, {3, 200, 0.95, 1});
  const RsPowers q{pw.rho0_tau, pw.rho0_delta, pw.rho2_tau, pw.rho2_delta, pw.rho1_tau, pw.rho1_delta};
  const RsTerms s = rs_terms(swap_users(cfg), {1, 3, 1}, q, {3, 200, 0.95, 1});
  EXPECT_EQ(t.R1_prime.mean, s.R2_prime.mean);
  EXPECT_EQ(t.R2_prime.mean, s.R1_prime.mean);
  EXPECT_THROW(rs_terms(cfg, d, pw, {3, 200, 0.95, 1}), error);
}

TEST(RateSplitting, RejectsBadDimsAndPower) {
  const BroadcastConfig cfg = config(10, 5, 4, 2, 16, 10.0);
  const McConfig mc{1, 10, 0.95, 1};
  for (SchemeDims d : {SchemeDims{3, 1, 1}, SchemeDims{1, 4, 1}, SchemeDims{-1, 1, 1}}) {
    try {
      rs_terms(cfg, d, RsPowers{}, mc);
      FAIL();
    } catch (const error& e) {
      EXPECT_EQ(e.code(), errc::scheme_dims);
    }
  }
  RsPowers big;
  big.rho1_delta = 1e6;
  try {
    rs_terms(cfg, {1, 2, 1}, big, mc);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::power);
  }
}

TEST(ProductSuperposition, NoCrossSlotsNoUserOneRate) {
  const BroadcastConfig cfg = config(10, 6, 5, 3, 16, 10.0);
  const McConfig mc{2, 300, 0.95, 0};
  EXPECT_EQ(ps_rates(cfg, 3, 0, ps_powers_from(cfg.rho, cfg.T, 3, 0, 0.6, 0.5), mc).R1.mean, 0.0);
  EXPECT_EQ(ps_rates(cfg, 0, 2, ps_powers_from(cfg.rho, cfg.T, 0, 2, 0.6, 0.5), mc).R1.mean, 0.0);
  const PairRates p = ps_rates(cfg, 3, 2, ps_powers_from(cfg.rho, cfg.T, 3, 2, 0.6, 0.5), mc);
  EXPECT_GT(p.R1.mean, 0.0);
  EXPECT_GT(p.R2.mean, 0.0);
}

TEST(ProductSuperposition, UserOneRateGrowsWithShare) {
  const BroadcastConfig cfg = config(10, 6, 5, 3, 16, 100.0);
  const McConfig mc{2, 2000, 0.95, 0};
  const double lo = ps_rates(cfg, 3, 2, ps_powers_from(cfg.rho, cfg.T, 3, 2, 0.6, 0.2), mc).R1.mean;
  const double hi = ps_rates(cfg, 3, 2, ps_powers_from(cfg.rho, cfg.T, 3, 2, 0.6, 0.8), mc).R1.mean;
  EXPECT_GT(hi, lo);
}

TEST(Hybrid, RateTwoIsClampedAtZero) {
  const BroadcastConfig cfg = config(12, 6, 5, 3, 20, 10.0);
  const McConfig mc{4, 400, 0.95, 0};
  for (double f : {0.1, 0.5, 0.95}) {
    const SchemeDims d{2, 3, 1};
    const PairRates p = hybrid_rates(cfg, d, hybrid_powers_from(cfg.rho, cfg.T, d, 0.6, 0.4, f), mc);
    EXPECT_GE(p.R2.mean, 0.0);
    EXPECT_EQ(p.R2.mean, std::max(0.0, p.R2_unclamped));
    EXPECT_GE(p.R1.mean, 0.0);
  }
}

TEST(Hybrid, ZeroCommonWithCrossPowerRejected) {
  const BroadcastConfig cfg = config(12, 6, 5, 3, 20, 10.0);
  HybridPowers p = hybrid_powers_from(cfg.rho, cfg.T, {0, 3, 1}, 0.6, 0.0, 0.5);
  p.nu2_delta = 0.5;
  EXPECT_THROW(hybrid_rates(cfg, {0, 3, 1}, p, {1, 10, 0.95, 1}), error);
}

TEST(Sweep, RegionContainsEveryPointAndTdma) {
  const BroadcastConfig cfg = config(8, 4, 3, 1, 12, 10.0);
  const McConfig mc{5, 200, 0.95, 0};
  const TdmaResult td = tdma_region(cfg, mc);
  SweepGrid g;
  g.a = {0.5};
  g.b = {0.3};
  g.c = {0.5};
  for (Scheme s : {Scheme::rate_splitting, Scheme::product_superposition, Scheme::hybrid}) {
    const SweepResult r = region_sweep(cfg, s, g, mc, &td);
    EXPECT_FALSE(r.points.empty()) << scheme_name(s);
    EXPECT_TRUE(r.region.contains(td.region, 1e-9));
    for (const auto& p : r.points)
      for (const auto& v : p.vertices) EXPECT_TRUE(r.region.contains(v, 1e-9));
  }
}

TEST(Sweep, ExhaustiveDims) {
  const BroadcastConfig cfg = config(8, 4, 3, 1, 12, 10.0);
  EXPECT_EQ(exhaustive_dims(cfg, Scheme::rate_splitting).size(), 2u * 4 * 3 - 1);
  for (const auto& d : exhaustive_dims(cfg, Scheme::product_superposition)) EXPECT_EQ(d.s1, 0);
  for (const auto& d : exhaustive_dims(cfg, Scheme::hybrid)) EXPECT_GE(d.s1, d.s2);
}

TEST(Sweep, SeedReproducible) {
  const BroadcastConfig cfg = config(8, 4, 3, 1, 12, 10.0);
  SweepGrid g;
  g.dims = {{1, 2, 1}};
  g.a = {0.5};
  g.b = {0.3, 0.6};
  g.c = {0.5};
  const SweepResult a = region_sweep(cfg, Scheme::rate_splitting, g, {9, 100, 0.95, 1});
  const SweepResult b = region_sweep(cfg, Scheme::rate_splitting, g, {9, 100, 0.95, 3});
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_EQ(a.points[i].R1.mean, b.points[i].R1.mean);
}
