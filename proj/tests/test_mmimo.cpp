#include "corrbc/mmimo.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

using namespace corrbc;

namespace {

// Integral of e^-t / t over [x, inf), computed independently of the library.
double e1_quadrature(double x) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([x](double u) { return std::exp(-(x + u)) / (x + u); }, 0.0,
                              std::numeric_limits<double>::infinity(), 1e-14);
}

double sum_user(const FddResult& r, int user, double* ci = nullptr) {
  double s = 0.0, c = 0.0;
  for (std::size_t j = 0; j < r.dR.size(); ++j)
    if (r.dR_user[j] == user) s += r.dR[j].mean, c += r.dR[j].ci;
  if (ci) *ci = c;
  return s;
}

}  // namespace

TEST(ExpIntegral, ValueAtOne) {
  EXPECT_NEAR(exp_integral_E1(1.0), 0.21938393439552, 1e-13);
  EXPECT_NEAR(exp_integral_E1(1.0), e1_quadrature(1.0), 1e-10 * e1_quadrature(1.0));
}

TEST(ExpIntegral, AgreesWithQuadrature) {
  for (double x : {1e-3, 0.05, 0.21, 0.9, 2.5, 7.0, 20.0, 60.0}) {
    const double ref = e1_quadrature(x);
    EXPECT_NEAR(exp_integral_E1(x), ref, 1e-10 * ref) << x;
  }
}

TEST(ExpIntegral, CrossoverContinuity) {
  for (double eps : {1e-6, 1e-9}) {
    const double lo = exp_integral_E1(1.0 - eps), hi = exp_integral_E1(1.0 + eps);
    EXPECT_GT(lo, hi);
    // slope of E1 at 1 is -e^-1
    EXPECT_NEAR((hi - lo) / (2 * eps), -std::exp(-1.0), 1e-3);
  }
}

TEST(ExpIntegral, TailBound) {
  for (double x : {2.0, 5.0, 10.0, 50.0, 300.0}) {
    const double e = exp_integral_E1(x);
    EXPECT_LE(e, std::exp(-x) / x);
    EXPECT_GE(e, std::exp(-x) / (x + 1));
  }
}

TEST(ExpIntegral, Domain) {
  for (double x : {0.0, -1.0, std::numeric_limits<double>::infinity()}) {
    try {
      exp_integral_E1(x);
      FAIL() << x;
    } catch (const error& e) {
      EXPECT_EQ(e.code(), errc::domain);
    }
  }
}

TEST(OnOff, ClosedFormAtTenAgreesWithQuadrature) {
  const double x = 21.0 / 100.0;
  const double ref = 9.0 / 128 * std::numbers::log2e * std::exp(x) * e1_quadrature(x);
  EXPECT_NEAR(onoff_delta_r1_closed(9, 128, 10.0), ref, 1e-10 * ref);
}

TEST(OnOff, MonteCarloMatchesClosedForm) {
  const double rho = 10.0;
  const FddResult r = fdd_evaluate(onoff_scheme(10, 2, 9, 128, rho), {{21, 40000, 0.95, 0}, 100000});
  double ci = 0.0;
  const double mc = sum_user(r, 0, &ci);
  EXPECT_NEAR(mc, onoff_delta_r1_closed(9, 128, rho), 3 * ci);
}

TEST(OnOff, Layout) {
  EXPECT_THROW(onoff_layout(64, 10, 5), error);
  const OnOffLayout o = onoff_layout(64, 10, 9);
  EXPECT_EQ(o.G, 7);
  for (int l = 0; l < 9; ++l) {
    EXPECT_GE(o.group_user[l], 1);
    EXPECT_LE(o.group_user[l], 8);
  }
  const auto users = onoff_users(o);
  ASSERT_EQ(users.size(), 10u);
  EXPECT_EQ(users.front().r(), 1);
  EXPECT_EQ(users.back().r(), 64);
  for (const auto& u : users) EXPECT_NEAR(u.B.squaredNorm(), 64.0, 1e-9);
}

TEST(OnOff, TrivialGroups) {
  // one antenna per group leaves only the v_l terms
  const FddScheme s = onoff_scheme(4, 2, 3, 8, 10.0);
  EXPECT_EQ(s.d_prelog.size(), 3u);
  const FddScheme t = onoff_scheme(5, 3, 1, 8, 10.0);
  EXPECT_EQ(t.d_prelog.size(), 2u);
  EXPECT_EQ(t.d_user[1], 1);
}

TEST(Conventional, ZeroPower) {
  const FddResult r = fdd_evaluate(conventional_scheme(two_user_fdd_users(8, 3), 16, 0.0), {{1, 200, 0.95, 0}, 200});
  EXPECT_EQ(r.sum.mean, 0.0);
}

TEST(Conventional, SingleUserSlope) {
  const FddScheme lo = conventional_scheme({uncorrelated_user(4)}, 16, 1e5);
  const FddScheme hi = conventional_scheme({uncorrelated_user(4)}, 16, 1e6);
  const FddRun run{{2, 5000, 0.95, 0}, 5000};
  const double d = fdd_evaluate(hi, run).sum.mean - fdd_evaluate(lo, run).sum.mean;
  EXPECT_NEAR(d / std::log2(10.0), 1.0 - 4.0 / 16, 0.02);
}

TEST(TwoUser, FullRankReducesToConventional) {
  const FddRun run{{4, 1000, 0.95, 0}, 1000};
  const FddScheme p = two_user_fdd_scheme(8, 8, 16, 10.0);
  EXPECT_TRUE(p.d_prelog.empty());
  const FddResult a = fdd_evaluate(p, run);
  const FddResult b = fdd_evaluate(conventional_scheme(two_user_fdd_users(8, 8), 16, 10.0), run);
  EXPECT_NEAR(a.sum.mean, b.sum.mean, 1e-9);
}

TEST(TwoUser, OpportunisticTermsAndPairedDifference) {
  const FddScheme p = two_user_fdd_scheme(8, 3, 16, 100.0);
  EXPECT_EQ(p.d_prelog.size(), 5u);
  const FddComparison c = fdd_compare(p, conventional_scheme(two_user_fdd_users(8, 3), 16, 100.0), {{5, 2000, 0.95, 0}, 2000});
  EXPECT_NEAR(c.difference.mean, c.proposed.sum.mean - c.conventional.sum.mean, 1e-9);
  for (const auto& e : c.proposed.dR) EXPECT_GT(e.mean, 0.0);
  for (double x : c.proposed.bf_denominator) EXPECT_GE(x, 0.0);
  EXPECT_THROW(two_user_fdd_scheme(8, 9, 16, 1.0), error);
}

TEST(TwoUser, OpportunisticSlope) {
  // each of the M - r2 data slots gains one bit per doubling of SNR
  const FddRun run{{6, 4000, 0.95, 0}, 4000};
  const FddResult lo = fdd_evaluate(two_user_fdd_scheme(8, 3, 16, 1e5), run);
  const FddResult hi = fdd_evaluate(two_user_fdd_scheme(8, 3, 16, 1e6), run);
  const double d = sum_user(hi, 1) - sum_user(lo, 1);
  EXPECT_NEAR(d / std::log2(10.0), 5.0 / 16, 0.02);
}

TEST(Partial, DegenerateCases) {
  EXPECT_TRUE(two_user_partial_scheme(16, 6, 6, 6, 48, 10.0).d_prelog.empty());
  EXPECT_TRUE(two_user_partial_scheme(16, 6, 6, 2, 48, 10.0).d_prelog.empty());
  EXPECT_EQ(two_user_partial_scheme(16, 12, 8, 4, 48, 10.0).d_prelog.size(), 1u);
  EXPECT_THROW(two_user_partial_scheme(16, 12, 8, 2, 48, 10.0), error);
  EXPECT_THROW(partial_geometry(16, 4, 8, 2), error);
}

TEST(Partial, RatesPositive) {
  const FddResult r = fdd_evaluate(two_user_partial_scheme(16, 12, 8, 4, 48, 100.0), {{8, 2000, 0.95, 0}, 2000});
  for (const auto& e : r.R) EXPECT_GT(e.mean, 0.0);
  EXPECT_GT(r.dR.at(0).mean, 0.0);
}

TEST(Sym3, NoPairPhaseNoExtraData) {
  EXPECT_TRUE(sym3_scheme(24, {4, 0, 1}, 48, 10.0).d_prelog.empty());
  const FddScheme s = sym3_scheme(24, {4, 2, 1}, 48, 10.0);
  EXPECT_EQ(s.d_prelog.size(), 3u);
  EXPECT_THROW(sym3_scheme(24, {4, 2, 1}, 11, 10.0), error);
  const FddResult r = fdd_evaluate(s, {{9, 1000, 0.95, 0}, 1000});
  for (const auto& e : r.R) EXPECT_GT(e.mean, 0.0);
}

TEST(Users, TraceNormalization) {
  EXPECT_NEAR((dft_user(16, 5).B * dft_user(16, 5).B.adjoint()).trace().real(), 16.0, 1e-9);
  EXPECT_NEAR((coordinate_user(16, {1, 4, 9}).B.squaredNorm()), 16.0, 1e-9);
  EXPECT_TRUE(coordinate_user(16, {1, 4, 9}).sparse);
  EXPECT_FALSE(dft_user(16, 5).sparse);
}

TEST(Users, DiagonalEstimatorMatchesGeneral) {
  Rng rng(3);
  const MmUser u = coordinate_user(6, {0, 2, 5});
  const Mat X = Mat(crandn(6, 1, rng).asDiagonal());
  const Vec y = crandn(6, 1, rng);
  EXPECT_LE((lmmse_channel(u, X, true, y) - lmmse_channel(u, X, false, y)).norm(), 1e-10);
}

TEST(Mmimo, ThreadInvariance) {
  const FddScheme s = two_user_fdd_scheme(8, 3, 16, 10.0);
  const FddResult a = fdd_evaluate(s, {{5, 700, 0.95, 1}, 700});
  const FddResult b = fdd_evaluate(s, {{5, 700, 0.95, 3}, 700});
  EXPECT_EQ(a.sum.mean, b.sum.mean);
}
