#include "corrbc/estimation.hpp"

#include <gtest/gtest.h>

using namespace corrbc;

namespace {

Mat random_pd(int n, Rng& rng) {
  const Mat A = crandn(n, n, rng);
  return hermitian_part(A * A.adjoint() / n) + scaled_identity(n, 0.1);
}

}  // namespace

TEST(Mmse, ZeroPilotGivesPrior) {
  Rng rng(1);
  const Mat R = random_pd(3, rng);
  const Mat X = Mat::Zero(3, 4);
  const Mat Y = crandn(2, 4, rng);
  const MmseResult m = mmse_estimate(Y, X, R);
  EXPECT_LE(m.estimate.norm(), 1e-12);
  EXPECT_LE(m.est_cov.norm(), 1e-12);
  EXPECT_LE((m.err_cov - R).norm(), 1e-12);
}

TEST(Mmse, WhiteScalarPilot) {
  const double rho = 4.0;
  const Mat X = scaled_identity(3, std::sqrt(rho));
  Rng rng(2);
  const MmseResult m = mmse_estimate(crandn(1, 3, rng), X, identity(3));
  EXPECT_LE((m.est_cov - scaled_identity(3, rho / (rho + 1))).norm(), 1e-12);
  EXPECT_LE((m.err_cov - scaled_identity(3, 1 / (rho + 1))).norm(), 1e-12);
}

TEST(Mmse, CovariancesSplitPrior) {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Mat R = random_pd(4, rng);
    const Mat X = crandn(4, 3, rng);
    const MmseResult m = mmse_estimate(Mat::Zero(1, 3), X, R);
    EXPECT_LE((m.est_cov + m.err_cov - R).norm(), 1e-10);
    EXPECT_TRUE(is_psd(m.est_cov));
    EXPECT_TRUE(is_psd(m.err_cov));
  }
}

TEST(Mmse, RejectsBadInput) {
  EXPECT_THROW(mmse_estimate(Mat::Zero(1, 2), Mat::Zero(3, 3), identity(3)), error);
  Mat R = identity(2);
  R(0, 0) = -1.0;
  EXPECT_THROW(mmse_estimate(Mat::Zero(1, 2), Mat::Zero(2, 2), R), error);
}

TEST(Mmse, MonteCarloErrorMatchesErrCov) {
  Rng setup(4);
  const int m = 3, tau = 3, N = 2;
  const Mat R = random_pd(m, setup);
  const Mat X = crandn(m, tau, setup);
  const MmseResult ref = mmse_estimate(Mat::Zero(N, tau), X, R);
  const Mat root = sqrt_psd(R);
  const McConfig mc{5, 40000, 0.95, 0};
  const auto e = expect_multi(mc, 3, [&](Rng& rng, std::uint64_t, double* out) {
    const Mat H = crandn(N, m, rng) * root;
    const Mat Y = H * X + crandn(N, tau, rng);
    const Mat Hhat = mmse_estimate(Y, X, R).estimate;
    const Mat E = H - Hhat;
    out[0] = E.squaredNorm() / N;
    out[1] = Hhat.squaredNorm() / N;
    out[2] = (Hhat.adjoint() * E).trace().real() / N;
  });
  EXPECT_NEAR(e[0].mean, trace_re(ref.err_cov), 4 * e[0].ci);
  EXPECT_NEAR(e[1].mean, trace_re(ref.est_cov), 4 * e[1].ci);
  EXPECT_NEAR(e[2].mean, 0.0, 4 * e[2].ci);
}

TEST(EffectiveSnr, WhitePriorClosedForm) {
  for (double rt : {0.5, 2.0, 30.0})
    for (double rd : {0.1, 1.0, 100.0})
      for (int r : {1, 3}) EXPECT_NEAR(effective_snr(identity(r), rt, rd), rd * rt / (rd + rt + 1), 1e-12);
}

TEST(EffectiveSnr, ZeroDataPowerAndSingularPrior) {
  EXPECT_EQ(effective_snr(identity(2), 3.0, 0.0), 0.0);
  try {
    effective_snr(Mat::Zero(2, 2), 1.0, 1.0);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::rank_deficiency);
  }
}

TEST(EffectiveSnr, IncreasesWithPower) {
  Rng rng(5);
  const Mat R = random_pd(3, rng);
  EXPECT_LT(effective_snr(R, 1.0, 1.0), effective_snr(R, 2.0, 1.0));
  EXPECT_LT(effective_snr(R, 1.0, 1.0), effective_snr(R, 1.0, 2.0));
}

TEST(WorstCaseRate, DeterministicSample) {
  const Mat H = identity(2);
  const McConfig mc{1, 10, 0.95, 1};
  const Estimate e = worst_case_rate(0.5, mc, [&](Rng&) { return ScaledSample{H, 3.0}; });
  EXPECT_NEAR(e.mean, 0.5 * 2 * std::log2(4.0), 1e-12);
  EXPECT_NEAR(e.ci, 0.0, 1e-12);
}

TEST(WorstCaseRate, MonotoneInScale) {
  const McConfig mc{6, 2000, 0.95, 0};
  double prev = -1.0;
  for (double s : {0.1, 1.0, 10.0, 100.0}) {
    const Estimate e = worst_case_rate(1.0, mc, [&](Rng& rng) { return ScaledSample{crandn(2, 3, rng), s}; });
    EXPECT_GT(e.mean, prev);
    prev = e.mean;
  }
}

TEST(WorstCaseRate, PrelogRange) {
  const McConfig mc{1, 10, 0.95, 1};
  auto draw = [](Rng&) { return ScaledSample{identity(1), 1.0}; };
  EXPECT_THROW(worst_case_rate(1.5, mc, draw), error);
  EXPECT_THROW(worst_case_rate(-0.1, mc, draw), error);
}
