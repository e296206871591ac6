#pragma once

#include "mc_engine.hpp"

namespace corrbc {

struct MmseResult {
  Mat estimate;  ///< N x m
  Mat est_cov;   ///< m x m
  Mat err_cov;   ///< m x m
};

// Linear MMSE estimate of H (rows ~ CN(0,R)) from Y = H X + W.
inline MmseResult mmse_estimate(const Mat& Y, const Mat& X, const Mat& R) {
  require(R.rows() == R.cols() && X.rows() == R.rows(), errc::invalid_input, "dimension mismatch");
  require(Y.cols() == X.cols(), errc::invalid_input, "Y and X disagree on the pilot length");
  require(all_finite(X) && all_finite(Y), errc::invalid_input, "non-finite input");
  require(is_psd(R), errc::invalid_input, "R must be Hermitian PSD");
  const Mat XhR = X.adjoint() * R;
  const Mat A = hermitian_part(XhR * X) + identity(X.cols());
  Eigen::LLT<Mat> llt(A);
  const Mat W = llt.solve(XhR);  // (X^H R X + I)^{-1} X^H R
  MmseResult out;
  out.estimate = Y * W;
  out.est_cov = hermitian_part(XhR.adjoint() * W);
  out.err_cov = hermitian_part(R - out.est_cov);
  return out;
}

// prelog * E[log2 det(I + scale * Hhat Hhat^H)] over samples drawn by draw(rng) -> {Hhat, scale}.
struct ScaledSample {
  Mat H;
  double scale = 1.0;
};

inline Estimate worst_case_rate(double prelog, const McConfig& cfg,
                                const std::function<ScaledSample(Rng&)>& draw) {
  require(prelog >= 0.0 && prelog <= 1.0, errc::invalid_input, "prelog must lie in [0, 1]");
  Estimate e = expect(cfg, [&](Rng& rng, std::uint64_t) {
    const ScaledSample s = draw(rng);
    if (!all_finite(s.H) || !std::isfinite(s.scale)) return std::numeric_limits<double>::quiet_NaN();
    return log2det_gram(s.H, s.scale);
  });
  return prelog * e;
}

// Effective SNR of the single-user scheme on the r-dimensional projected prior Rbar.
inline double effective_snr(const Mat& Rbar, double rho_tau, double rho_delta) {
  const auto r = static_cast<double>(Rbar.rows());
  require(Rbar.rows() >= 1, errc::invalid_input, "empty prior");
  require(is_pd(Rbar), errc::rank_deficiency, "Rbar is singular; project to its support first");
  if (rho_delta == 0.0) return 0.0;
  const double q_inv = 1.0 / (rho_tau + trace_re(inv_pd(Rbar)) / r);
  return rho_delta * (trace_re(Rbar) - r * q_inv) / (rho_delta * r * q_inv + r);
}

}  // namespace corrbc
