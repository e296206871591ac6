#pragma once

#include "channel.hpp"
#include "estimation.hpp"
#include "hull.hpp"

#include <algorithm>
#include <functional>

namespace corrbc {

struct PowerSplit {
  double rho_tau = 0.0;
  double rho_delta = 0.0;
  int pilot_len = 0;
  int data_len = 0;
};

inline void validate(const PowerSplit& s, double rho, int T) {
  require(s.rho_tau >= 0.0 && s.rho_delta >= 0.0, errc::power, "negative power");
  require(s.pilot_len >= 0 && s.data_len >= 0 && s.pilot_len + s.data_len <= T, errc::invalid_config,
          "pilot and data lengths exceed T");
  require(s.rho_tau * s.pilot_len + s.rho_delta * s.data_len <= rho * T * (1.0 + 1e-9) + 1e-12,
          errc::power, "power budget exceeded");
}

// Fraction alpha of the block energy rho T goes to data.
inline PowerSplit split_from_alpha(double rho, int T, int pilot_len, double alpha) {
  require(pilot_len >= 1 && pilot_len < T, errc::invalid_config, "pilot length must lie in [1, T)");
  require(alpha >= 0.0 && alpha <= 1.0, errc::invalid_input, "alpha must lie in [0, 1]");
  const int data_len = T - pilot_len;
  return {(1.0 - alpha) * rho * T / pilot_len, alpha * rho * T / data_len, pilot_len, data_len};
}

// Positive eigenvalues of a PSD correlation matrix.
inline RVec support_eigenvalues(const Mat& R, double tol = kRankTol) {
  RVec ev = herm_eigenvalues(R);
  const double mx = ev.size() ? ev.maxCoeff() : 0.0;
  std::vector<double> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > mx * tol) keep.push_back(ev(i));
  return Eigen::Map<RVec>(keep.data(), static_cast<Eigen::Index>(keep.size()));
}

// Correlation-blind pilots: M orthogonal pilots, estimate over the full space.
inline Estimate rate_corr_blind(int M, int N, int T, const Mat& R, const PowerSplit& split,
                                const McConfig& mc) {
  require(R.rows() == M && R.cols() == M, errc::invalid_input, "R must be M x M");
  require(T >= 2 * M, errc::invalid_config, "correlation-blind pilots need T >= 2M");
  require(split.pilot_len == M, errc::invalid_config, "pilot length must equal M");
  require(is_psd(R), errc::invalid_input, "R must be PSD");
  if (split.rho_delta == 0.0 || split.rho_tau == 0.0) return {};
  const RVec sig = support_eigenvalues(R);
  double tr = 0.0;
  for (Eigen::Index i = 0; i < sig.size(); ++i) tr += 1.0 / (1.0 / sig(i) + split.rho_tau);
  const double c = split.rho_delta * split.rho_tau / (split.rho_delta * tr + M);
  const Mat A = identity(M) + split.rho_tau * R;
  const Mat C = hermitian_part(R * A.llt().solve(R));
  const Mat root = sqrt_psd(C);
  return worst_case_rate(1.0 - static_cast<double>(M) / T, mc, [&](Rng& rng) {
    return ScaledSample{crandn(N, M, rng) * root, c};
  });
}

// Orthogonal pilots along the r-dimensional eigenspace with projected prior Rbar.
inline Estimate rate_orth_pilot(int r, int N, int T, const Mat& Rbar, const PowerSplit& split,
                                const McConfig& mc) {
  require(Rbar.rows() == r && Rbar.cols() == r, errc::invalid_input, "Rbar must be r x r");
  require(split.pilot_len == r, errc::invalid_config, "pilot length must equal r");
  require(T > r, errc::invalid_config, "T must exceed r");
  require(is_pd(Rbar), errc::rank_deficiency, "Rbar is singular");
  if (split.rho_delta == 0.0 || split.rho_tau == 0.0) return {};
  const Mat err = inv_pd(inv_pd(Rbar) + scaled_identity(r, split.rho_tau));
  const double c = split.rho_delta * split.rho_tau / (split.rho_delta * trace_re(err) + r);
  const Mat A = identity(r) + split.rho_tau * Rbar;
  const Mat root = sqrt_psd(hermitian_part(Rbar * A.llt().solve(Rbar)));
  return worst_case_rate(1.0 - static_cast<double>(r) / T, mc, [&](Rng& rng) {
    return ScaledSample{crandn(N, r, rng) * root, c};
  });
}

// Optimized (non-orthogonal) pilots.
inline Estimate rate_opt_pilot(int r, int N, int T, const Mat& Rbar, const PowerSplit& split,
                               const McConfig& mc) {
  require(Rbar.rows() == r && Rbar.cols() == r, errc::invalid_input, "Rbar must be r x r");
  require(split.pilot_len == r, errc::invalid_config, "pilot length must equal r");
  require(T > r, errc::invalid_config, "T must exceed r");
  require(is_pd(Rbar), errc::rank_deficiency, "Rbar is singular");
  if (split.rho_delta == 0.0) return {};
  const double q_inv = 1.0 / (split.rho_tau + trace_re(inv_pd(Rbar)) / r);
  const Mat C = hermitian_part(Rbar - scaled_identity(r, q_inv));
  require(is_psd(C, 1e-12), errc::infeasible_power, "pilot power too low for optimized pilots");
  const double c = split.rho_delta / (r * split.rho_delta * q_inv + r);
  const Mat root = sqrt_psd(C);
  return worst_case_rate(1.0 - static_cast<double>(r) / T, mc, [&](Rng& rng) {
    return ScaledSample{crandn(N, r, rng) * root, c};
  });
}

// Data-power fraction maximizing the effective SNR.
inline double optimal_alpha(int T, int r, double rho, const Mat& Rbar) {
  require(T >= 2 * r, errc::invalid_config, "optimal alpha needs T >= 2r");
  if (T == 2 * r) return 0.5;
  const double rT = rho * T;
  const double tr = trace_re(Rbar);
  const double tr_inv = trace_re(inv_pd(Rbar));
  const double a = 1.0 + tr_inv / rT - static_cast<double>(r) * r / (rT * tr);
  const double b = static_cast<double>(T - r) / (T - 2 * r) * (1.0 + tr_inv / rT);
  // past 1 the effective SNR still increases on (0, 1): the supremum sits at the edge
  return std::clamp(b - std::sqrt(b * (b - a)), 1e-9, 1.0 - 1e-9);
}

inline double effective_snr_alpha(int T, int r, double rho, const Mat& Rbar, double alpha) {
  const PowerSplit s = split_from_alpha(rho, T, r, alpha);
  return effective_snr(Rbar, s.rho_tau, s.rho_delta);
}

// Golden-section maximum of a unimodal f on (0, 1).
inline double golden_max(const std::function<double(double)>& f) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 1e-9, hi = 1.0 - 1e-9;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

// Closed form when T >= 2r, golden-section search on the effective SNR for r < T < 2r.
inline double best_alpha(int T, int r, double rho, const Mat& Rbar) {
  if (T >= 2 * r) return optimal_alpha(T, r, rho, Rbar);
  require(T > r, errc::invalid_config, "need T > r for a data phase");
  return golden_max([&](double a) { return effective_snr_alpha(T, r, rho, Rbar, a); });
}

// Orthogonal pilots: mean per-dimension SNR of the estimated channel, c tr(Rbar (I + rho_tau Rbar)^-1 Rbar) / r.
inline double orth_snr_alpha(int T, int r, double rho, const Mat& Rbar, double alpha) {
  const PowerSplit s = split_from_alpha(rho, T, r, alpha);
  const Mat err = inv_pd(inv_pd(Rbar) + scaled_identity(r, s.rho_tau));
  const double c = s.rho_delta * s.rho_tau / (s.rho_delta * trace_re(err) + r);
  const Mat A = identity(r) + s.rho_tau * Rbar;
  return c * trace_re(Rbar * A.llt().solve(Rbar)) / r;
}

// Single-user rate on the eigenspace with the optimal split; orthogonal pilots when the
// optimized form is infeasible.
inline Estimate eigen_rate(const UserCorrelation& u, int T, double rho, const McConfig& mc) {
  const int r = static_cast<int>(u.r());
  if (rho == 0.0) return {};
  const Mat Rbar = u.Sigma_mat();
  const PowerSplit s = split_from_alpha(rho, T, r, best_alpha(T, r, rho, Rbar));
  try {
    return rate_opt_pilot(r, u.N, T, Rbar, s, mc);
  } catch (const error& e) {
    if (e.code() != errc::infeasible_power) throw;
    const double a = golden_max([&](double x) { return orth_snr_alpha(T, r, rho, Rbar, x); });
    return rate_orth_pilot(r, u.N, T, Rbar, split_from_alpha(rho, T, r, a), mc);
  }
}

inline Estimate corr_blind_rate(const UserCorrelation& u, int T, double rho, const McConfig& mc) {
  const int M = static_cast<int>(u.M());
  if (rho == 0.0) return {};
  const PowerSplit s = split_from_alpha(rho, T, M, optimal_alpha(T, M, rho, identity(M)));
  return rate_corr_blind(M, u.N, T, u.R(), s, mc);
}

struct TdmaResult {
  Estimate R1, R2;
  DRegion region;
};

// Time sharing between the better of the correlation-blind and eigenspace single-user rates.
inline TdmaResult tdma_region(const BroadcastConfig& cfg, const McConfig& mc) {
  require(cfg.users.size() == 2, errc::invalid_config, "TDMA region needs two users");
  Estimate R[2];
  for (int k = 0; k < 2; ++k) {
    McConfig m = mc;
    m.master_seed = mix64(mc.master_seed + 101 * (k + 1));
    R[k] = eigen_rate(cfg.users[k], cfg.T, cfg.rho, m);
    if (cfg.T >= 2 * cfg.M) {
      const Estimate b = corr_blind_rate(cfg.users[k], cfg.T, cfg.rho, m);
      if (b.mean > R[k].mean) R[k] = b;
    }
  }
  return {R[0], R[1], DRegion::from_points({{R[0].mean, 0.0}, {0.0, R[1].mean}})};
}

}  // namespace corrbc
