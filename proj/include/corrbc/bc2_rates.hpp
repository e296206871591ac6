#pragma once

#include "p2p_rates.hpp"

#include <array>
#include <string>
#include <vector>

namespace corrbc {

struct SchemeDims {
  int s0 = 0, s1 = 0, s2 = 0;
};

inline BroadcastConfig swap_users(BroadcastConfig c) {
  std::swap(c.users[0], c.users[1]);
  return c;
}

inline int common_rank(const BroadcastConfig& c) {
  return static_cast<int>(intersect(c.users[0].U, c.users[1].U).dim());
}

inline void validate(const SchemeDims& d, const BroadcastConfig& c) {
  require(c.users.size() == 2, errc::invalid_config, "two users required");
  const int r0 = common_rank(c);
  require(d.s0 >= 0 && d.s1 >= 0 && d.s2 >= 0, errc::scheme_dims, "negative dimension");
  require(d.s0 <= r0, errc::scheme_dims, "s0 exceeds r0");
  require(d.s1 <= c.users[0].r() - r0, errc::scheme_dims, "s1 exceeds r1 - r0");
  require(d.s2 <= c.users[1].r() - r0, errc::scheme_dims, "s2 exceeds r2 - r0");
  require(d.s0 + std::max(d.s1, d.s2) < c.T, errc::scheme_dims, "training exceeds the block");
}

namespace detail {

// Equivalent-channel geometry of user k seen through [V0 Vk].
struct UserView {
  Mat Rbar;  ///< Phi^H Sigma Phi, (s0+sk) square
  Mat Phi;   ///< U^H [V0 Vk]
  int s0 = 0, sk = 0;
  Mat R0() const { return Rbar.leftCols(s0); }
  Mat Rk() const { return Rbar.rightCols(sk); }
  Mat breve0() const { return Rbar.topLeftCorner(s0, s0); }
  Mat brevek() const { return Rbar.bottomRightCorner(sk, sk); }
};

inline UserView view(const UserCorrelation& u, const Mat& V0, const Mat& Vk) {
  UserView v;
  v.s0 = static_cast<int>(V0.cols());
  v.sk = static_cast<int>(Vk.cols());
  v.Phi = u.U.basis.adjoint() * hcat(V0, Vk);
  v.Rbar = hermitian_part(v.Phi.adjoint() * u.Sigma_mat() * v.Phi);
  return v;
}

inline Mat diag_blocks(int n0, double v0, int n1, double v1) {
  RVec d(n0 + n1);
  d.head(n0).setConstant(v0);
  d.tail(n1).setConstant(v1);
  return Mat(d.cast<cd>().asDiagonal());
}

// Estimate covariance R P^{1/2}(P^{1/2} R P^{1/2} + I)^{-1} P^{1/2} R for diagonal P.
inline Mat est_cov_diag(const Mat& R, const Mat& P) {
  const Mat Ph = P.cwiseSqrt();
  const Mat A = hermitian_part(Ph * R * Ph) + identity(R.rows());
  return hermitian_part(R * Ph * A.llt().solve(Ph * R));
}

inline double safe_div(double a, int b) { return b > 0 ? a / b : 0.0; }

}  // namespace detail

// ---------------------------------------------------------------- rate splitting

struct RsPowers {
  double rho0_tau = 0, rho0_delta = 0, rho1_tau = 0, rho1_delta = 0, rho2_tau = 0, rho2_delta = 0;
};

inline double rs_energy(const RsPowers& p, const SchemeDims& d, int T) {
  return p.rho0_tau * d.s0 + p.rho0_delta * (T - d.s1 - d.s0) + p.rho1_tau * d.s1 +
         p.rho1_delta * (T - d.s1 - d.s0) + p.rho2_tau * d.s2 + p.rho2_delta * (T - d.s2 - d.s0);
}

// Equal pilot power per trained dimension; data energy split into common (gamma) and
// private parts (w for user 1); alpha is the data share of rho T.
inline RsPowers rs_powers_from(double rho, int T, const SchemeDims& d, double alpha, double gamma, double w) {
  RsPowers p;
  const int train = d.s0 + d.s1 + d.s2;
  if (train == 0) return p;
  const double E = rho * T;
  const double tau = (1.0 - alpha) * E / train;
  p.rho0_tau = d.s0 ? tau : 0.0;
  p.rho1_tau = d.s1 ? tau : 0.0;
  p.rho2_tau = d.s2 ? tau : 0.0;
  const double g = d.s0 ? gamma : 0.0;
  double w1 = w;
  if (d.s1 == 0) w1 = 0.0;
  if (d.s2 == 0) w1 = d.s1 ? 1.0 : 0.0;
  const double priv = (d.s1 || d.s2) ? (1.0 - g) : 0.0;
  const double common = (d.s1 || d.s2) ? g : (d.s0 ? 1.0 : 0.0);
  p.rho0_delta = common * alpha * E / (T - d.s1 - d.s0);
  p.rho1_delta = priv * w1 * alpha * E / (T - d.s1 - d.s0);
  p.rho2_delta = priv * (1.0 - w1) * alpha * E / (T - d.s2 - d.s0);
  return p;
}

struct RsTerms {
  Estimate R1_prime, R1_p, R1_dprime, R2_prime, R2_p, R0_dprime;
};

// The six expectations of the rate-splitting region, requires s1 >= s2.
inline RsTerms rs_terms(const BroadcastConfig& cfg, const SchemeDims& d, const RsPowers& pw,
                        const McConfig& mc) {
  validate(d, cfg);
  require(d.s1 >= d.s2, errc::scheme_dims, "rate splitting expects s1 >= s2; swap the users");
  require(rs_energy(pw, d, cfg.T) <= cfg.rho * cfg.T * (1 + 1e-9) + 1e-12, errc::power,
          "rate-splitting power budget exceeded");
  const auto& u1 = cfg.users[0];
  const auto& u2 = cfg.users[1];
  const PrecoderSet2 V = build_precoders2(u1.U, u2.U, d.s0, d.s1, d.s2);
  const int T = cfg.T;
  const double pl = 1.0 - static_cast<double>(d.s1 + d.s0) / T;
  const double pl_a = static_cast<double>(d.s1 - d.s2) / T;

  struct Side {
    detail::UserView v;
    Mat root, Pd_half;
    double D = 1.0, pk = 0.0, p0 = 0.0;
    int N = 1;
    bool active = false;
  };
  auto prepare = [&](const UserCorrelation& u, const Mat& Vk, double rk_tau, double rk_delta) {
    Side s;
    s.v = detail::view(u, V.V0, Vk);
    s.N = u.N;
    const int m = s.v.s0 + s.v.sk;
    if (m == 0) return s;
    require(is_pd(s.v.Rbar, 1e-10), errc::rank_deficiency, "projected correlation is singular");
    const Mat Pt = detail::diag_blocks(s.v.s0, pw.rho0_tau, s.v.sk, rk_tau);
    const Mat Pd = detail::diag_blocks(s.v.s0, detail::safe_div(pw.rho0_delta, s.v.s0), s.v.sk,
                                       detail::safe_div(rk_delta, s.v.sk));
    const Mat Ph = Pt.cwiseSqrt();
    const Mat A = hermitian_part(Ph * s.v.Rbar * Ph) + identity(m);
    s.root = sqrt_psd(hermitian_part(Ph * A.llt().solve(Ph)));
    const Mat err = hermitian_part(s.v.Rbar - detail::est_cov_diag(s.v.Rbar, Pt));
    s.D = trace_re(err * Pd) + 1.0;
    s.Pd_half = Pd.cwiseSqrt();
    s.pk = detail::safe_div(rk_delta, s.v.sk) / s.D;
    s.p0 = detail::safe_div(pw.rho0_delta, s.v.s0) / s.D;
    s.active = true;
    return s;
  };
  const Side a = prepare(u1, V.V1, pw.rho1_tau, pw.rho1_delta);
  const Side b = prepare(u2, V.V2, pw.rho2_tau, pw.rho2_delta);

  double scale_a = 0.0;
  if (b.active && d.s2 > 0 && d.s1 > d.s2) {
    const Mat& R2 = b.v.Rbar;
    const Mat Pt = detail::diag_blocks(d.s0, pw.rho0_tau, d.s2, pw.rho2_tau);
    const Mat B = hermitian_part(R2 + R2 * Pt * R2);
    const Mat R22 = b.v.Rk();
    const double tr = trace_re(R22.adjoint() * B.llt().solve(R22));
    scale_a = pw.rho2_delta / (pw.rho2_delta * tr + d.s2);
  }

  auto res = expect_multi(mc, 6, [&](Rng& rng, std::uint64_t, double* out) {
    std::fill(out, out + 6, 0.0);
    if (a.active) {
      const Mat Om = crandn(a.N, a.root.rows(), rng) * a.root;
      const Mat F = Om * a.v.Rbar;
      out[0] = pl * log2det_gram(F * a.Pd_half, 1.0 / a.D);
      if (d.s1 > 0) out[1] = pl * log2det_gram(Om * a.v.Rk(), a.pk);
      if (d.s0 > 0) out[2] = pl * log2det_gram(Om * a.v.R0(), a.p0);
    }
    if (b.active) {
      const Mat Om = crandn(b.N, b.root.rows(), rng) * b.root;
      const Mat F = Om * b.v.Rbar;
      const double head = scale_a > 0.0 ? pl_a * log2det_gram(Om * b.v.Rk(), scale_a) : 0.0;
      out[3] = head + pl * log2det_gram(F * b.Pd_half, 1.0 / b.D);
      out[4] = head + (d.s2 > 0 ? pl * log2det_gram(Om * b.v.Rk(), b.pk) : 0.0);
      if (d.s0 > 0) out[5] = pl * log2det_gram(Om * b.v.R0(), b.p0);
    }
  });
  return {res[0], res[1], res[2], res[3], res[4], res[5]};
}

inline RsTerms swap_terms(const RsTerms& t) {
  return {t.R2_prime, t.R2_p, t.R0_dprime, t.R1_prime, t.R1_p, t.R1_dprime};
}

// Any s1, s2: for s1 < s2 the users' roles are swapped and the terms mapped back.
inline RsTerms rs_terms_any(const BroadcastConfig& cfg, const SchemeDims& d, const RsPowers& pw,
                            const McConfig& mc) {
  if (d.s1 >= d.s2) return rs_terms(cfg, d, pw, mc);
  const RsPowers q{pw.rho0_tau, pw.rho0_delta, pw.rho2_tau, pw.rho2_delta, pw.rho1_tau, pw.rho1_delta};
  return swap_terms(rs_terms(swap_users(cfg), {d.s0, d.s2, d.s1}, q, mc));
}

// Vertices of {R1 <= a, R2 <= b, R1 + R2 <= c, R >= 0}.
inline std::vector<DPoint> pentagon(double a, double b, double c) {
  a = std::max(a, 0.0);
  b = std::max(b, 0.0);
  c = std::max(c, 0.0);
  const double x = std::min(a, c), y = std::min(b, c);
  std::vector<DPoint> v{{0, 0}, {x, 0}, {x, std::clamp(c - x, 0.0, y)}, {std::clamp(c - y, 0.0, x), y}, {0, y}};
  return convex_hull(v);
}

inline DRegion rs_region_point(const RsTerms& t) {
  const double a = std::min(t.R1_prime.mean, t.R1_p.mean + t.R0_dprime.mean);
  const double b = std::min(t.R2_prime.mean, t.R2_p.mean + t.R1_dprime.mean);
  const double c = std::min(t.R1_p.mean + t.R2_prime.mean, t.R1_prime.mean + t.R2_p.mean);
  return DRegion::from_points(pentagon(a, b, c));
}

// Normalized mutual informations (already divided by T).
struct MacInfos {
  double I1_both = 0, I1_priv_given_common = 0, I1_common_given_priv = 0;
  double I2_both = 0, I2_priv_given_common = 0, I2_common_given_priv = 0;
};

inline DRegion lemma4_bounds(const MacInfos& m) {
  const double a = std::min(m.I1_both, m.I1_priv_given_common + m.I2_common_given_priv);
  const double b = std::min(m.I2_both, m.I2_priv_given_common + m.I1_common_given_priv);
  const double c = std::min(m.I1_priv_given_common + m.I2_both, m.I1_both + m.I2_priv_given_common);
  return DRegion::from_points(pentagon(a, b, c));
}

// ---------------------------------------------------------------- product superposition

struct PsPowers {
  double nu1_tau = 0, nu1_delta = 0, nu1_a = 0, rho2_tau = 0, rho2_delta = 0;
};

inline double ps_energy(const PsPowers& p, int s0, int s2, int T) {
  if (s0 + s2 == 0) return 0.0;
  return (s0 * p.nu1_tau + s2 * (p.nu1_delta + p.nu1_a)) *
         (p.rho2_tau + static_cast<double>(T - s2 - s0) / (s2 + s0) * p.rho2_delta);
}

// X1 normalized to s0 + s2 energy per column block (nu1_tau = kappa, remaining split by beta);
// X2 carries rho T with data share alpha.
inline PsPowers ps_powers_from(double rho, int T, int s0, int s2, double alpha, double beta, double kappa = 1.0) {
  PsPowers p;
  const int m = s0 + s2;
  if (m == 0) return p;
  p.nu1_tau = s0 ? (s2 ? kappa : 1.0) : 0.0;
  if (s2 > 0) {
    const double rest = (m - s0 * p.nu1_tau) / s2;
    p.nu1_delta = s0 ? beta * rest : 0.0;
    p.nu1_a = rest - p.nu1_delta;
  }
  p.rho2_tau = (1.0 - alpha) * rho * T / m;
  p.rho2_delta = alpha * rho * T / (T - m);
  return p;
}

struct PairRates {
  Estimate R1, R2;
  double R2_unclamped = 0.0;
};

// Transmit block [V0 V2] X1 X2 for the budget check.
inline Mat ps_transmit_block(const Mat& V0, const Mat& V2, const PsPowers& p, int T, Rng& rng) {
  const int s0 = static_cast<int>(V0.cols()), s2 = static_cast<int>(V2.cols()), m = s0 + s2;
  Mat X1 = Mat::Zero(m, m);
  X1.topLeftCorner(s0, s0) = scaled_identity(s0, std::sqrt(p.nu1_tau));
  if (s0 > 0) X1.topRightCorner(s0, s2) = std::sqrt(p.nu1_delta / s0) * crandn(s0, s2, rng);
  X1.bottomRightCorner(s2, s2) = scaled_identity(s2, std::sqrt(p.nu1_a));
  Mat X2(m, T);
  X2.leftCols(m) = scaled_identity(m, std::sqrt(p.rho2_tau));
  X2.rightCols(T - m) = std::sqrt(p.rho2_delta / m) * crandn(m, T - m, rng);
  return hcat(V0, V2) * X1 * X2;
}

inline PairRates ps_rates(const BroadcastConfig& cfg, int s0, int s2, const PsPowers& pw, const McConfig& mc) {
  validate(SchemeDims{s0, 0, s2}, cfg);
  const int T = cfg.T, m = s0 + s2;
  require(m >= 1, errc::scheme_dims, "product superposition needs s0 + s2 >= 1");
  require(ps_energy(pw, s0, s2, T) <= cfg.rho * T * (1 + 1e-9) + 1e-12, errc::power,
          "product-superposition power budget exceeded");
  const auto& u1 = cfg.users[0];
  const auto& u2 = cfg.users[1];
  const PrecoderSet2 V = build_precoders2(u1.U, u2.U, s0, 0, s2);

  // user 1 decodes S1 in the s2 cross slots through V0
  Mat root1, Rb10;
  double c1 = 0.0;
  const bool r1_on = s0 > 0 && s2 > 0 && pw.nu1_delta > 0 && pw.rho2_tau > 0;
  if (r1_on) {
    const Mat Phi10 = u1.U.basis.adjoint() * V.V0;
    Rb10 = hermitian_part(Phi10.adjoint() * u1.Sigma_mat() * Phi10);
    const double a = pw.nu1_tau * pw.rho2_tau;
    const Mat A = hermitian_part(a * Rb10) + identity(s0);
    const Mat est = hermitian_part(a * Rb10 * A.llt().solve(Rb10));
    const double tr_err = trace_re(Rb10 - est);
    c1 = pw.nu1_delta * pw.rho2_tau / (s0 + pw.nu1_delta * pw.rho2_tau * tr_err);
    root1 = sqrt_psd(est);
  }

  // user 2: equivalent correlation of G2 Sigma^{1/2} Phi2 X1
  const detail::UserView v2 = detail::view(u2, V.V0, V.V2);
  const Mat& A2 = v2.Rbar;
  Mat R2e = Mat::Zero(m, m);
  R2e.topLeftCorner(s0, s0) = pw.nu1_tau * A2.topLeftCorner(s0, s0);
  R2e.topRightCorner(s0, s2) = std::sqrt(pw.nu1_tau * pw.nu1_a) * A2.topRightCorner(s0, s2);
  R2e.bottomLeftCorner(s2, s0) = R2e.topRightCorner(s0, s2).adjoint();
  R2e.bottomRightCorner(s2, s2) =
      pw.nu1_a * A2.bottomRightCorner(s2, s2) +
      scaled_identity(s2, s0 ? pw.nu1_delta / s0 * trace_re(A2.topLeftCorner(s0, s0)) : 0.0);
  const Mat B = hermitian_part(pw.rho2_tau * R2e) + identity(m);
  const Mat K2 = std::sqrt(pw.rho2_tau) * B.llt().solve(R2e);
  const double tr_err2 = trace_re(R2e - pw.rho2_tau * R2e * B.llt().solve(R2e));
  const double c2 = pw.rho2_delta / (m + pw.rho2_delta * tr_err2);
  const Mat S2h = u2.Sigma.cwiseSqrt().cast<cd>().asDiagonal() * v2.Phi;
  const double pl1 = static_cast<double>(s2) / T;
  const double pl2 = 1.0 - static_cast<double>(m) / T;

  auto res = expect_multi(mc, 2, [&](Rng& rng, std::uint64_t, double* out) {
    out[0] = r1_on ? pl1 * log2det_gram(crandn(u1.N, s0, rng) * root1, c1) : 0.0;
    Mat X1 = Mat::Zero(m, m);
    X1.topLeftCorner(s0, s0) = scaled_identity(s0, std::sqrt(pw.nu1_tau));
    if (s0 > 0 && s2 > 0) X1.topRightCorner(s0, s2) = std::sqrt(pw.nu1_delta / s0) * crandn(s0, s2, rng);
    X1.bottomRightCorner(s2, s2) = scaled_identity(s2, std::sqrt(pw.nu1_a));
    const Mat G2e = crandn(u2.N, u2.r(), rng) * S2h * X1;
    const Mat Y = std::sqrt(pw.rho2_tau) * G2e + crandn(u2.N, m, rng);
    out[1] = pw.rho2_delta > 0 ? pl2 * log2det_gram(Y * K2, c2) : 0.0;
  });
  return {res[0], res[1], res[1].mean};
}

// ---------------------------------------------------------------- hybrid superposition

struct HybridPowers {
  double nu2_tau = 0, nu2_delta = 0, nu2_a = 0, rho1_tau = 0, rho1_delta = 0, rho2_tau = 0, rho2_delta = 0;
};

inline double hybrid_energy(const HybridPowers& p, const SchemeDims& d, int T) {
  const int m1 = d.s1 + d.s0;
  const double x1 = m1 ? p.rho1_tau + static_cast<double>(T - m1) / m1 * p.rho1_delta : 0.0;
  return (d.s0 * p.nu2_tau + d.s1 * p.nu2_a + (d.s1 - d.s2) * p.nu2_delta) * x1 + d.s2 * p.rho2_tau +
         (T - d.s2 - d.s0) * p.rho2_delta;
}

// X2' normalized to s0 + s1 (nu2_tau = 1, nu2_delta = beta); a share f of rho T goes through
// user 1's X1, the rest to user 2's private stream; alpha is the data share of each part.
inline HybridPowers hybrid_powers_from(double rho, int T, const SchemeDims& d, double alpha, double beta, double f) {
  HybridPowers p;
  const int m1 = d.s1 + d.s0;
  const double E = rho * T;
  if (m1 > 0) {
    p.nu2_tau = d.s0 ? 1.0 : 0.0;
    p.nu2_delta = (d.s0 && d.s1 > d.s2) ? beta : 0.0;
    p.nu2_a = d.s1 ? (m1 - d.s0 * p.nu2_tau - (d.s1 - d.s2) * p.nu2_delta) / d.s1 : 0.0;
    if (p.nu2_a < 0.0) p.nu2_a = 0.0;
    p.rho1_tau = (1.0 - alpha) * f * E / m1;
    p.rho1_delta = alpha * f * E / (T - m1);
  }
  if (d.s2 > 0) {
    p.rho2_tau = (1.0 - alpha) * (1.0 - f) * E / d.s2;
    p.rho2_delta = alpha * (1.0 - f) * E / (T - d.s2 - d.s0);
  }
  return p;
}

inline PairRates hybrid_rates(const BroadcastConfig& cfg, const SchemeDims& d, const HybridPowers& pw,
                              const McConfig& mc) {
  validate(d, cfg);
  require(d.s1 >= d.s2, errc::scheme_dims, "hybrid superposition expects s1 >= s2");
  require(!(d.s0 == 0 && pw.nu2_delta > 0 && d.s1 > d.s2), errc::scheme_dims,
          "s0 = 0 with nu2_delta > 0 divides by s0");
  require(hybrid_energy(pw, d, cfg.T) <= cfg.rho * cfg.T * (1 + 1e-9) + 1e-12, errc::power,
          "hybrid power budget exceeded");
  const auto& u1 = cfg.users[0];
  const auto& u2 = cfg.users[1];
  const int T = cfg.T, s0 = d.s0, s1 = d.s1, s2 = d.s2, m1 = s0 + s1, m2 = s0 + s2, sd = s1 - s2;
  const PrecoderSet2 V = build_precoders2(u1.U, u2.U, s0, s1, s2);
  const detail::UserView v1 = detail::view(u1, V.V0, V.V1);
  const detail::UserView v2 = detail::view(u2, V.V0, V.V2);

  // user 1 equivalent correlation
  Mat R1e = Mat::Zero(m1, m1);
  Mat K1, S1h;
  double c1 = 0.0;
  const bool r1_on = m1 > 0 && pw.rho1_delta > 0;
  if (r1_on) {
    const Mat& Bm = v1.Rbar;
    R1e.topLeftCorner(s0, s0) = pw.nu2_tau * Bm.topLeftCorner(s0, s0);
    R1e.topRightCorner(s0, s1) = std::sqrt(pw.nu2_tau * pw.nu2_a) * Bm.topRightCorner(s0, s1);
    R1e.bottomLeftCorner(s1, s0) = R1e.topRightCorner(s0, s1).adjoint();
    Mat low = pw.nu2_a * Bm.bottomRightCorner(s1, s1);
    if (s0 > 0 && sd > 0)
      low.bottomRightCorner(sd, sd) += scaled_identity(sd, pw.nu2_delta / s0 * trace_re(Bm.topLeftCorner(s0, s0)));
    R1e.bottomRightCorner(s1, s1) = low;
    const Mat B = hermitian_part(pw.rho1_tau * R1e) + identity(m1);
    K1 = std::sqrt(pw.rho1_tau) * B.llt().solve(R1e);
    const double tr_err = trace_re(R1e - pw.rho1_tau * R1e * B.llt().solve(R1e));
    c1 = pw.rho1_delta / (m1 + pw.rho1_delta * tr_err);
    S1h = u1.Sigma.cwiseSqrt().cast<cd>().asDiagonal() * v1.Phi;
  }

  // user 2
  const double a_pow = m1 ? pw.rho1_delta / m1 * (pw.nu2_tau + (s0 ? pw.nu2_delta * sd / s0 : 0.0)) : 0.0;
  Mat root2, Pa_half, Pb_half, root20;
  double Da = 1.0, Db = 1.0;
  const bool r2_on = m2 > 0;
  if (r2_on) {
    const Mat Pt = detail::diag_blocks(s0, pw.nu2_tau * pw.rho1_tau, s2, pw.rho2_tau);
    const Mat est = detail::est_cov_diag(v2.Rbar, Pt);
    const Mat err = hermitian_part(v2.Rbar - est);
    const Mat Pa = detail::diag_blocks(s0, s0 ? pw.nu2_delta * pw.rho1_tau / s0 : 0.0, s2,
                                       detail::safe_div(pw.rho2_delta, s2));
    const Mat Pb = detail::diag_blocks(s0, a_pow, s2, detail::safe_div(pw.rho2_delta, s2));
    Da = trace_re(err * Pa) + 1.0;
    Db = trace_re(err * Pb) + 1.0;
    root2 = sqrt_psd(est);
    Pa_half = Pa.cwiseSqrt();
    Pb_half = Pb.cwiseSqrt();
    root20 = sqrt_psd(v2.breve0());
  }
  const double pl_a = static_cast<double>(sd) / T;
  const double pl = 1.0 - static_cast<double>(m1) / T;

  auto res = expect_multi(mc, 4, [&](Rng& rng, std::uint64_t, double* out) {
    std::fill(out, out + 4, 0.0);
    if (r1_on) {
      Mat X = Mat::Zero(m1, m1);
      X.topLeftCorner(s0, s0) = scaled_identity(s0, std::sqrt(pw.nu2_tau));
      if (s0 > 0 && sd > 0) X.block(0, s0 + s2, s0, sd) = std::sqrt(pw.nu2_delta / s0) * crandn(s0, sd, rng);
      X.bottomRightCorner(s1, s1) = scaled_identity(s1, std::sqrt(pw.nu2_a));
      const Mat G1e = crandn(u1.N, u1.r(), rng) * S1h * X;
      const Mat Y = std::sqrt(pw.rho1_tau) * G1e + crandn(u1.N, m1, rng);
      out[0] = pl * log2det_gram(Y * K1, c1);
    }
    if (r2_on) {
      const Mat Om = crandn(u2.N, m2, rng) * root2;
      if (sd > 0) out[1] = pl_a * log2det_gram(Om * Pa_half, 1.0 / Da);
      out[2] = pl * log2det_gram(Om * Pb_half, 1.0 / Db);
      if (s0 > 0 && a_pow > 0) out[3] = pl * log2det_gram(crandn(u2.N, s0, rng) * root20, a_pow);
    }
  });
  const double raw = res[1].mean + res[2].mean - res[3].mean;
  Estimate R2 = res[1] + res[2] + res[3];
  R2.mean = std::max(0.0, raw);
  return {res[0], R2, raw};
}

// ---------------------------------------------------------------- sweeps

enum class Scheme { rate_splitting, product_superposition, hybrid };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::rate_splitting: return "rs";
    case Scheme::product_superposition: return "ps";
    case Scheme::hybrid: return "hybrid";
  }
  return "?";
}

// Parameter grids; meaning per scheme:
//   rs:     a = data share alpha, b = common share gamma, c = user-1 private share w
//   ps:     a = data share alpha, b = S1 share beta of the cross rows, c = nu1_tau
//   hybrid: a = data share alpha, b = nu2_delta, c = user-1 share f of rho T
struct SweepGrid {
  std::vector<SchemeDims> dims;  ///< empty = exhaustive
  std::vector<double> a{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> b{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> c{0.1, 0.3, 0.5, 0.7, 0.9};
  bool swap_roles = false;  ///< ps/hybrid: also evaluate with the users swapped
};

struct SweepPoint {
  SchemeDims dims;
  std::array<double, 3> params{};
  bool swapped = false;
  Estimate R1, R2;  ///< for rs: the pentagon's equal-weight corner values
  double ci = 0.0;  ///< largest half-width among the point's rate terms
  std::vector<DPoint> vertices;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  DRegion region;
};

inline std::vector<SchemeDims> exhaustive_dims(const BroadcastConfig& cfg, Scheme s) {
  const int r0 = common_rank(cfg);
  const int e1 = static_cast<int>(cfg.users[0].r()) - r0;
  const int e2 = static_cast<int>(cfg.users[1].r()) - r0;
  std::vector<SchemeDims> out;
  for (int s0 = 0; s0 <= r0; ++s0)
    for (int s1 = 0; s1 <= (s == Scheme::product_superposition ? 0 : e1); ++s1)
      for (int s2 = 0; s2 <= e2; ++s2) {
        if (s0 + s1 + s2 == 0) continue;
        if (s == Scheme::hybrid && s1 < s2) continue;
        if (s0 + std::max(s1, s2) >= cfg.T) continue;
        out.push_back({s0, s1, s2});
      }
  return out;
}

inline SweepResult region_sweep(const BroadcastConfig& cfg, Scheme scheme, const SweepGrid& grid,
                                const McConfig& mc, const TdmaResult* tdma = nullptr) {
  SweepResult out;
  std::vector<DPoint> cloud;
  if (tdma) {
    cloud.push_back({tdma->R1.mean, 0.0});
    cloud.push_back({0.0, tdma->R2.mean});
  }
  std::uint64_t index = 0;
  auto run = [&](const BroadcastConfig& c, bool swapped) {
    const auto dims = grid.dims.empty() ? exhaustive_dims(c, scheme) : grid.dims;
    for (const auto& d : dims)
      for (double pa : grid.a)
        for (double pb : grid.b)
          for (double pc : grid.c) {
            McConfig m = mc;
            m.master_seed = mix64(mc.master_seed ^ (0x5851f42d4c957f2dULL * ++index));
            SweepPoint sp{d, {pa, pb, pc}, swapped, {}, {}, 0.0, {}};
            try {
              if (scheme == Scheme::rate_splitting) {
                const RsTerms t = rs_terms_any(c, d, rs_powers_from(c.rho, c.T, d, pa, pb, pc), m);
                sp.vertices = rs_region_point(t).hull;
                sp.R1 = t.R1_prime;
                sp.R2 = t.R2_prime;
                for (const Estimate* x : {&t.R1_prime, &t.R1_p, &t.R1_dprime, &t.R2_prime, &t.R2_p, &t.R0_dprime})
                  sp.ci = std::max(sp.ci, x->ci);
              } else if (scheme == Scheme::product_superposition) {
                const PairRates p = ps_rates(c, d.s0, d.s2, ps_powers_from(c.rho, c.T, d.s0, d.s2, pa, pb, pc), m);
                sp.R1 = p.R1;
                sp.R2 = p.R2;
                sp.vertices = {{p.R1.mean, p.R2.mean}};
              } else {
                const PairRates p = hybrid_rates(c, d, hybrid_powers_from(c.rho, c.T, d, pa, pb, pc), m);
                sp.R1 = p.R1;
                sp.R2 = p.R2;
                sp.vertices = {{p.R1.mean, p.R2.mean}};
              }
            } catch (const error& e) {
              if (e.code() != errc::power && e.code() != errc::scheme_dims && e.code() != errc::rank_deficiency)
                throw;
              continue;
            }
            if (scheme != Scheme::rate_splitting) sp.ci = std::max(sp.R1.ci, sp.R2.ci);
            if (swapped) {
              std::swap(sp.R1, sp.R2);
              for (auto& v : sp.vertices) std::swap(v.x, v.y);
            }
            cloud.insert(cloud.end(), sp.vertices.begin(), sp.vertices.end());
            out.points.push_back(sp);
          }
  };
  run(cfg, false);
  if (grid.swap_roles && scheme != Scheme::rate_splitting) run(swap_users(cfg), true);
  out.region = DRegion::from_points(cloud, true);
  return out;
}

}  // namespace corrbc
