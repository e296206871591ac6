#pragma once

#include "coloring.hpp"
#include "mc_engine.hpp"

#include <boost/math/special_functions/expint.hpp>

#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace corrbc {

inline double exp_integral_E1(double x) {
  require(x > 0.0 && std::isfinite(x), errc::domain, "E1 needs x > 0");
  return boost::math::expint(1, x);
}

// (L/T) log2(e) e^x E1(x), x = (2 rho + 1) / rho^2.
inline double onoff_delta_r1_closed(int L, int T, double rho) {
  require(rho > 0.0, errc::domain, "rho must be positive");
  const double x = (2 * rho + 1) / (rho * rho);
  return static_cast<double>(L) / T * std::numbers::log2e * std::exp(x) * exp_integral_E1(x);
}

// Single-antenna user with h = B g, g ~ CN(0, I).
struct MmUser {
  Mat B;
  std::vector<int> latent;  ///< per antenna, -1 if the row of B is zero; valid when sparse
  std::vector<cd> amp;
  bool sparse = false;

  explicit MmUser(Mat b) : B(std::move(b)) {
    const Eigen::Index M = B.rows();
    latent.assign(M, -1);
    amp.assign(M, cd(0));
    sparse = true;
    for (Eigen::Index i = 0; i < M && sparse; ++i)
      for (Eigen::Index j = 0; j < B.cols(); ++j)
        if (std::abs(B(i, j)) > 0.0) {
          if (latent[i] >= 0) {
            sparse = false;
            break;
          }
          latent[i] = static_cast<int>(j);
          amp[i] = B(i, j);
        }
  }
  Eigen::Index M() const { return B.rows(); }
  Eigen::Index r() const { return B.cols(); }
};

inline MmUser uncorrelated_user(int M) { return MmUser(identity(M)); }
inline MmUser fully_correlated_user(int M) { return MmUser(Mat::Ones(M, 1)); }

// sqrt(M/r) times the first r columns of the unitary DFT; tr R = M.
inline MmUser dft_user(int M, int r) {
  Mat B(M, r);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < r; ++j) B(i, j) = std::polar(1.0 / std::sqrt(static_cast<double>(r)), 2 * std::numbers::pi * i * j / M);
  return MmUser(B);
}

// Coordinate columns scaled to tr R = M.
inline MmUser coordinate_user(int M, const std::vector<int>& cols) {
  Mat B = Mat::Zero(M, static_cast<Eigen::Index>(cols.size()));
  const double s = cols.empty() ? 0.0 : std::sqrt(static_cast<double>(M) / cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) B(cols[j], static_cast<Eigen::Index>(j)) = s;
  return MmUser(B);
}

// LMMSE estimate of h from y = Xp^T h + w with the user's correlation known.
inline Vec lmmse_channel(const MmUser& u, const Mat& Xp, bool diagonal, const Vec& y) {
  if (diagonal && u.sparse) {
    const Eigen::Index r = u.r();
    Vec num = Vec::Zero(r);
    RVec den = RVec::Ones(r);
    for (Eigen::Index i = 0; i < u.M(); ++i) {
      const int j = u.latent[i];
      if (j < 0) continue;
      const cd a = Xp(i, i) * u.amp[i];
      num(j) += std::conj(a) * y(i);
      den(j) += std::norm(a);
    }
    return u.B * (num.array() / den.cast<cd>().array()).matrix();
  }
  const Mat A = Xp.transpose() * u.B;
  const Mat G = hermitian_part(A.adjoint() * A) + identity(u.r());
  return u.B * G.llt().solve(A.adjoint() * y);
}

struct FddDraw {
  std::vector<Vec> h, hhat;
  std::vector<double> dsig, dint;  ///< opportunistic data terms: signal gain and error term
};

struct FddScheme {
  std::string name;
  int K = 0, M = 0, T = 0;
  double bf_prelog = 0.0, bf_power = 0.0;
  std::vector<double> d_prelog, d_power;
  std::vector<int> d_user;
  // channel draws come from chan only, so schemes with the same users share channels
  std::function<void(Rng& chan, Rng& noise, FddDraw&)> draw;
};

inline std::vector<Vec> draw_channels(const std::vector<MmUser>& users, Rng& chan) {
  std::vector<Vec> h;
  h.reserve(users.size());
  for (const auto& u : users) h.push_back(u.B * crandn(u.r(), 1, chan));
  return h;
}

inline Vec noise(Eigen::Index n, Rng& rng) { return crandn(n, 1, rng); }

// Beamforming error term of user k.
inline double bf_interference(const FddDraw& d, std::size_t k) {
  double s = 0.0;
  for (std::size_t l = 0; l < d.h.size(); ++l) {
    const double nl = d.hhat[l].squaredNorm();
    if (nl <= 0.0) continue;
    const Vec& v = (l == k) ? Vec(d.h[k] - d.hhat[k]) : d.h[k];
    s += std::norm(d.hhat[l].dot(v)) / nl;
  }
  return s;
}

struct FddResult {
  std::string name;
  std::vector<Estimate> R, dR;
  std::vector<int> dR_user;
  Estimate sum;
  std::vector<double> bf_denominator, d_denominator;
};

struct FddRun {
  McConfig mc;
  std::size_t prepass_trials = 20000;
};

inline std::uint64_t channel_seed(std::uint64_t seed) { return mix64(seed ^ 0x6a09e667f3bcc908ULL); }

struct FrozenTerms {
  std::vector<double> bf, d;
};

inline FrozenTerms prepass(const FddScheme& s, const FddRun& run) {
  McConfig pc = run.mc;
  pc.master_seed = mix64(run.mc.master_seed + 0x3c6ef372fe94f82bULL);
  pc.trials = run.prepass_trials;
  const std::size_t nd = s.d_prelog.size();
  const std::uint64_t cs = channel_seed(pc.master_seed);
  auto e = expect_multi(pc, s.K + nd, [&](Rng& rng, std::uint64_t idx, double* out) {
    Rng chan = stream_rng(cs, idx, 1);
    FddDraw d;
    s.draw(chan, rng, d);
    for (int k = 0; k < s.K; ++k) out[k] = bf_interference(d, k);
    for (std::size_t j = 0; j < nd; ++j) out[s.K + j] = d.dint[j];
  });
  FrozenTerms f;
  for (int k = 0; k < s.K; ++k) f.bf.push_back(e[k].mean);
  for (std::size_t j = 0; j < nd; ++j) f.d.push_back(e[s.K + j].mean);
  return f;
}

// Per-trial rates given frozen denominators; writes K + nd + 1 values (last = sum).
inline void trial_rates(const FddScheme& s, const FrozenTerms& f, const FddDraw& d, double* out) {
  double sum = 0.0;
  for (int k = 0; k < s.K; ++k) {
    const double g = d.hhat[k].squaredNorm();
    const double p = s.bf_power;
    out[k] = s.bf_prelog * std::log2(1.0 + p * g / (p * f.bf[k] + 1.0));
    sum += out[k];
  }
  for (std::size_t j = 0; j < s.d_prelog.size(); ++j) {
    const double q = s.d_power[j];
    out[s.K + j] = s.d_prelog[j] * std::log2(1.0 + q * d.dsig[j] / (q * f.d[j] + 1.0));
    sum += out[s.K + j];
  }
  out[s.K + s.d_prelog.size()] = sum;
}

inline FddResult fdd_evaluate(const FddScheme& s, const FddRun& run) {
  const FrozenTerms f = prepass(s, run);
  const std::size_t nd = s.d_prelog.size();
  const std::uint64_t cs = channel_seed(run.mc.master_seed);
  auto e = expect_multi(run.mc, s.K + nd + 1, [&](Rng& rng, std::uint64_t idx, double* out) {
    Rng chan = stream_rng(cs, idx, 1);
    FddDraw d;
    s.draw(chan, rng, d);
    trial_rates(s, f, d, out);
  });
  FddResult r{s.name, {}, {}, s.d_user, e.back(), f.bf, f.d};
  r.R.assign(e.begin(), e.begin() + s.K);
  r.dR.assign(e.begin() + s.K, e.begin() + s.K + nd);
  return r;
}

struct FddComparison {
  FddResult proposed, conventional;
  Estimate difference;  ///< paired proposed - conventional sum
};

// Paired evaluation on common channel draws.
inline FddComparison fdd_compare(const FddScheme& prop, const FddScheme& conv, const FddRun& run) {
  const FrozenTerms fp = prepass(prop, run), fc = prepass(conv, run);
  const std::size_t np = prop.K + prop.d_prelog.size() + 1, nc = conv.K + conv.d_prelog.size() + 1;
  const std::uint64_t cs = channel_seed(run.mc.master_seed);
  auto e = expect_multi(run.mc, np + nc + 1, [&](Rng& rng, std::uint64_t idx, double* out) {
    {
      Rng chan = stream_rng(cs, idx, 1);
      FddDraw d;
      prop.draw(chan, rng, d);
      trial_rates(prop, fp, d, out);
    }
    {
      Rng chan = stream_rng(cs, idx, 1);
      Rng nz = stream_rng(run.mc.master_seed, idx, 2);
      FddDraw d;
      conv.draw(chan, nz, d);
      trial_rates(conv, fc, d, out + np);
    }
    out[np + nc] = out[np - 1] - out[np + nc - 1];
  });
  auto unpack = [&](const FddScheme& s, const FrozenTerms& f, std::size_t at) {
    FddResult r{s.name, {}, {}, s.d_user, e[at + s.K + s.d_prelog.size()], f.bf, f.d};
    r.R.assign(e.begin() + at, e.begin() + at + s.K);
    r.dR.assign(e.begin() + at + s.K, e.begin() + at + s.K + s.d_prelog.size());
    return r;
  };
  return {unpack(prop, fp, 0), unpack(conv, fc, np), e.back()};
}

// ---------------------------------------------------------------- schemes

// M unit pilots, LMMSE with known correlation, conjugate beamforming at rho/K.
inline FddScheme conventional_scheme(std::vector<MmUser> users, int T, double rho) {
  require(!users.empty(), errc::invalid_config, "no users");
  const int M = static_cast<int>(users[0].M());
  require(T > M, errc::invalid_config, "T must exceed M");
  require(rho >= 0.0, errc::invalid_input, "rho must be nonnegative");
  FddScheme s;
  s.name = "conventional";
  s.K = static_cast<int>(users.size());
  s.M = M;
  s.T = T;
  s.bf_prelog = 1.0 - static_cast<double>(M) / T;
  s.bf_power = rho / s.K;
  s.draw = [users = std::move(users), rho, M](Rng& chan, Rng& nz, FddDraw& d) {
    d.h = draw_channels(users, chan);
    const Mat X = scaled_identity(M, std::sqrt(rho));
    for (std::size_t k = 0; k < users.size(); ++k)
      d.hhat.push_back(lmmse_channel(users[k], X, true, X.transpose() * d.h[k] + noise(M, nz)));
  };
  return s;
}

// Two users: user 1 uncorrelated, user 2 rank r2 (DFT eigenvectors).
inline std::vector<MmUser> two_user_fdd_users(int M, int r2) {
  require(r2 >= 1 && r2 <= M, errc::invalid_structure, "need 1 <= r2 <= M");
  return {uncorrelated_user(M), dft_user(M, r2)};
}

inline FddScheme two_user_fdd_scheme(int M, int r2, int T, double rho) {
  auto users = two_user_fdd_users(M, r2);
  require(T > M, errc::invalid_config, "T must exceed M");
  FddScheme s;
  s.name = "proposed";
  s.K = 2;
  s.M = M;
  s.T = T;
  s.bf_prelog = 1.0 - static_cast<double>(M) / T;
  s.bf_power = rho / 2;
  for (int t = r2; t < M; ++t) {
    s.d_prelog.push_back(1.0 / T);
    s.d_power.push_back(rho);
    s.d_user.push_back(1);
  }
  const Mat Utr = users[1].B.topRows(r2);
  const Mat A = std::sqrt(rho) * Utr;
  const Mat Kest = (hermitian_part(A.adjoint() * A) + identity(r2)).llt().solve(A.adjoint());
  s.draw = [users, rho, M, r2, Kest](Rng& chan, Rng& nz, FddDraw& d) {
    d.h = draw_channels(users, chan);
    Vec x = Vec::Ones(M);
    x.tail(M - r2) = crandn(M - r2, 1, nz);
    const Mat X = (std::sqrt(rho) * x).asDiagonal();
    const Vec y1 = X.transpose() * d.h[0] + noise(M, nz);
    const Vec y2 = X.transpose() * d.h[1] + noise(M, nz);
    d.hhat.push_back(lmmse_channel(users[0], X, true, y1));
    d.hhat.push_back(lmmse_channel(users[1], X, false, y2));
    // user 2's own estimate from the deterministic pilots; g recovered from h = B g
    const Vec g = (users[1].B.adjoint() * users[1].B).ldlt().solve(users[1].B.adjoint() * d.h[1]);
    const Vec ghat = Kest * y2.head(r2);
    const Vec gerr = g - ghat;
    for (int t = r2; t < M; ++t) {
      const auto u = users[1].B.row(t);
      d.dsig.push_back(std::norm((u * ghat)(0)));
      d.dint.push_back(std::norm((u * gerr)(0)));
    }
  };
  return s;
}

// Partially overlapping pair, r1 >= r2 >= r0, coordinate eigenspaces in M >= r1 + r2 - r0.
struct PartialGeometry {
  int M, r1, r2, r0;
  std::vector<int> V0, V1, V2;
};

inline PartialGeometry partial_geometry(int M, int r1, int r2, int r0) {
  require(r1 >= r2 && r2 >= r0 && r0 >= 0 && r2 >= 1, errc::invalid_structure, "need r1 >= r2 >= r0 >= 0");
  require(r1 + r2 - r0 <= M, errc::invalid_structure, "r1 + r2 - r0 exceeds M");
  PartialGeometry g{M, r1, r2, r0, {}, {}, {}};
  int at = 0;
  for (int i = 0; i < r0; ++i) g.V0.push_back(at++);
  for (int i = 0; i < r1 - r0; ++i) g.V1.push_back(at++);
  for (int i = 0; i < r2 - r0; ++i) g.V2.push_back(at++);
  return g;
}

inline std::vector<MmUser> partial_users(const PartialGeometry& g) {
  std::vector<int> c1 = g.V0, c2 = g.V0;
  c1.insert(c1.end(), g.V1.begin(), g.V1.end());
  c2.insert(c2.end(), g.V2.begin(), g.V2.end());
  return {coordinate_user(g.M, c1), coordinate_user(g.M, c2)};
}

inline FddScheme two_user_partial_scheme(int M, int r1, int r2, int r0, int T, double rho) {
  const PartialGeometry geo = partial_geometry(M, r1, r2, r0);
  auto users = partial_users(geo);
  require(T > r1, errc::invalid_config, "T must exceed r1");
  FddScheme s;
  s.name = "proposed";
  s.K = 2;
  s.M = M;
  s.T = T;
  s.bf_prelog = 1.0 - static_cast<double>(r1) / T;
  s.bf_power = rho / 2;
  const bool delta = r1 > r2 && r2 > r0;
  if (delta) {
    s.d_prelog.push_back(static_cast<double>(r1 - r2) / T);
    s.d_power.push_back(rho / 2);
    s.d_user.push_back(1);
  }
  s.draw = [users, geo, rho, delta](Rng& chan, Rng& nz, FddDraw& d) {
    d.h = draw_channels(users, chan);
    const int M = geo.M, r0 = geo.r0, r1 = geo.r1, r2 = geo.r2;
    Mat X = Mat::Zero(M, r1);
    for (int i = 0; i < r0; ++i) X(geo.V0[i], i) = std::sqrt(rho);
    for (int i = 0; i < r2 - r0; ++i) {
      X(geo.V1[i], r0 + i) = std::sqrt(rho / 2);
      X(geo.V2[i], r0 + i) = std::sqrt(rho / 2);
    }
    for (int i = r2 - r0; i < r1 - r0; ++i) X(geo.V1[i], r2 + (i - (r2 - r0))) = std::sqrt(rho / 2);
    // user 2 estimates its private coefficients from slots 1..r2
    const Vec w2 = noise(r1, nz);
    Vec y2 = X.leftCols(r2).transpose() * d.h[1] + w2.head(r2);
    Vec e2 = Vec::Zero(r2 - r0), e2hat = Vec::Zero(r2 - r0);
    if (delta) {
      const Mat A = X.leftCols(r2).transpose() * users[1].B;
      const Mat G = hermitian_part(A.adjoint() * A) + identity(users[1].r());
      const Vec h2hat = users[1].B * G.llt().solve(A.adjoint() * y2);
      for (int i = 0; i < r2 - r0; ++i) {
        e2(i) = d.h[1](geo.V2[i]);
        e2hat(i) = h2hat(geo.V2[i]);
      }
      const double n = e2hat.norm();
      if (n > 0.0) {
        const Vec s22 = crandn(r1 - r2, 1, nz);
        for (int i = 0; i < r2 - r0; ++i)
          X.block(geo.V2[i], r2, 1, r1 - r2) += std::sqrt(rho / 2) * std::conj(e2hat(i)) / n * s22.transpose();
      }
      const Vec err = e2 - e2hat;
      d.dsig.push_back(e2hat.squaredNorm());
      d.dint.push_back(n > 0.0 ? std::norm(e2hat.dot(err)) / (n * n) : 0.0);
    }
    const Vec y1 = X.transpose() * d.h[0] + noise(r1, nz);
    const Vec y2f = X.transpose() * d.h[1] + w2;
    d.hhat.push_back(lmmse_channel(users[0], X, false, y1));
    d.hhat.push_back(lmmse_channel(users[1], X, false, y2f));
  };
  return s;
}

// Symmetric three users with (p1, p2, p3), coordinate subspaces.
inline std::vector<MmUser> sym3_users(int M, const std::vector<int>& p,
                                      std::map<SubsetMask, std::vector<int>>* blocks_out = nullptr) {
  require(p.size() == 3, errc::invalid_structure, "p must have three entries");
  const auto s = make_symmetric_structure(3, p, M);
  std::map<SubsetMask, std::vector<int>> blocks;
  int at = 0;
  for (SubsetMask J : ordered_subsets(3))
    for (int i = 0; i < s.r_of(J); ++i) blocks[J].push_back(at++);
  std::vector<MmUser> users;
  for (int k = 0; k < 3; ++k) {
    std::vector<int> cols;
    for (const auto& [J, c] : blocks)
      if (contains_user(J, k)) cols.insert(cols.end(), c.begin(), c.end());
    users.push_back(coordinate_user(M, cols));
  }
  if (blocks_out) *blocks_out = blocks;
  return users;
}

inline FddScheme sym3_scheme(int M, const std::vector<int>& p, int T, double rho) {
  std::map<SubsetMask, std::vector<int>> blocks;
  auto users = sym3_users(M, p, &blocks);
  const int p1 = p[0], p2 = p[1], p3 = p[2];
  const int Tt = p1 + 3 * p2 + p3;
  require(T > Tt, errc::invalid_config, "T must exceed p1 + 3 p2 + p3");
  FddScheme s;
  s.name = "proposed";
  s.K = 3;
  s.M = M;
  s.T = T;
  s.bf_prelog = 1.0 - static_cast<double>(Tt) / T;
  s.bf_power = rho / 3;
  const bool delta = p1 > 0 && p2 > 0;
  if (delta)
    for (int k = 0; k < 3; ++k) {
      s.d_prelog.push_back(static_cast<double>(p2) / T);
      s.d_power.push_back(rho / 2);
      s.d_user.push_back(k);
    }
  s.draw = [users, blocks, rho, M, p1, p2, p3, Tt, delta](Rng& chan, Rng& nz, FddDraw& d) {
    d.h = draw_channels(users, chan);
    auto col = [&](SubsetMask J, int i) { return blocks.at(J)[i]; };
    Mat X = Mat::Zero(M, Tt);
    for (int i = 0; i < p1; ++i)
      for (SubsetMask J : {1u, 2u, 4u}) X(col(J, i), i) = std::sqrt(rho / 3);
    std::vector<Vec> W(3);
    for (auto& w : W) w = noise(Tt, nz);
    // private-block estimates from the first p1 slots
    std::vector<Vec> e(3), ehat(3);
    for (int k = 0; k < 3; ++k) {
      const SubsetMask J = 1u << k;
      e[k] = Vec(p1);
      for (int i = 0; i < p1; ++i) e[k](i) = d.h[k](col(J, i));
      const double sc = std::sqrt(static_cast<double>(M) / users[k].r());
      // y_i = sqrt(rho/3) e_i + w, e_i = sc g_i with g_i ~ CN(0, 1)
      ehat[k] = Vec(p1);
      for (int i = 0; i < p1; ++i) {
        const cd yi = std::sqrt(rho / 3) * e[k](i) + W[k](i);
        ehat[k](i) = std::sqrt(rho / 3) * sc * sc * yi / (rho / 3 * sc * sc + 1.0);
      }
    }
    const SubsetMask pairs[3] = {6u, 5u, 3u};  // {2,3}, {1,3}, {1,2}
    for (int q = 0; q < 3; ++q) {
      const int t0 = p1 + q * p2;
      for (int i = 0; i < p2; ++i) X(col(pairs[q], i), t0 + i) = std::sqrt(rho / 2);
      if (delta) {
        const int m = q;  // user excluded from the pair
        const double n = ehat[m].norm();
        if (n > 0.0) {
          const Vec sd = crandn(p2, 1, nz);
          for (int i = 0; i < p1; ++i)
            X.block(col(1u << m, i), t0, 1, p2) += std::sqrt(rho / 2) * std::conj(ehat[m](i)) / n * sd.transpose();
        }
      }
    }
    for (int i = 0; i < p3; ++i) X(col(7u, i), p1 + 3 * p2 + i) = std::sqrt(rho);
    if (delta)
      for (int k = 0; k < 3; ++k) {
        const double n = ehat[k].norm();
        const Vec err = e[k] - ehat[k];
        d.dsig.push_back(ehat[k].squaredNorm());
        d.dint.push_back(n > 0.0 ? std::norm(ehat[k].dot(err)) / (n * n) : 0.0);
      }
    for (int k = 0; k < 3; ++k) {
      const Vec y = X.transpose() * d.h[k] + W[k];
      d.hhat.push_back(lmmse_channel(users[k], X, false, y));
    }
  };
  return s;
}

// On-off correlation: antenna 0 alone, then L groups of G = (M-1)/L antennas.
struct OnOffLayout {
  int M, K, L, G;
  std::vector<int> group_user;  ///< decoder of each group's u symbols (0 = user 1)
};

inline OnOffLayout onoff_layout(int M, int K, int L) {
  require(K >= 2 && L >= 1 && M >= 2, errc::invalid_structure, "need K >= 2, L >= 1");
  require((M - 1) % L == 0, errc::invalid_structure, "(M-1)/L must be an integer");
  OnOffLayout o{M, K, L, (M - 1) / L, std::vector<int>(L, 0)};
  if (K > 2)
    for (int l = 0; l < L; ++l) o.group_user[l] = 1 + l % (K - 2);
  return o;
}

inline int onoff_first_antenna(const OnOffLayout& o, int l) { return 1 + l * o.G; }

inline std::vector<MmUser> onoff_users(const OnOffLayout& o) {
  std::vector<MmUser> users;
  users.push_back(fully_correlated_user(o.M));
  for (int k = 1; k + 1 < o.K; ++k) {
    std::vector<int> latent(o.M);
    int next = 0;
    std::vector<int> groups;
    for (int l = 0; l < o.L; ++l)
      if (o.group_user[l] == k) groups.push_back(l);
    std::vector<int> gl(o.M, -1);
    for (int l : groups)
      for (int i = 0; i < o.G; ++i) gl[onoff_first_antenna(o, l) + i] = l;
    std::map<int, int> group_latent;
    for (int i = 0; i < o.M; ++i) {
      if (gl[i] >= 0) {
        auto it = group_latent.find(gl[i]);
        if (it == group_latent.end()) it = group_latent.emplace(gl[i], next++).first;
        latent[i] = it->second;
      } else {
        latent[i] = next++;
      }
    }
    Mat B = Mat::Zero(o.M, next);
    for (int i = 0; i < o.M; ++i) B(i, latent[i]) = 1.0;
    users.push_back(MmUser(B));
  }
  users.push_back(uncorrelated_user(o.M));
  return users;
}

inline FddScheme onoff_scheme(int M, int K, int L, int T, double rho) {
  const OnOffLayout o = onoff_layout(M, K, L);
  auto users = onoff_users(o);
  require(T > M, errc::invalid_config, "T must exceed M");
  FddScheme s;
  s.name = "proposed";
  s.K = K;
  s.M = M;
  s.T = T;
  s.bf_prelog = 1.0 - static_cast<double>(M) / T;
  s.bf_power = rho / K;
  for (int l = 0; l < L; ++l) {  // v_l for user 1
    s.d_prelog.push_back(1.0 / T);
    s.d_power.push_back(rho);
    s.d_user.push_back(0);
  }
  for (int l = 0; l < L; ++l)
    if (o.G > 1) {
      s.d_prelog.push_back(static_cast<double>(o.G - 1) / T);
      s.d_power.push_back(rho);
      s.d_user.push_back(o.group_user[l]);
    }
  s.draw = [users, o, rho](Rng& chan, Rng& nz, FddDraw& d) {
    d.h = draw_channels(users, chan);
    const int M = o.M;
    Vec x(M);
    x(0) = 1.0;
    std::vector<cd> v(o.L);
    for (int l = 0; l < o.L; ++l) {
      v[l] = crandn(1, 1, nz)(0);
      const int a = onoff_first_antenna(o, l);
      x(a) = v[l];
      for (int i = 1; i < o.G; ++i) x(a + i) = v[l] * crandn(1, 1, nz)(0);
    }
    const Mat X = (std::sqrt(rho) * x).asDiagonal();
    std::vector<Vec> y;
    for (std::size_t k = 0; k < users.size(); ++k) {
      y.push_back(X.transpose() * d.h[k] + noise(M, nz));
      d.hhat.push_back(lmmse_channel(users[k], X, true, y.back()));
    }
    const double gain = std::sqrt(rho) / (rho + 1.0);
    // user 1: common coefficient from slot 1, reused for every v_l
    const cd hb = d.h[0](0), hb_hat = gain * y[0](0);
    for (int l = 0; l < o.L; ++l) {
      d.dsig.push_back(std::norm(hb_hat));
      d.dint.push_back(std::norm(hb - hb_hat));
    }
    for (int l = 0; l < o.L; ++l) {
      if (o.G == 1) continue;
      const int a = onoff_first_antenna(o, l);
      const int k = o.group_user[l];
      const cd c = d.h[k](a) * v[l];
      const cd c_hat = gain * y[k](a);
      d.dsig.push_back(std::norm(c_hat));
      d.dint.push_back(std::norm(c - c_hat));
    }
  };
  return s;
}

}  // namespace corrbc
