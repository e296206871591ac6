#pragma once

#include "subspace.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace corrbc {

struct UserCorrelation {
  Subspace U;   ///< eigenbasis, M x r
  RVec Sigma;   ///< eigenvalues, length r
  int N = 1;    ///< receive antennas

  Eigen::Index r() const { return U.dim(); }
  Eigen::Index M() const { return U.ambient; }
  Mat R() const { return U.basis * Sigma.cast<cd>().asDiagonal() * U.basis.adjoint(); }
  Mat Sigma_mat() const { return Mat(Sigma.cast<cd>().asDiagonal()); }
};

enum class SigmaProfile { uniform, exponential };

// Eigenvalues scaled so that they sum to trace.
inline RVec make_sigma(Eigen::Index r, double trace, SigmaProfile profile = SigmaProfile::uniform,
                       double decay = 0.7) {
  RVec s(r);
  for (Eigen::Index i = 0; i < r; ++i)
    s(i) = profile == SigmaProfile::uniform ? 1.0 : std::pow(decay, static_cast<double>(i));
  if (r > 0) s *= trace / s.sum();
  return s;
}

inline UserCorrelation make_user(const Subspace& U, int N, double trace,
                                 SigmaProfile profile = SigmaProfile::uniform) {
  require(U.dim() >= 1, errc::invalid_structure, "rank must be positive");
  require(N >= 1, errc::invalid_structure, "need at least one receive antenna");
  return {U, make_sigma(U.dim(), trace, profile), N};
}

inline void validate(const UserCorrelation& u, double trace, double tol = 1e-9) {
  require(u.Sigma.size() == u.r(), errc::invalid_structure, "Sigma length differs from rank");
  require(u.r() == 0 || u.Sigma.minCoeff() > 0.0, errc::invalid_structure, "Sigma must be positive");
  require(std::abs(u.Sigma.sum() - trace) <= tol * std::max(1.0, trace), errc::invalid_structure,
          "trace normalization violated");
}

struct BroadcastConfig {
  int M = 1;
  int T = 2;
  double rho = 1.0;
  std::vector<UserCorrelation> users;
};

inline void validate(const BroadcastConfig& c) {
  for (const auto& u : c.users) {
    require(u.M() == c.M, errc::invalid_config, "user ambient dimension differs from M");
    require(c.T >= 2 * std::max<int>(static_cast<int>(u.r()), u.N), errc::invalid_config,
            "T must be at least 2 max(r_k, N_k)");
  }
}

// Random unitary from the QR factorization of a Gaussian matrix.
inline Mat random_unitary(Eigen::Index m, Rng& rng) {
  Eigen::HouseholderQR<Mat> qr(crandn(m, m, rng));
  Mat Q = qr.householderQ() * identity(m);
  const Mat Rm = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < m; ++i) {
    const cd d = Rm(i, i);
    if (std::abs(d) > 0) Q.col(i) *= d / std::abs(d);
  }
  return Q;
}

inline Subspace coordinate_subspace(Eigen::Index M, Eigen::Index first, Eigen::Index count) {
  Mat B = Mat::Zero(M, count);
  for (Eigen::Index i = 0; i < count; ++i) B(first + i, i) = 1.0;
  return {B, M};
}

// User 1 occupies e_0..e_{r1-1}, user 2 shares the last r0 of these. Optional shared rotation.
inline std::pair<UserCorrelation, UserCorrelation> make_two_user_overlap(
    int M, int r1, int r2, int r0, int N1 = 0, int N2 = 0, double trace = 0.0,
    const Mat* rotation = nullptr) {
  require(r1 >= 1 && r2 >= 1 && r0 >= 0, errc::invalid_structure, "ranks must be positive");
  require(r0 <= std::min(r1, r2), errc::invalid_structure, "r0 exceeds min(r1, r2)");
  require(r1 + r2 - r0 <= M, errc::invalid_structure, "r1 + r2 - r0 exceeds M");
  if (trace <= 0.0) trace = M;
  Subspace U1 = coordinate_subspace(M, 0, r1);
  Subspace U2 = coordinate_subspace(M, r1 - r0, r2);
  if (rotation) {
    U1.basis = (*rotation) * U1.basis;
    U2.basis = (*rotation) * U2.basis;
  }
  return {make_user(U1, N1 ? N1 : r1, trace), make_user(U2, N2 ? N2 : r2, trace)};
}

inline long long binom(int n, int k) {
  if (k < 0 || k > n || n < 0) return 0;
  return static_cast<long long>(std::llround(boost::math::binomial_coefficient<double>(n, k)));
}

struct OverlapStructure {
  int K = 0;
  int M = 0;
  std::map<SubsetMask, int> r_J;  ///< nonempty subsets only

  int r_of(SubsetMask J) const {
    auto it = r_J.find(J);
    return it == r_J.end() ? 0 : it->second;
  }
  int rank(int k) const {
    int s = 0;
    for (const auto& [J, r] : r_J)
      if (contains_user(J, k)) s += r;
    return s;
  }
  int total() const {
    int s = 0;
    for (const auto& kv : r_J) s += kv.second;
    return s;
  }
};

inline void validate(const OverlapStructure& s) {
  require(s.K >= 1 && s.K <= 16, errc::invalid_structure, "K out of range");
  for (const auto& [J, r] : s.r_J) {
    require(J != 0 && J < (1u << s.K), errc::invalid_structure, "subset out of range");
    require(r >= 0, errc::invalid_structure, "negative r_J");
  }
  require(s.total() <= s.M, errc::invalid_structure, "sum of r_J exceeds M");
}

inline OverlapStructure make_symmetric_structure(int K, const std::vector<int>& p, int M) {
  require(static_cast<int>(p.size()) == K, errc::invalid_structure, "p must have length K");
  long long need = 0;
  for (int k = 1; k <= K; ++k) need += binom(K, k) * p[k - 1];
  require(need <= M, errc::invalid_structure, "sum_k C(K,k) p_k exceeds M");
  OverlapStructure s{K, M, {}};
  for (SubsetMask J = 1; J < (1u << K); ++J)
    if (p[popcount(J) - 1] > 0) s.r_J[J] = p[popcount(J) - 1];
  return s;
}

// Coordinate blocks for each V_J (ordered subsets), users own the union of blocks J containing them.
inline std::map<SubsetMask, Subspace> structure_blocks(const OverlapStructure& s) {
  validate(s);
  std::map<SubsetMask, Subspace> out;
  Eigen::Index at = 0;
  for (SubsetMask J : ordered_subsets(s.K)) {
    const int r = s.r_of(J);
    out[J] = coordinate_subspace(s.M, at, r);
    at += r;
  }
  return out;
}

inline std::vector<Subspace> structure_eigenspaces(const OverlapStructure& s) {
  const auto blocks = structure_blocks(s);
  std::vector<Subspace> users;
  for (int k = 0; k < s.K; ++k) {
    Mat B(s.M, 0);
    for (SubsetMask J : ordered_subsets(s.K))
      if (contains_user(J, k)) B = hcat(B, blocks.at(J).basis);
    users.push_back({B, s.M});
  }
  return users;
}

using FadingSampler = std::function<Mat(Eigen::Index, Eigen::Index, Rng&)>;

inline Mat rayleigh(Eigen::Index rows, Eigen::Index cols, Rng& rng) { return crandn(rows, cols, rng); }

// H = G diag(sqrt Sigma) U^H.
inline Mat sample_block(const UserCorrelation& u, Rng& rng, const FadingSampler& fading = rayleigh) {
  const Mat G = fading(u.N, u.r(), rng);
  return G * u.Sigma.cwiseSqrt().cast<cd>().asDiagonal() * u.U.basis.adjoint();
}

inline Mat sample_block(const BroadcastConfig& c, int k, Rng& rng, const FadingSampler& fading = rayleigh) {
  require(k >= 0 && k < static_cast<int>(c.users.size()), errc::invalid_input, "user index out of range");
  return sample_block(c.users[k], rng, fading);
}

}  // namespace corrbc
