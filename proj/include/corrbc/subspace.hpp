#pragma once

#include "core.hpp"

#include <Eigen/SVD>

#include <map>
#include <set>
#include <vector>

namespace corrbc {

inline constexpr double kRankTol = 1e-9;

struct Subspace {
  Mat basis;  ///< ambient x dim, orthonormal columns
  Eigen::Index ambient = 0;

  Eigen::Index dim() const { return basis.cols(); }
  Mat projector() const { return basis * basis.adjoint(); }

  static Subspace empty(Eigen::Index ambient) { return {Mat(ambient, 0), ambient}; }
  static Subspace full(Eigen::Index ambient) { return {identity(ambient), ambient}; }
};

inline void check_same_ambient(const Subspace& a, const Subspace& b) {
  require(a.ambient == b.ambient, errc::invalid_input, "ambient dimension mismatch");
}

// Left singular vectors for singular values above sigma_max * tol.
inline Subspace orthonormalize(const Mat& A, double tol = kRankTol) {
  require(tol > 0.0, errc::invalid_input, "tolerance must be positive");
  require(all_finite(A), errc::invalid_input, "non-finite entries");
  const Eigen::Index m = A.rows();
  if (A.cols() == 0) return Subspace::empty(m);
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU);
  const RVec& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Eigen::Index r = 0;
  while (r < s.size() && smax > 0.0 && s(r) > smax * tol) ++r;
  return {svd.matrixU().leftCols(r), m};
}

// Orthogonal complement of span(S) in the ambient space.
inline Subspace null_basis(const Subspace& S) {
  const Eigen::Index m = S.ambient;
  if (S.dim() == 0) return Subspace::full(m);
  if (S.dim() >= m) return Subspace::empty(m);
  Eigen::JacobiSVD<Mat> svd(S.basis, Eigen::ComputeFullU);
  return {svd.matrixU().rightCols(m - S.dim()), m};
}

// Vectors left invariant by both projectors: null space of [I - P1; I - P2].
inline Subspace intersect(const Subspace& a, const Subspace& b, double tol = kRankTol) {
  check_same_ambient(a, b);
  const Eigen::Index m = a.ambient;
  if (a.dim() == 0 || b.dim() == 0) return Subspace::empty(m);
  Mat stacked(2 * m, m);
  stacked << identity(m) - a.projector(), identity(m) - b.projector();
  Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
  const RVec& s = svd.singularValues();
  const double ref = std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > ref * tol) ++r;
  return {svd.matrixV().rightCols(m - r), m};
}

// span(S) ∩ span(W)^perp.
inline Subspace complement_within(const Subspace& S, const Subspace& W, double tol = kRankTol) {
  check_same_ambient(S, W);
  if (W.dim() == 0) return S;
  return intersect(S, null_basis(W), tol);
}

// Projection of span(S) onto span(W)^perp (zero-forcing directions).
inline Subspace project_out(const Subspace& S, const Subspace& W, double tol = kRankTol) {
  check_same_ambient(S, W);
  if (S.dim() == 0) return S;
  return orthonormalize(S.basis - W.basis * (W.basis.adjoint() * S.basis), tol);
}

inline Subspace span_sum(const Subspace& a, const Subspace& b, double tol = kRankTol) {
  check_same_ambient(a, b);
  return orthonormalize(hcat(a.basis, b.basis), tol);
}

inline Eigen::Index numerical_rank(const Mat& A, double tol = kRankTol) {
  if (A.size() == 0) return 0;
  return orthonormalize(A, tol).dim();
}

inline bool same_span(const Subspace& a, const Subspace& b, double tol = 1e-9) {
  return a.ambient == b.ambient && a.dim() == b.dim() && (a.projector() - b.projector()).norm() <= tol;
}

struct PrecoderSet2 {
  Mat V0, V1, V2;
};

// Precoders for two users: V0 in the common part, Vk seen by user k only.
inline PrecoderSet2 build_precoders2(const Subspace& U1, const Subspace& U2, Eigen::Index s0,
                                     Eigen::Index s1, Eigen::Index s2, double tol = kRankTol) {
  check_same_ambient(U1, U2);
  const Subspace U0 = intersect(U1, U2, tol);
  const Eigen::Index r0 = U0.dim();
  require(s0 >= 0 && s1 >= 0 && s2 >= 0, errc::scheme_dims, "negative dimension");
  require(s0 <= r0, errc::scheme_dims, "s0 exceeds the common rank");
  require(s1 <= U1.dim() - r0, errc::scheme_dims, "s1 exceeds r1 - r0");
  require(s2 <= U2.dim() - r0, errc::scheme_dims, "s2 exceeds r2 - r0");
  const Subspace W1 = project_out(U1, U2, tol);
  const Subspace W2 = project_out(U2, U1, tol);
  require(W1.dim() >= s1 && W2.dim() >= s2, errc::scheme_dims, "private subspace too small");
  return {U0.basis.leftCols(s0), W1.basis.leftCols(s1), W2.basis.leftCols(s2)};
}

// Users are indexed 0..K-1; a subset J is a bitmask.
using SubsetMask = unsigned;

inline int popcount(SubsetMask m) { return __builtin_popcount(m); }

inline bool contains_user(SubsetMask J, int k) { return (J >> k) & 1u; }

// Nonempty subsets ordered by size, then by the sorted member list.
inline std::vector<SubsetMask> ordered_subsets(int K) {
  std::vector<SubsetMask> out;
  for (SubsetMask J = 1; J < (1u << K); ++J) out.push_back(J);
  std::stable_sort(out.begin(), out.end(), [](SubsetMask a, SubsetMask b) {
    if (popcount(a) != popcount(b)) return popcount(a) < popcount(b);
    for (int k = 0; k < 32; ++k) {
      const bool ia = (a >> k) & 1u, ib = (b >> k) & 1u;
      if (ia != ib) return ia;
    }
    return false;
  });
  return out;
}

// V_J orthogonal to every U_k with k not in J, aligned with the intersection of U_k, k in J.
inline std::map<SubsetMask, Mat> build_precodersK(const std::vector<Subspace>& users,
                                                  const std::map<SubsetMask, Eigen::Index>& dims,
                                                  double tol = kRankTol) {
  const int K = static_cast<int>(users.size());
  require(K >= 1, errc::invalid_input, "no users");
  const Eigen::Index m = users[0].ambient;
  std::map<SubsetMask, Mat> out;
  for (const auto& [J, d] : dims) {
    require(J != 0 && J < (1u << K), errc::scheme_dims, "invalid subset");
    if (d == 0) {
      out[J] = Mat(m, 0);
      continue;
    }
    Subspace core = Subspace::full(m);
    Subspace others = Subspace::empty(m);
    for (int k = 0; k < K; ++k) {
      if (contains_user(J, k))
        core = intersect(core, users[k], tol);
      else
        others = span_sum(others, users[k], tol);
    }
    const Subspace V = project_out(core, others, tol);
    require(V.dim() >= d, errc::scheme_dims, "requested dimension exceeds r_J");
    Mat VJ = V.basis.leftCols(d);
    for (int k = 0; k < K; ++k) {
      const Mat g = users[k].basis.adjoint() * VJ;
      if (contains_user(J, k))
        require(numerical_rank(g, 1e-6) == d, errc::scheme_dims, "rank condition fails");
      else
        require(g.norm() <= 1e-9, errc::scheme_dims, "leakage to a user outside J");
    }
    out[J] = VJ;
  }
  return out;
}

}  // namespace corrbc
