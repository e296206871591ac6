#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace corrbc {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Rng = std::mt19937_64;

enum class errc {
  invalid_input,
  invalid_structure,
  invalid_config,
  scheme_dims,
  rank_deficiency,
  infeasible_power,
  power,
  feasibility,
  size,
  schedule,
  domain,
  estimation_failure,
  unknown_experiment,
  io,
};

inline const char* errc_name(errc e) {
  switch (e) {
    case errc::invalid_input: return "invalid-input";
    case errc::invalid_structure: return "invalid-structure";
    case errc::invalid_config: return "invalid-config";
    case errc::scheme_dims: return "scheme-dims";
    case errc::rank_deficiency: return "rank-deficiency";
    case errc::infeasible_power: return "infeasible-power";
    case errc::power: return "power";
    case errc::feasibility: return "feasibility";
    case errc::size: return "size";
    case errc::schedule: return "schedule";
    case errc::domain: return "domain";
    case errc::estimation_failure: return "estimation-failure";
    case errc::unknown_experiment: return "unknown-experiment";
    case errc::io: return "io";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

inline void require(bool ok, errc code, const std::string& what) {
  if (!ok) throw error(code, what);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// splitmix64 finalizer, used to key per-trial streams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for (seed, index, stream). Same key, same sequence.
inline Rng stream_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0) {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ index);
  k = mix64(k ^ (stream * 0xd1b54a32d192ed03ULL));
  return Rng(k);
}

// Circularly-symmetric CN(0,1) entries.
inline Mat crandn(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  Mat out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      out(i, j) = cd(re, im);
    }
  return out;
}

inline Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }

inline bool all_finite(const Mat& A) {
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      if (!std::isfinite(A(i, j).real()) || !std::isfinite(A(i, j).imag())) return false;
  return true;
}

inline Mat hermitian_part(const Mat& A) { return 0.5 * (A + A.adjoint()); }

// Eigenvalues of a Hermitian matrix (ascending).
inline RVec herm_eigenvalues(const Mat& A) {
  if (A.rows() == 0) return RVec();
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(A), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline bool is_psd(const Mat& A, double tol = 1e-10) {
  if (A.rows() != A.cols()) return false;
  if (A.rows() == 0) return true;
  if ((A - A.adjoint()).norm() > tol * std::max(1.0, A.norm())) return false;
  return herm_eigenvalues(A).minCoeff() >= -tol * std::max(1.0, A.norm());
}

// Hermitian PSD square root; small negative eigenvalues are clamped.
inline Mat sqrt_psd(const Mat& A) {
  if (A.rows() == 0) return A;
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(A));
  RVec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Inverse of a Hermitian positive definite matrix.
inline Mat inv_pd(const Mat& A) {
  if (A.rows() == 0) return A;
  Eigen::LLT<Mat> llt(hermitian_part(A));
  require(llt.info() == Eigen::Success, errc::rank_deficiency, "matrix is not positive definite");
  return llt.solve(identity(A.rows()));
}

inline bool is_pd(const Mat& A, double rel_tol = 1e-12) {
  if (A.rows() == 0) return true;
  RVec ev = herm_eigenvalues(A);
  return ev.minCoeff() > rel_tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
}

inline double trace_re(const Mat& A) { return A.trace().real(); }

// log2 det(A) for Hermitian positive definite A, eigenvalue clamping when Cholesky fails.
inline double log2det_pd(const Mat& A) {
  if (A.rows() == 0) return 0.0;
  Eigen::LLT<Mat> llt(A);
  if (llt.info() == Eigen::Success) {
    double s = 0.0;
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < A.rows(); ++i) s += std::log(L(i, i).real());
    return 2.0 * s / std::log(2.0);
  }
  RVec ev = herm_eigenvalues(A).cwiseMax(1e-14);
  return ev.array().log().sum() / std::log(2.0);
}

// log2 det(I + c H H^H), using the smaller Gram matrix.
inline double log2det_gram(const Mat& H, double c) {
  if (H.size() == 0 || c == 0.0) return 0.0;
  Mat G = H.rows() <= H.cols() ? Mat(H * H.adjoint()) : Mat(H.adjoint() * H);
  Mat A = identity(G.rows()) + c * G;
  return log2det_pd(A);
}

// Rows ~ CN(0, C): G C^{1/2} with G i.i.d. CN(0,1).
inline Mat sample_rows(Eigen::Index rows, const Mat& C, Rng& rng) {
  return crandn(rows, C.rows(), rng) * sqrt_psd(C);
}

inline Mat blockdiag(const Mat& A, const Mat& B) {
  Mat out = Mat::Zero(A.rows() + B.rows(), A.cols() + B.cols());
  out.topLeftCorner(A.rows(), A.cols()) = A;
  out.bottomRightCorner(B.rows(), B.cols()) = B;
  return out;
}

inline Mat hcat(const Mat& A, const Mat& B) {
  if (A.cols() == 0) return B;
  if (B.cols() == 0) return A;
  Mat out(A.rows(), A.cols() + B.cols());
  out << A, B;
  return out;
}

inline Mat scaled_identity(Eigen::Index n, double v) { return Mat::Identity(n, n) * cd(v, 0.0); }

}  // namespace corrbc
