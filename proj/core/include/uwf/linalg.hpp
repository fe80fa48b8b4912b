#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>

namespace uwf {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

struct EigPair {
  double value = 0.0;
  CVec vector;
};

struct PowerOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  std::uint64_t seed = 0;
  int block = 3;
  // optional first column of the starting block; caller-owned
  const CVec* warm_start = nullptr;
};

struct PowerResult {
  EigPair pair;
  bool converged = false;
  int iterations = 0;
  // ||A v - lambda v|| of the returned pair
  double residual = 0.0;
};

/// Matrix-free Hermitian operator: x -> A x.
using HermitianOperator = std::function<CVec(const CVec&)>;

/// Eigenpair of largest |eigenvalue| by block subspace iteration with Rayleigh-Ritz.
/// Converged when ||A v - lambda v|| <= tol * ||A||_est (largest Ritz magnitude).
PowerResult power_iteration(const CMat& A, const PowerOptions& opts = {});
PowerResult power_iteration(const HermitianOperator& op, Eigen::Index n,
                            const PowerOptions& opts = {});

struct HermitianEig {
  RVec values;   // descending
  CMat vectors;  // columns, unit norm
};

/// Cyclic complex Jacobi eigensolver for small dense Hermitian matrices.
HermitianEig jacobi_eigh(const CMat& H, double tol = 1e-15, int max_sweeps = 100);

struct Rank2Eig {
  EigPair first;   // larger eigenvalue
  EigPair second;
  bool degenerate = false;
};

/// Closed-form nonzero eigenpairs of p p^H - q q^H.
Rank2Eig rank2_eig(const CVec& p, const CVec& q);

/// min over phi of ||x - y e^{i phi}||.
double dist(const CVec& x, const CVec& y);
/// Real-valued version: min(||x - y||, ||x + y||).
double dist(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// y rotated by the global phase that brings it closest to x.
CVec align_global_phase(const CVec& y, const CVec& x);

/// Rotates x so that its largest-magnitude entry is real and nonnegative.
CVec canonical_phase(const CVec& x);

struct SingularPair {
  double value = 0.0;
  CVec right;  // v, unit norm
  CVec left;   // u = A v / sigma (zero when sigma = 0)
  bool converged = false;
  int iterations = 0;
};

struct RealSingularPair {
  double value = 0.0;
  RVec right;
  RVec left;
  bool converged = false;
  int iterations = 0;
};

/// Largest singular value by power iteration on A^H A, optionally warm-started.
SingularPair spectral_norm(const CMat& A, double tol = 1e-10, const CVec* warm_start = nullptr,
                           int max_iter = 10000);
RealSingularPair spectral_norm(const RMat& A, double tol = 1e-10, const RVec* warm_start = nullptr,
                               int max_iter = 10000);

/// Largest |eigenvalue| of a Hermitian matrix.
double hermitian_norm(const CMat& H, double tol = 1e-10);

bool is_hermitian(const CMat& A, double rel_tol = 1e-12);

CVec random_cvec(Eigen::Index n, std::uint64_t seed);
RVec random_rvec(Eigen::Index n, std::uint64_t seed);

}  // namespace uwf
