#pragma once

// Independent reference implementations used only by tests. Nothing here calls into the
// routines under test, so agreement is meaningful.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <random>

namespace oracle {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// std::mt19937_64 keeps test inputs independent of the library PRNG
inline CVec rand_c(Eigen::Index n, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cd(nd(g), nd(g));
  return v;
}

inline RVec rand_r(Eigen::Index n, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  RVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(g);
  return v;
}

inline RMat rand_rm(Eigen::Index r, Eigen::Index c, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  RMat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(g);
  return m;
}

inline CMat rand_herm(Eigen::Index n, std::mt19937_64& g) {
  CMat A(n, n);
  for (Eigen::Index j = 0; j < n; ++j) A.col(j) = rand_c(n, g);
  return 0.5 * (A + A.adjoint());
}

struct Eig {
  RVec values;  // ascending
  CMat vectors;
};

inline Eig eigh(const CMat& H) {
  Eigen::SelfAdjointEigenSolver<CMat> es(H);
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Index of the eigenvalue of largest magnitude.
inline Eigen::Index argmax_abs(const RVec& v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  return k;
}

inline double sigma_max(const CMat& A) {
  Eigen::JacobiSVD<CMat> svd(A);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

inline double sigma_max(const RMat& A) {
  Eigen::JacobiSVD<RMat> svd(A);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

/// |a_m^H rho|^2 by explicit loops; A(m, n) is the conjugate of a_m(n).
inline RVec intensity_loop(const CMat& A, const CVec& rho) {
  RVec d(A.rows());
  for (Eigen::Index m = 0; m < A.rows(); ++m) {
    cd s = 0;
    for (Eigen::Index n = 0; n < A.cols(); ++n) s += A(m, n) * rho(n);
    d(m) = std::norm(s);
  }
  return d;
}

/// Central difference of a scalar function along dir.
inline double central(const std::function<double(const RVec&)>& f, const RVec& x, const RVec& dir,
                      double h = 1e-5) {
  return (f(x + h * dir) - f(x - h * dir)) / (2.0 * h);
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / (std::abs(b) + floor);
}

}  // namespace oracle
