#pragma once

#include <cstdint>
#include <string>

#include "uwf/linalg.hpp"

namespace uwf {

/// M x N complex sampling matrix. Row m holds a_m^H, so (A rho)_m = <a_m, rho>.
class ForwardMap {
 public:
  ForwardMap() = default;
  ForwardMap(CMat A, std::string kind, std::uint64_t seed = 0);

  const CMat& matrix() const { return A_; }
  // real and imaginary parts of A, cached for real-valued images
  const RMat& real_part() const { return Ar_; }
  const RMat& imag_part() const { return Ai_; }
  const std::string& kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  Eigen::Index M() const { return A_.rows(); }
  Eigen::Index N() const { return A_.cols(); }

 private:
  CMat A_;
  RMat Ar_, Ai_;
  std::string kind_ = "file";
  std::uint64_t seed_ = 0;
};

/// i.i.d. complex Gaussian entries, real and imaginary parts each N(0, 1/2).
ForwardMap make_gaussian(Eigen::Index M, Eigen::Index N, std::uint64_t seed);
/// First N columns of the M-point DFT, A(m, n) = exp(-2 pi i m n / M).
ForwardMap make_fourier(Eigen::Index M, Eigen::Index N);

RVec intensity(const ForwardMap& F, const CVec& rho);
RVec intensity(const ForwardMap& F, const RVec& rho);

/// (a_m^H X a_m)_m for Hermitian X.
RVec lifted_apply(const ForwardMap& F, const CMat& X);
/// sum_m d_m a_m a_m^H.
CMat lifted_adjoint(const ForwardMap& F, const RVec& d);
/// (1/M) lifted_adjoint(F, d).
CMat spectral_matrix(const ForwardMap& F, const RVec& d);

enum class ScaleRule { sqrt_lambda, norm_of_d };

std::string to_string(ScaleRule r);
ScaleRule scale_rule_from_string(const std::string& s);

struct SpectralInit {
  CVec estimate;
  EigPair leading;
  ScaleRule scale_rule = ScaleRule::sqrt_lambda;
  double scale = 0.0;
  bool degenerate = false;  // lambda_0 <= 0, estimate is zero
  bool converged = true;
};

/// Leading eigenpair of Y (largest algebraic eigenvalue) scaled per rule.
SpectralInit spectral_init(const ForwardMap& F, const RVec& d,
                           ScaleRule rule = ScaleRule::sqrt_lambda, std::uint64_t seed = 0);

}  // namespace uwf
