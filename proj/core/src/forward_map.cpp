#include "uwf/forward_map.hpp"

#include <cmath>
#include <numbers>

#include "uwf/errors.hpp"
#include "uwf/rng.hpp"

namespace uwf {

ForwardMap::ForwardMap(CMat A, std::string kind, std::uint64_t seed)
    : A_(std::move(A)), kind_(std::move(kind)), seed_(seed) {
  if (A_.rows() < 1 || A_.cols() < 1) throw ConfigError("forward map needs M, N >= 1");
  if (!A_.allFinite()) throw ConfigError("forward map has non-finite entries");
  Ar_ = A_.real();
  Ai_ = A_.imag();
}

ForwardMap make_gaussian(Eigen::Index M, Eigen::Index N, std::uint64_t seed) {
  if (M < 1 || N < 1) throw ConfigError("make_gaussian: M, N must be >= 1");
  SplitMix64 rng(seed);
  const double s = std::sqrt(0.5);
  CMat A(M, N);
  for (Eigen::Index m = 0; m < M; ++m)
    for (Eigen::Index n = 0; n < N; ++n) {
      const double re = rng.normal();
      const double im = rng.normal();
      A(m, n) = cd(s * re, s * im);
    }
  return ForwardMap(std::move(A), "gaussian", seed);
}

ForwardMap make_fourier(Eigen::Index M, Eigen::Index N) {
  if (N < 1 || M < N) throw ConfigError("make_fourier: requires M >= N >= 1");
  CMat A(M, N);
  for (Eigen::Index m = 0; m < M; ++m)
    for (Eigen::Index n = 0; n < N; ++n) {
      // reduce m*n mod M first so the angle stays small and exact
      const auto k = static_cast<double>((m * n) % M);
      const double ang = -2.0 * std::numbers::pi * k / static_cast<double>(M);
      A(m, n) = cd(std::cos(ang), std::sin(ang));
    }
  return ForwardMap(std::move(A), "fourier", 0);
}

RVec intensity(const ForwardMap& F, const CVec& rho) {
  if (rho.size() != F.N()) throw ConfigError("intensity: dimension mismatch");
  return (F.matrix() * rho).cwiseAbs2();
}

RVec intensity(const ForwardMap& F, const RVec& rho) {
  if (rho.size() != F.N()) throw ConfigError("intensity: dimension mismatch");
  const RVec u = F.real_part() * rho;
  const RVec v = F.imag_part() * rho;
  return u.cwiseAbs2() + v.cwiseAbs2();
}

RVec lifted_apply(const ForwardMap& F, const CMat& X) {
  if (X.rows() != F.N() || X.cols() != F.N()) throw ConfigError("lifted_apply: shape mismatch");
  if (!is_hermitian(X, 1e-10)) throw ConfigError("lifted_apply: input is not Hermitian");
  const CMat AX = F.matrix() * X;
  return AX.cwiseProduct(F.matrix().conjugate()).rowwise().sum().real();
}

CMat lifted_adjoint(const ForwardMap& F, const RVec& d) {
  if (d.size() != F.M()) throw ConfigError("lifted_adjoint: length mismatch");
  const CMat& A = F.matrix();
  CMat out = A.adjoint() * (d.cast<cd>().asDiagonal() * A);
  // exact Hermitian symmetry regardless of rounding
  return 0.5 * (out + out.adjoint());
}

CMat spectral_matrix(const ForwardMap& F, const RVec& d) {
  return lifted_adjoint(F, d) / static_cast<double>(F.M());
}

std::string to_string(ScaleRule r) {
  return r == ScaleRule::sqrt_lambda ? "sqrt_lambda" : "norm_of_d";
}

ScaleRule scale_rule_from_string(const std::string& s) {
  if (s == "sqrt_lambda") return ScaleRule::sqrt_lambda;
  if (s == "norm_of_d") return ScaleRule::norm_of_d;
  throw ConfigError("unknown scale rule: " + s);
}

SpectralInit spectral_init(const ForwardMap& F, const RVec& d, ScaleRule rule,
                           std::uint64_t seed) {
  if (d.size() != F.M()) throw ConfigError("spectral_init: length mismatch");
  if (!d.allFinite()) throw NumericError("spectral_init: non-finite measurements");
  const CMat Y = spectral_matrix(F, d);
  PowerOptions opts;
  opts.seed = seed;
  PowerResult r = power_iteration(Y, opts);
  if (r.pair.value < 0.0) {
    // noisy d can make Y indefinite; shifting by ||Y|| exposes the top algebraic eigenvalue
    const double shift = -r.pair.value;
    const CMat Ys = Y + shift * CMat::Identity(Y.rows(), Y.cols());
    r = power_iteration(Ys, opts);
    r.pair.value -= shift;
  }
  SpectralInit out;
  out.scale_rule = rule;
  out.leading = r.pair;
  out.converged = r.converged;
  const double lambda0 = r.pair.value;
  if (!(lambda0 > 0.0)) {
    out.estimate = CVec::Zero(F.N());
    out.degenerate = true;
    return out;
  }
  if (rule == ScaleRule::sqrt_lambda) {
    out.scale = std::sqrt(lambda0);
  } else {
    out.scale = std::pow(2.0 * static_cast<double>(F.M()), -0.25) * std::sqrt(d.norm());
  }
  out.estimate = out.scale * r.pair.vector;
  return out;
}

}  // namespace uwf
