#include "uwf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "uwf/errors.hpp"
#include "uwf/rng.hpp"

namespace uwf {
namespace {

CMat orthonormalize(const CMat& X) {
  Eigen::HouseholderQR<CMat> qr(X);
  return qr.householderQ() * CMat::Identity(X.rows(), X.cols());
}

CMat apply_block(const HermitianOperator& op, const CMat& X) {
  CMat Z(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    CVec col = op(X.col(j));
    if (col.size() != X.rows()) throw ConfigError("operator output has wrong dimension");
    Z.col(j) = col;
  }
  return Z;
}

}  // namespace

CVec random_cvec(Eigen::Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(i) = cd(re, im);
  }
  return v;
}

RVec random_rvec(Eigen::Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  RVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

HermitianEig jacobi_eigh(const CMat& H0, double tol, int max_sweeps) {
  const Eigen::Index n = H0.rows();
  if (H0.cols() != n) throw ConfigError("jacobi_eigh: matrix not square");
  CMat H = 0.5 * (H0 + H0.adjoint());
  CMat V = CMat::Identity(n, n);
  const double scale = std::max(H.norm(), 1e-300);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += std::norm(H(p, q));
    if (std::sqrt(off) <= tol * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double mag = std::abs(H(p, q));
        if (mag <= 1e-300) continue;
        // phase on column q makes H(p,q) real positive, then a real rotation zeroes it
        const cd phase = std::conj(H(p, q)) / mag;
        const double app = H(p, p).real();
        const double aqq = H(q, q).real();
        const double theta = 0.5 * (aqq - app) / mag;
        double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        H.col(q) *= phase;
        H.row(q) *= std::conj(phase);
        V.col(q) *= phase;

        CVec hp = H.col(p);
        CVec hq = H.col(q);
        H.col(p) = c * hp - s * hq;
        H.col(q) = s * hp + c * hq;
        Eigen::RowVectorXcd rp = H.row(p);
        Eigen::RowVectorXcd rq = H.row(q);
        H.row(p) = c * rp - s * rq;
        H.row(q) = s * rp + c * rq;
        CVec vp = V.col(p);
        CVec vq = V.col(q);
        V.col(p) = c * vp - s * vq;
        V.col(q) = s * vp + c * vq;

        H(p, q) = 0.0;
        H(q, p) = 0.0;
        H(p, p) = H(p, p).real();
        H(q, q) = H(q, q).real();
      }
    }
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return H(a, a).real() > H(b, b).real();
  });
  HermitianEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = H(order[k], order[k]).real();
    out.vectors.col(k) = V.col(order[k]).normalized();
  }
  return out;
}

PowerResult power_iteration(const HermitianOperator& op, Eigen::Index n,
                            const PowerOptions& opts) {
  if (n < 1) throw ConfigError("power_iteration: dimension must be >= 1");
  if (!(opts.tol > 0.0)) throw ConfigError("power_iteration: tol must be > 0");
  const Eigen::Index k = std::clamp<Eigen::Index>(opts.block, 1, n);

  CMat X(n, k);
  SplitMix64 rng(opts.seed);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      X(i, j) = cd(re, im);
    }
  if (opts.warm_start && opts.warm_start->size() == n && opts.warm_start->norm() > 0.0)
    X.col(0) = *opts.warm_start;
  X = orthonormalize(X);

  PowerResult best;
  best.residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= std::max(1, opts.max_iter); ++it) {
    CMat Z = apply_block(op, X);
    CMat Hs = X.adjoint() * Z;
    HermitianEig ritz = jacobi_eigh(Hs);
    // order Ritz pairs by magnitude
    std::vector<Eigen::Index> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(ritz.values(a)) > std::abs(ritz.values(b));
    });
    CMat S(k, k);
    for (Eigen::Index j = 0; j < k; ++j) S.col(j) = ritz.vectors.col(order[j]);
    const double theta = ritz.values(order[0]);
    CVec v = X * S.col(0);
    const double vn = v.norm();
    if (vn > 0.0) v /= vn;
    CVec Av = Z * S.col(0);
    if (vn > 0.0) Av /= vn;
    const double res = (Av - theta * v).norm();
    if (!std::isfinite(res) || !std::isfinite(theta))
      throw NumericError("power_iteration: non-finite iterate");
    if (res < best.residual) {
      best.pair.value = theta;
      best.pair.vector = v;
      best.residual = res;
    }
    best.iterations = it;
    if (res <= opts.tol * std::abs(theta) || res == 0.0) {
      best.pair.value = theta;
      best.pair.vector = v;
      best.residual = res;
      best.converged = true;
      return best;
    }
    X = orthonormalize(Z * S);
  }
  return best;
}

PowerResult power_iteration(const CMat& A, const PowerOptions& opts) {
  if (A.rows() != A.cols()) throw ConfigError("power_iteration: matrix not square");
  return power_iteration([&A](const CVec& x) -> CVec { return A * x; }, A.rows(), opts);
}

Rank2Eig rank2_eig(const CVec& p, const CVec& q) {
  if (p.size() != q.size()) throw ConfigError("rank2_eig: dimension mismatch");
  const Eigen::Index n = p.size();
  Rank2Eig out;
  const CVec e = p - q;
  const double a = e.squaredNorm();
  auto zero_pair = [n](Eigen::Index idx) {
    EigPair z;
    z.value = 0.0;
    z.vector = CVec::Zero(n);
    if (n > 0) z.vector(idx % n) = 1.0;
    return z;
  };
  if (a == 0.0) {
    out.first = zero_pair(0);
    out.second = zero_pair(1);
    out.degenerate = true;
    return out;
  }
  const cd c = p.dot(q);  // p^H q
  const cd b = 2.0 * c - p.squaredNorm() - q.squaredNorm();
  const cd disc = b * b + 4.0 * a * c;
  cd s = std::sqrt(disc);
  if (std::real(std::conj(b) * s) < 0.0) s = -s;
  const cd qq = -0.5 * (b + s);
  cd alpha[2];
  alpha[0] = qq / a;
  alpha[1] = (std::abs(qq) > 0.0) ? -c / qq : alpha[0];

  EigPair pairs[2];
  double tnorm[2];
  for (int i = 0; i < 2; ++i) {
    const CVec t = alpha[i] * p + (1.0 - alpha[i]) * q;
    tnorm[i] = t.norm();
    pairs[i].value = std::real(e.dot(t));
    pairs[i].vector = tnorm[i] > 0.0 ? CVec(t / tnorm[i]) : CVec::Zero(n);
  }
  const double ref = std::max(p.norm(), q.norm());
  for (int i = 0; i < 2; ++i) {
    if (tnorm[i] > 1e-14 * ref) continue;
    // zero eigenvalue: any unit vector orthogonal to the partner will do
    const CVec& other = pairs[1 - i].vector;
    Eigen::Index idx = 0;
    other.cwiseAbs().minCoeff(&idx);
    CVec v = CVec::Zero(n);
    v(idx) = 1.0;
    v -= other * other.dot(v);
    pairs[i].value = 0.0;
    pairs[i].vector = v.normalized();
  }
  if (pairs[1].value > pairs[0].value) std::swap(pairs[0], pairs[1]);
  out.first = pairs[0];
  out.second = pairs[1];
  return out;
}

CVec align_global_phase(const CVec& y, const CVec& x) {
  if (x.size() != y.size()) throw ConfigError("align_global_phase: dimension mismatch");
  const cd inner = y.dot(x);  // y^H x
  const double mag = std::abs(inner);
  if (mag == 0.0) return y;
  return y * (inner / mag);
}

double dist(const CVec& x, const CVec& y) {
  if (x.size() != y.size()) throw ConfigError("dist: dimension mismatch");
  return (x - align_global_phase(y, x)).norm();
}

double dist(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw ConfigError("dist: dimension mismatch");
  return std::min((x - y).norm(), (x + y).norm());
}

CVec canonical_phase(const CVec& x) {
  if (x.size() == 0) return x;
  Eigen::Index idx = 0;
  const double mag = x.cwiseAbs().maxCoeff(&idx);
  if (mag == 0.0) return x;
  return x * (std::conj(x(idx)) / mag);
}

SingularPair spectral_norm(const CMat& A, double tol, const CVec* warm_start, int max_iter) {
  SingularPair out;
  const Eigen::Index n = A.cols();
  if (n == 0 || A.rows() == 0) {
    out.right = CVec::Zero(n);
    out.left = CVec::Zero(A.rows());
    out.converged = true;
    return out;
  }
  PowerOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  opts.warm_start = warm_start;
  opts.block = warm_start ? 2 : 3;
  const PowerResult r = power_iteration(
      [&A](const CVec& x) -> CVec { return A.adjoint() * (A * x); }, n, opts);
  out.value = std::sqrt(std::max(0.0, r.pair.value));
  out.right = r.pair.vector;
  out.left = out.value > 0.0 ? CVec(A * out.right / out.value) : CVec::Zero(A.rows());
  out.converged = r.converged;
  out.iterations = r.iterations;
  return out;
}

RealSingularPair spectral_norm(const RMat& A, double tol, const RVec* warm_start, int max_iter) {
  const CMat Ac = A.cast<cd>();
  CVec warm;
  if (warm_start) warm = warm_start->cast<cd>();
  const SingularPair s = spectral_norm(Ac, tol, warm_start ? &warm : nullptr, max_iter);
  RealSingularPair out;
  out.value = s.value;
  out.converged = s.converged;
  out.iterations = s.iterations;
  // a real symmetric A^T A has a real leading eigenvector up to a global phase
  RVec v = canonical_phase(s.right).real();
  const double vn = v.norm();
  if (vn > 0.0) v /= vn;
  out.right = v;
  out.left = s.value > 0.0 ? RVec(A * v / s.value) : RVec::Zero(A.rows());
  return out;
}

double hermitian_norm(const CMat& H, double tol) {
  if (H.rows() == 0) return 0.0;
  PowerOptions opts;
  opts.tol = tol;
  return std::abs(power_iteration(H, opts).pair.value);
}

bool is_hermitian(const CMat& A, double rel_tol) {
  if (A.rows() != A.cols()) return false;
  return (A - A.adjoint()).norm() <= rel_tol * A.norm();
}

}  // namespace uwf
