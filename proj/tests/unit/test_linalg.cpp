#include <doctest.h>

#include <numbers>
#include <random>

#include <uwf/errors.hpp>
#include <uwf/linalg.hpp>

#include "support/oracles.hpp"

using namespace uwf;

namespace {

double subspace_gap(const CVec& v, const CVec& w) {
  // 1 - |<v, w>| for unit vectors; zero when they span the same line
  return 1.0 - std::abs(v.dot(w)) / (v.norm() * w.norm());
}

}  // namespace

TEST_CASE("power iteration on the identity returns 1 and a unit vector") {
  const PowerResult r = power_iteration(CMat::Identity(3, 3));
  CHECK(r.converged);
  CHECK(r.pair.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.pair.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power iteration on diag(3, 1) finds e1") {
  CMat A = CMat::Zero(2, 2);
  A(0, 0) = 3;
  A(1, 1) = 1;
  const PowerResult r = power_iteration(A);
  CHECK(r.pair.value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(r.pair.vector(0)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("power iteration agrees with a dense eigensolver on random Hermitian matrices") {
  std::mt19937_64 g(101);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    const CMat H = oracle::rand_herm(8, g);
    const oracle::Eig e = oracle::eigh(H);
    const Eigen::Index k = oracle::argmax_abs(e.values);
    PowerOptions o;
    o.seed = static_cast<std::uint64_t>(t);
    const PowerResult r = power_iteration(H, o);
    REQUIRE(r.converged);
    CHECK(std::abs(std::abs(r.pair.value) - std::abs(e.values(k))) <= 1e-8);
    CHECK(r.pair.value == doctest::Approx(e.values(k)).epsilon(1e-8));
    // residual contract against the largest Ritz magnitude
    CHECK((H * r.pair.vector - r.pair.value * r.pair.vector).norm() <= 1e-10 * std::abs(r.pair.value) * 1.0001);
    CHECK(r.pair.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // eigenvectors only compared when the leading magnitude is isolated
    RVec mags = e.values.cwiseAbs();
    std::sort(mags.data(), mags.data() + mags.size());
    if (mags(mags.size() - 1) - mags(mags.size() - 2) > 1e-3) {
      CHECK(subspace_gap(r.pair.vector, e.vectors.col(k)) <= 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 150);
}

TEST_CASE("power iteration is deterministic per seed and supports matrix-free operators") {
  std::mt19937_64 g(5);
  const CMat H = oracle::rand_herm(12, g);
  PowerOptions o;
  o.seed = 9;
  const PowerResult a = power_iteration(H, o), b = power_iteration(H, o);
  CHECK(a.pair.value == b.pair.value);
  CHECK((a.pair.vector - b.pair.vector).norm() == 0.0);
  const PowerResult c = power_iteration([&](const CVec& x) { CVec y = H * x; return y; }, 12, o);
  CHECK(c.pair.value == doctest::Approx(a.pair.value).epsilon(1e-10));
}

TEST_CASE("power iteration reports non-convergence with its best iterate") {
  std::mt19937_64 g(6);
  CMat H = oracle::rand_herm(20, g);
  PowerOptions o;
  o.max_iter = 1;
  o.block = 1;
  o.tol = 1e-14;
  const PowerResult r = power_iteration(H, o);
  CHECK_FALSE(r.converged);
  CHECK(r.pair.vector.size() == 20);
  CHECK(r.pair.vector.norm() == doctest::Approx(1.0));
  CHECK(r.residual > 0.0);
}

TEST_CASE("power iteration rejects bad inputs") {
  PowerOptions o;
  o.tol = 0.0;
  CHECK_THROWS_AS(power_iteration(CMat::Identity(2, 2), o), ConfigError);
  CHECK_THROWS_AS(power_iteration(CMat::Zero(2, 3)), ConfigError);
}

TEST_CASE("jacobi eigensolver matches the dense oracle") {
  std::mt19937_64 g(17);
  for (int t = 0; t < 50; ++t) {
    const CMat H = oracle::rand_herm(10, g);
    const HermitianEig e = jacobi_eigh(H);
    const oracle::Eig o = oracle::eigh(H);
    for (Eigen::Index i = 0; i < 10; ++i) CHECK(std::abs(e.values(i) - o.values(9 - i)) <= 1e-10);
    const CMat rec = e.vectors * e.values.cast<cd>().asDiagonal() * e.vectors.adjoint();
    CHECK((rec - H).norm() <= 1e-10 * H.norm());
  }
}

TEST_CASE("rank2_eig: orthonormal p, q give +1 and -1 with vectors p and q") {
  CVec p = CVec::Zero(3), q = CVec::Zero(3);
  p(0) = 1;
  q(1) = cd(0, 1);
  const Rank2Eig r = rank2_eig(p, q);
  CHECK_FALSE(r.degenerate);
  CHECK(r.first.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.second.value == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(subspace_gap(r.first.vector, p) <= 1e-14);
  CHECK(subspace_gap(r.second.vector, q) <= 1e-14);
}

TEST_CASE("rank2_eig: p = q is flagged degenerate with zero eigenvalues") {
  std::mt19937_64 g(2);
  const CVec p = oracle::rand_c(5, g);
  const Rank2Eig r = rank2_eig(p, p);
  CHECK(r.degenerate);
  CHECK(r.first.value == 0.0);
  CHECK(r.second.value == 0.0);
}

TEST_CASE("rank2_eig matches the dense eigensolver and reconstructs the lifted error") {
  std::mt19937_64 g(99);
  for (int t = 0; t < 200; ++t) {
    const CVec p = oracle::rand_c(16, g), q = oracle::rand_c(16, g);
    const CMat E = p * p.adjoint() - q * q.adjoint();
    const oracle::Eig o = oracle::eigh(E);
    const Rank2Eig r = rank2_eig(p, q);
    CHECK(std::abs(r.first.value - o.values(15)) <= 1e-10 * std::max(1.0, std::abs(o.values(15))));
    CHECK(std::abs(r.second.value - o.values(0)) <= 1e-10 * std::max(1.0, std::abs(o.values(0))));
    CHECK(r.first.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const CMat rec = r.first.value * r.first.vector * r.first.vector.adjoint() +
                     r.second.value * r.second.vector * r.second.vector.adjoint();
    CHECK((E - rec).norm() <= 1e-9 * (p.squaredNorm() + q.squaredNorm()));
  }
}

TEST_CASE("dist examples and identities") {
  std::mt19937_64 g(4);
  const CVec x = oracle::rand_c(6, g);
  CHECK(dist(x, x) <= 1e-12);
  CVec a = CVec::Zero(2), b = CVec::Zero(2);
  a(0) = 1;
  b(0) = cd(0, 1);
  CHECK(dist(a, b) <= 1e-15);
  const CVec y = oracle::rand_c(6, g);
  CHECK(dist(x, y) == doctest::Approx(dist(y, x)).epsilon(1e-14));
  for (double c : {0.0, 0.3, 1.0, 2.5}) {
    const cd rot = std::polar(c, 1.234);
    CHECK(dist(x, CVec(rot * x)) == doctest::Approx(std::abs(1.0 - c) * x.norm()).epsilon(1e-10));
  }
  CHECK_THROWS_AS(dist(x, CVec::Zero(3)), ConfigError);
  CHECK(dist(RVec::Ones(3), RVec(-RVec::Ones(3))) == 0.0);
}

TEST_CASE("dist is never above a dense phase-grid minimum") {
  std::mt19937_64 g(8);
  for (int t = 0; t < 20; ++t) {
    const CVec x = oracle::rand_c(5, g), y = oracle::rand_c(5, g);
    double best = 1e300;
    const int K = 20000;
    for (int k = 0; k < K; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / K;
      best = std::min(best, (x - y * std::polar(1.0, phi)).norm());
    }
    CHECK(dist(x, y) <= best + 1e-8);
    CHECK(dist(x, y) >= best - 1e-3);
  }
}

TEST_CASE("align_global_phase and canonical_phase") {
  std::mt19937_64 g(12);
  const CVec x = oracle::rand_c(7, g);
  const CVec y = x * std::polar(1.0, 2.0);
  CHECK((align_global_phase(y, x) - x).norm() <= 1e-12);
  const CVec c = canonical_phase(y);
  Eigen::Index k = 0;
  c.cwiseAbs().maxCoeff(&k);
  CHECK(std::abs(c(k).imag()) <= 1e-14);
  CHECK(c(k).real() >= 0.0);
  CHECK((canonical_phase(x) - c).norm() <= 1e-12);
}

TEST_CASE("spectral norm examples") {
  CHECK(spectral_norm(CMat(2.0 * CMat::Identity(4, 4))).value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(spectral_norm(CMat(CMat::Zero(3, 3))).value == 0.0);
  CHECK(spectral_norm(RMat(RMat::Zero(3, 2))).value == 0.0);
}

TEST_CASE("spectral norm matches a dense SVD and is invariant under adjoint") {
  std::mt19937_64 g(31);
  for (int t = 0; t < 50; ++t) {
    CMat A(10, 6);
    for (Eigen::Index j = 0; j < 6; ++j) A.col(j) = oracle::rand_c(10, g);
    const SingularPair s = spectral_norm(A);
    CHECK(s.converged);
    CHECK(std::abs(s.value - oracle::sigma_max(A)) <= 1e-8 * oracle::sigma_max(A));
    CHECK(std::abs(s.value - spectral_norm(CMat(A.adjoint())).value) <= 1e-9 * s.value);
    CHECK((A * s.right - s.value * s.left).norm() <= 1e-6 * s.value);

    const RMat B = oracle::rand_rm(10, 6, g);
    const RealSingularPair r = spectral_norm(B);
    CHECK(std::abs(r.value - oracle::sigma_max(B)) <= 1e-8 * oracle::sigma_max(B));
  }
}

TEST_CASE("a warm start from the previous right vector converges faster") {
  std::mt19937_64 g(41);
  RMat A = oracle::rand_rm(30, 20, g);
  const RealSingularPair cold = spectral_norm(A);
  A += 1e-4 * oracle::rand_rm(30, 20, g);
  const RealSingularPair warm = spectral_norm(A, 1e-10, &cold.right);
  CHECK(warm.converged);
  CHECK(warm.value == doctest::Approx(oracle::sigma_max(A)).epsilon(1e-8));
  CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("hermitian norm and hermitian check") {
  std::mt19937_64 g(3);
  const CMat H = oracle::rand_herm(6, g);
  const oracle::Eig e = oracle::eigh(H);
  CHECK(hermitian_norm(H) == doctest::Approx(e.values.cwiseAbs().maxCoeff()).epsilon(1e-10));
  CHECK(is_hermitian(H));
  CMat N = H;
  N(0, 1) += 1.0;
  CHECK_FALSE(is_hermitian(N));
}
