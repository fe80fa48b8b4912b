#include <doctest.h>

#include <random>

#include <uwf/errors.hpp>
#include <uwf/net.hpp>

#include "support/oracles.hpp"

using namespace uwf;

namespace {

const Activation kRelu{ActKind::relu, 0.2};
const Activation kLeaky{ActKind::leaky_relu, 0.2};
const Activation kId{ActKind::identity, 0.2};

Net random_net(std::mt19937_64& g, const std::vector<Eigen::Index>& dims, Activation hidden) {
  Net n;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    Layer L;
    L.W = oracle::rand_rm(dims[k + 1], dims[k], g) / std::sqrt(double(dims[k]));
    L.b = 0.3 * oracle::rand_r(dims[k + 1], g);
    L.act = k + 2 == dims.size() ? kId : hidden;
    n.layers.push_back(L);
  }
  return n;
}

// straight-line evaluation written without the library
RVec eval_loop(const Net& n, const RVec& x) {
  std::vector<double> cur(x.data(), x.data() + x.size());
  for (const Layer& L : n.layers) {
    std::vector<double> nxt(static_cast<std::size_t>(L.W.rows()));
    for (Eigen::Index i = 0; i < L.W.rows(); ++i) {
      double z = L.b(i);
      for (Eigen::Index j = 0; j < L.W.cols(); ++j) z += L.W(i, j) * cur[static_cast<std::size_t>(j)];
      if (L.act.kind == ActKind::relu) z = z > 0 ? z : 0;
      if (L.act.kind == ActKind::leaky_relu) z = z > 0 ? z : L.act.slope * z;
      nxt[static_cast<std::size_t>(i)] = z;
    }
    cur = nxt;
  }
  return Eigen::Map<RVec>(cur.data(), static_cast<Eigen::Index>(cur.size()));
}

bool near_kink(const Net& n, const RVec& x) {
  const NetCache c = net_forward_cached(n, x);
  for (std::size_t k = 0; k + 1 < n.layers.size(); ++k)
    if (c.pre[k].cwiseAbs().minCoeff() < 1e-6) return true;
  return false;
}

}  // namespace

TEST_CASE("forward examples") {
  const Net id = identity_net(4);
  const RVec x = RVec::LinSpaced(4, -1, 2);
  CHECK((net_forward(id, x) - x).norm() == 0.0);
  Net r;
  r.layers.push_back({RMat::Identity(3, 3), RVec::Zero(3), kRelu});
  CHECK(net_forward(r, RVec::Constant(3, -1.0)).norm() == 0.0);
  CHECK_THROWS_AS(net_forward(id, RVec::Zero(3)), ConfigError);
}

TEST_CASE("forward matches the straight-line oracle") {
  std::mt19937_64 g(1);
  for (int t = 0; t < 20; ++t) {
    const Net n = random_net(g, {5, 7, 6, 3}, t % 2 ? kRelu : kLeaky);
    const RVec x = oracle::rand_r(5, g);
    CHECK((net_forward(n, x) - eval_loop(n, x)).norm() <= 1e-12 * (1 + eval_loop(n, x).norm()));
  }
}

TEST_CASE("make_net: shapes, zero biases, determinism, zero preservation") {
  const Net a = make_net({6, 8, 4}, kLeaky, kId, 3), b = make_net({6, 8, 4}, kLeaky, kId, 3);
  REQUIRE(a.layers.size() == 2);
  CHECK(a.layers[0].W.rows() == 8);
  CHECK(a.layers[1].W.cols() == 8);
  CHECK(a.layers[0].act.kind == ActKind::leaky_relu);
  CHECK(a.layers[1].act.kind == ActKind::identity);
  CHECK((a.layers[0].W - b.layers[0].W).norm() == 0.0);
  CHECK(net_forward(a, RVec::Zero(6)).norm() == 0.0);
  CHECK(a.input_dim() == 6);
  CHECK(a.output_dim() == 4);
}

TEST_CASE("validate catches broken chains and bad slopes") {
  Net n;
  n.layers.push_back({RMat::Zero(3, 2), RVec::Zero(3), kId});
  n.layers.push_back({RMat::Zero(2, 4), RVec::Zero(2), kId});
  CHECK_THROWS_AS(n.validate(), ConfigError);
  CHECK_THROWS_AS(activation_from_string("leaky_relu", 1.5), ConfigError);
  CHECK_THROWS_AS(activation_from_string("tanh"), ConfigError);
  CHECK(activation_from_string("relu").kind == ActKind::relu);
}

TEST_CASE("vjp examples") {
  const Net id = identity_net(3);
  const RVec v = RVec::LinSpaced(3, 1, 3);
  CHECK((net_vjp(id, RVec::Ones(3), v).grad_x - v).norm() == 0.0);
  std::mt19937_64 g(2);
  const Net n = random_net(g, {4, 5, 2}, kRelu);
  const VjpResult r = net_vjp(n, oracle::rand_r(4, g), RVec::Zero(2));
  CHECK(r.grad_x.norm() == 0.0);
  for (const LayerGrad& lg : r.params) {
    CHECK(lg.W.norm() == 0.0);
    CHECK(lg.b.norm() == 0.0);
  }
}

TEST_CASE("vjp matches central finite differences in inputs and parameters") {
  std::mt19937_64 g(3);
  int done = 0;
  while (done < 50) {
    const Net n = random_net(g, {4, 6, 5, 3}, done % 2 ? kRelu : kLeaky);
    const RVec x = oracle::rand_r(4, g), v = oracle::rand_r(3, g);
    if (near_kink(n, x)) continue;
    const VjpResult r = net_vjp(n, x, v);
    const RVec dir = oracle::rand_r(4, g);
    auto fx = [&](const RVec& z) { return v.dot(net_forward(n, z)); };
    CHECK(oracle::rel_err(r.grad_x.dot(dir), oracle::central(fx, x, dir)) <= 1e-5);
    for (std::size_t k = 0; k < n.layers.size(); ++k) {
      const RMat dW = oracle::rand_rm(n.layers[k].W.rows(), n.layers[k].W.cols(), g);
      const RVec db = oracle::rand_r(n.layers[k].b.size(), g);
      auto fp = [&](const RVec& t) {
        Net m = n;
        m.layers[k].W += t(0) * dW;
        m.layers[k].b += t(0) * db;
        return v.dot(net_forward(m, x));
      };
      const double an = (r.params[k].W.array() * dW.array()).sum() + r.params[k].b.dot(db);
      CHECK(oracle::rel_err(an, oracle::central(fp, RVec::Zero(1), RVec::Ones(1))) <= 1e-5);
    }
    ++done;
  }
}

TEST_CASE("jvp examples and duality with vjp") {
  const RVec u = RVec::LinSpaced(3, -1, 1);
  CHECK((net_jvp(identity_net(3), RVec::Ones(3), u) - u).norm() == 0.0);
  std::mt19937_64 g(4);
  const RMat W1 = oracle::rand_rm(4, 3, g), W2 = oracle::rand_rm(2, 4, g);
  Net lin;
  lin.layers.push_back({W1, RVec::Ones(4), kId});
  lin.layers.push_back({W2, RVec::Zero(2), kId});
  CHECK((net_jvp(lin, RVec::Zero(3), u) - W2 * W1 * u).norm() <= 1e-12);
  for (int t = 0; t < 50; ++t) {
    const Net n = random_net(g, {5, 8, 4}, t % 2 ? kRelu : kLeaky);
    const RVec x = oracle::rand_r(5, g), uu = oracle::rand_r(5, g), v = oracle::rand_r(4, g);
    const double lhs = v.dot(net_jvp(n, x, uu)), rhs = net_vjp(n, x, v).grad_x.dot(uu);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1 + std::abs(lhs)));
  }
}

TEST_CASE("lipschitz upper bound examples") {
  Net a;
  a.layers.push_back({2.0 * RMat::Identity(3, 3), RVec::Zero(3), kRelu});
  CHECK(lipschitz_upper(a) == doctest::Approx(2.0));
  a.layers.push_back({3.0 * RMat::Identity(3, 3), RVec::Zero(3), kId});
  CHECK(lipschitz_upper(a) == doctest::Approx(6.0));
}

TEST_CASE("empirical pairwise ratios never exceed the product bound") {
  std::mt19937_64 g(5);
  const Net n = random_net(g, {6, 10, 4}, kLeaky);
  std::vector<RVec> s;
  for (int i = 0; i < 142; ++i) s.push_back(oracle::rand_r(6, g));  // about 10^4 pairs
  const LipschitzEstimate e = lipschitz_empirical(n, s);
  CHECK(e.pairs == 142 * 141 / 2);
  CHECK(e.upper <= lipschitz_upper(n) + 1e-9);
  CHECK(e.lower <= e.upper);
}

TEST_CASE("empirical lipschitz examples") {
  std::mt19937_64 g(6);
  std::vector<RVec> s;
  for (int i = 0; i < 60; ++i) s.push_back(oracle::rand_r(3, g));
  const LipschitzEstimate id = lipschitz_empirical(identity_net(3), s);
  CHECK(id.upper == doctest::Approx(1.0));
  CHECK(id.lower == doctest::Approx(1.0));
  const LipschitzEstimate sc = lipschitz_empirical(linear_net(3.0 * RMat::Identity(3, 3)), s);
  CHECK(sc.upper == doctest::Approx(3.0));
  CHECK(sc.lower == doctest::Approx(3.0));

  const RMat W = oracle::rand_rm(3, 3, g);
  Eigen::JacobiSVD<RMat> svd(W);
  const LipschitzEstimate lw = lipschitz_empirical(linear_net(W), s);
  CHECK(lw.upper <= svd.singularValues()(0) + 1e-12);
  CHECK(lw.lower >= svd.singularValues()(2) - 1e-12);
  CHECK(lw.upper >= 0.8 * svd.singularValues()(0));

  // duplicates are skipped, all-duplicate input is rejected
  std::vector<RVec> dup(3, RVec::Ones(3));
  CHECK_THROWS_AS(lipschitz_empirical(identity_net(3), dup), ConfigError);
}
