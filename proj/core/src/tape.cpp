#include "uwf/tape.hpp"

#include <cmath>

#include "uwf/errors.hpp"

namespace uwf {

Tape::Id Tape::push(RMat value, std::function<void(Tape&, const RMat&)> back) {
  if (!value.allFinite()) throw NumericError("tape: non-finite value at node " + std::to_string(nodes_.size()));
  Node n;
  n.grad = RMat::Zero(value.rows(), value.cols());
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

void Tape::accumulate(Id id, const RMat& g) { nodes_[id].grad += g; }

void Tape::check_scalar(Id id, const char* op) const {
  const RMat& v = nodes_.at(id).value;
  if (v.rows() != 1 || v.cols() != 1) throw ConfigError(std::string("tape ") + op + ": expected 1x1 operand");
}

Tape::Id Tape::constant(RMat value) { return push(std::move(value)); }
Tape::Id Tape::leaf(RMat value) { return push(std::move(value)); }

Tape::Id Tape::matmul(Id A, Id x) {
  if (value(A).cols() != value(x).rows()) throw ConfigError("tape matmul: shape mismatch");
  return push(value(A) * value(x), [A, x](Tape& t, const RMat& g) {
    t.accumulate(A, g * t.value(x).transpose());
    t.accumulate(x, t.value(A).transpose() * g);
  });
}

Tape::Id Tape::matmul_t(Id A, Id x) {
  if (value(A).rows() != value(x).rows()) throw ConfigError("tape matmul_t: shape mismatch");
  return push(value(A).transpose() * value(x), [A, x](Tape& t, const RMat& g) {
    t.accumulate(A, t.value(x) * g.transpose());
    t.accumulate(x, t.value(A) * g);
  });
}

Tape::Id Tape::const_matmul(const RMat* A, Id x) {
  if (A->cols() != value(x).rows()) throw ConfigError("tape const_matmul: shape mismatch");
  return push(*A * value(x), [A, x](Tape& t, const RMat& g) { t.accumulate(x, A->transpose() * g); });
}

Tape::Id Tape::const_matmul_t(const RMat* A, Id x) {
  if (A->rows() != value(x).rows()) throw ConfigError("tape const_matmul_t: shape mismatch");
  return push(A->transpose() * value(x), [A, x](Tape& t, const RMat& g) { t.accumulate(x, *A * g); });
}

Tape::Id Tape::add(Id a, Id b) {
  return push(value(a) + value(b), [a, b](Tape& t, const RMat& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Tape::Id Tape::sub(Id a, Id b) {
  return push(value(a) - value(b), [a, b](Tape& t, const RMat& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Tape::Id Tape::hadamard(Id a, Id b) {
  return push(value(a).cwiseProduct(value(b)), [a, b](Tape& t, const RMat& g) {
    t.accumulate(a, g.cwiseProduct(t.value(b)));
    t.accumulate(b, g.cwiseProduct(t.value(a)));
  });
}

Tape::Id Tape::scale(Id a, double s) {
  return push(s * value(a), [a, s](Tape& t, const RMat& g) { t.accumulate(a, s * g); });
}

Tape::Id Tape::scale_by(Id a, Id s) {
  check_scalar(s, "scale_by");
  return push(scalar(s) * value(a), [a, s](Tape& t, const RMat& g) {
    t.accumulate(a, t.scalar(s) * g);
    t.accumulate(s, RMat::Constant(1, 1, g.cwiseProduct(t.value(a)).sum()));
  });
}

Tape::Id Tape::add_const(Id a, const RMat& c) {
  return push(value(a) + c, [a](Tape& t, const RMat& g) { t.accumulate(a, g); });
}

Tape::Id Tape::activation(Id z, const Activation& act) {
  const RMat& zv = value(z);
  RMat mask = zv.unaryExpr([&](double v) { return act.deriv(v); });
  RMat out = zv.unaryExpr([&](double v) { return act.apply(v); });
  return push(std::move(out), [z, mask = std::move(mask)](Tape& t, const RMat& g) {
    t.accumulate(z, g.cwiseProduct(mask));
  });
}

Tape::Id Tape::mask_mul(Id x, RMat mask) {
  if (mask.rows() != value(x).rows() || mask.cols() != value(x).cols())
    throw ConfigError("tape mask_mul: shape mismatch");
  RMat out = value(x).cwiseProduct(mask);
  return push(std::move(out), [x, mask = std::move(mask)](Tape& t, const RMat& g) {
    t.accumulate(x, g.cwiseProduct(mask));
  });
}

Tape::Id Tape::sum_squares(Id a) {
  return push(RMat::Constant(1, 1, value(a).squaredNorm()), [a](Tape& t, const RMat& g) {
    t.accumulate(a, 2.0 * g(0, 0) * t.value(a));
  });
}

Tape::Id Tape::sum(Id a) {
  return push(RMat::Constant(1, 1, value(a).sum()), [a](Tape& t, const RMat& g) {
    t.accumulate(a, RMat::Constant(t.value(a).rows(), t.value(a).cols(), g(0, 0)));
  });
}

Tape::Id Tape::sqrt(Id s) {
  check_scalar(s, "sqrt");
  const double r = std::sqrt(scalar(s));
  return push(RMat::Constant(1, 1, r), [s, r](Tape& t, const RMat& g) {
    if (r > 0.0) t.accumulate(s, RMat::Constant(1, 1, 0.5 * g(0, 0) / r));
  });
}

Tape::Id Tape::square(Id s) {
  check_scalar(s, "square");
  const double v = scalar(s);
  return push(RMat::Constant(1, 1, v * v), [s, v](Tape& t, const RMat& g) {
    t.accumulate(s, RMat::Constant(1, 1, 2.0 * v * g(0, 0)));
  });
}

Tape::Id Tape::div(Id a, Id s) {
  check_scalar(s, "div");
  const double d = scalar(s);
  if (d == 0.0) throw NumericError("tape div: division by zero");
  return push(value(a) / d, [a, s, d](Tape& t, const RMat& g) {
    t.accumulate(a, g / d);
    t.accumulate(s, RMat::Constant(1, 1, -g.cwiseProduct(t.value(a)).sum() / (d * d)));
  });
}

Tape::Id Tape::max_element(Id a) {
  Eigen::Index r = 0, c = 0;
  const double m = value(a).maxCoeff(&r, &c);
  return push(RMat::Constant(1, 1, m), [a, r, c](Tape& t, const RMat& g) {
    RMat ga = RMat::Zero(t.value(a).rows(), t.value(a).cols());
    ga(r, c) = g(0, 0);
    t.accumulate(a, ga);
  });
}

Tape::Id Tape::max_of(const std::vector<Id>& scalars) {
  if (scalars.empty()) throw ConfigError("tape max_of: empty input");
  std::size_t best = 0;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    check_scalar(scalars[i], "max_of");
    if (scalar(scalars[i]) > scalar(scalars[best])) best = i;
  }
  const Id arg = scalars[best];
  return push(value(arg), [arg](Tape& t, const RMat& g) { t.accumulate(arg, g); });
}

Tape::Id Tape::add_all(const std::vector<Id>& scalars) {
  double total = 0.0;
  for (Id s : scalars) {
    check_scalar(s, "add_all");
    total += scalar(s);
  }
  return push(RMat::Constant(1, 1, total), [scalars](Tape& t, const RMat& g) {
    for (Id s : scalars) t.accumulate(s, g);
  });
}

Tape::Id Tape::spectral_norm(Id W, RVec* warm, double tol, int max_iter) {
  const RealSingularPair sp = uwf::spectral_norm(value(W), tol, warm, max_iter);
  if (warm) *warm = sp.right;
  RMat uv = sp.left * sp.right.transpose();
  return push(RMat::Constant(1, 1, sp.value), [W, uv = std::move(uv)](Tape& t, const RMat& g) {
    t.accumulate(W, g(0, 0) * uv);
  });
}

void Tape::backward(Id root) {
  check_scalar(root, "backward");
  for (Node& n : nodes_) n.grad.setZero();
  nodes_[root].grad(0, 0) = 1.0;
  for (Id i = root; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.back && !n.grad.isZero(0.0)) n.back(*this, n.grad);
  }
}

}  // namespace uwf
