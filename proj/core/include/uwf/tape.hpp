#pragma once

#include <functional>
#include <vector>

#include "uwf/linalg.hpp"
#include "uwf/net.hpp"

namespace uwf {

/// Reverse-mode differentiation over real matrices (vectors are n x 1, scalars 1 x 1).
/// Complex quantities enter through split real/imaginary operators. Nodes are recorded in
/// creation order, which is a topological order, so backward simply walks it in reverse.
class Tape {
 public:
  using Id = int;

  Id constant(RMat value);
  Id leaf(RMat value);

  Id matmul(Id A, Id x);    // A x
  Id matmul_t(Id A, Id x);  // A^T x
  // product with a caller-owned matrix that must outlive the tape
  Id const_matmul(const RMat* A, Id x);
  Id const_matmul_t(const RMat* A, Id x);

  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id hadamard(Id a, Id b);
  Id scale(Id a, double s);
  Id scale_by(Id a, Id s);  // s is 1 x 1
  Id add_const(Id a, const RMat& c);

  /// Elementwise activation; records f'(z) as a mask.
  Id activation(Id z, const Activation& act);
  /// Elementwise product with a constant mask.
  Id mask_mul(Id x, RMat mask);

  Id sum_squares(Id a);  // 1 x 1
  Id sum(Id a);          // 1 x 1
  Id sqrt(Id s);
  Id square(Id s);
  Id div(Id a, Id s);    // a / s, s is 1 x 1
  Id max_element(Id a);  // 1 x 1, gradient to the (first) argmax
  Id max_of(const std::vector<Id>& scalars);
  Id add_all(const std::vector<Id>& scalars);

  /// Largest singular value of a matrix node. Backward uses g u v^T.
  /// `warm` (optional, caller-owned) seeds the power iteration and receives the new vector.
  Id spectral_norm(Id W, RVec* warm = nullptr, double tol = 1e-10, int max_iter = 10000);

  const RMat& value(Id id) const { return nodes_.at(id).value; }
  const RMat& grad(Id id) const { return nodes_.at(id).grad; }
  double scalar(Id id) const { return nodes_.at(id).value(0, 0); }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(root)/d(root) = 1 (root must be 1 x 1) and propagates to every node.
  void backward(Id root);

 private:
  struct Node {
    RMat value;
    RMat grad;
    std::function<void(Tape&, const RMat&)> back;  // receives this node's gradient
  };

  Id push(RMat value, std::function<void(Tape&, const RMat&)> back = {});
  void accumulate(Id id, const RMat& g);
  void check_scalar(Id id, const char* op) const;

  std::vector<Node> nodes_;
};

}  // namespace uwf
