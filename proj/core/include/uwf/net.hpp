#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uwf/linalg.hpp"

namespace uwf {

enum class ActKind { identity, relu, leaky_relu };

struct Activation {
  ActKind kind = ActKind::identity;
  double slope = 0.2;  // leaky_relu only

  double apply(double z) const;
  // derivative; relu and leaky_relu use the z > 0 branch only, so f'(0) is 0 (or slope)
  double deriv(double z) const;
};

std::string to_string(const Activation& a);
Activation activation_from_string(const std::string& s, double slope = 0.2);

struct Layer {
  RMat W;  // out x in
  RVec b;  // out
  Activation act;
};

struct Net {
  std::vector<Layer> layers;

  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
  /// Throws ConfigError when shapes do not chain.
  void validate() const;
};

/// dims = {in, h1, ..., out}. Weights N(0, 1/fan_in), zero biases.
Net make_net(const std::vector<Eigen::Index>& dims, Activation hidden, Activation output,
             std::uint64_t seed);
Net identity_net(Eigen::Index n);
Net linear_net(const RMat& W);

RVec net_forward(const Net& net, const RVec& x);

struct NetCache {
  std::vector<RVec> inputs;  // input to each layer
  std::vector<RVec> pre;     // pre-activation of each layer
  RVec output;
};
NetCache net_forward_cached(const Net& net, const RVec& x);

struct LayerGrad {
  RMat W;
  RVec b;
};

struct VjpResult {
  RVec grad_x;
  std::vector<LayerGrad> params;
};

/// v^T J(x) and the parameter cotangents.
VjpResult net_vjp(const Net& net, const RVec& x, const RVec& v);
/// J(x) u.
RVec net_jvp(const Net& net, const RVec& x, const RVec& u);

/// Product of per-layer spectral norms.
double lipschitz_upper(const Net& net);

struct LipschitzEstimate {
  double upper = 0.0;
  double lower = 0.0;
  std::size_t pairs = 0;
};

/// Max and min of ||net(x1) - net(x2)|| / ||x1 - x2|| over all distinct sample pairs.
LipschitzEstimate lipschitz_empirical(const Net& net, const std::vector<RVec>& samples);

}  // namespace uwf
