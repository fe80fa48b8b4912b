#include "uwf/net.hpp"

#include <cmath>
#include <limits>

#include "uwf/errors.hpp"
#include "uwf/rng.hpp"

namespace uwf {

double Activation::apply(double z) const {
  switch (kind) {
    case ActKind::identity: return z;
    case ActKind::relu: return z > 0.0 ? z : 0.0;
    case ActKind::leaky_relu: return z > 0.0 ? z : slope * z;
  }
  return z;
}

double Activation::deriv(double z) const {
  switch (kind) {
    case ActKind::identity: return 1.0;
    case ActKind::relu: return z > 0.0 ? 1.0 : 0.0;
    case ActKind::leaky_relu: return z > 0.0 ? 1.0 : slope;
  }
  return 1.0;
}

std::string to_string(const Activation& a) {
  switch (a.kind) {
    case ActKind::identity: return "identity";
    case ActKind::relu: return "relu";
    case ActKind::leaky_relu: return "leaky_relu";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) throw ConfigError("leaky slope must lie in (0, 1)");
  if (s == "identity") return {ActKind::identity, slope};
  if (s == "relu") return {ActKind::relu, slope};
  if (s == "leaky_relu") return {ActKind::leaky_relu, slope};
  throw ConfigError("unknown activation: " + s);
}

Eigen::Index Net::input_dim() const { return layers.empty() ? 0 : layers.front().W.cols(); }
Eigen::Index Net::output_dim() const { return layers.empty() ? 0 : layers.back().W.rows(); }

void Net::validate() const {
  if (layers.empty()) throw ConfigError("net has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& L = layers[k];
    if (L.b.size() != L.W.rows()) throw ConfigError("layer " + std::to_string(k) + ": bias size");
    if (k > 0 && L.W.cols() != layers[k - 1].W.rows())
      throw ConfigError("layer " + std::to_string(k) + ": input dim does not chain");
    if (L.act.kind == ActKind::leaky_relu && !(L.act.slope > 0.0 && L.act.slope < 1.0))
      throw ConfigError("leaky slope must lie in (0, 1)");
  }
}

Net make_net(const std::vector<Eigen::Index>& dims, Activation hidden, Activation output,
             std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("make_net: need at least input and output dims");
  SplitMix64 rng(seed);
  Net net;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    Layer L;
    const Eigen::Index in = dims[k], out = dims[k + 1];
    if (in < 1 || out < 1) throw ConfigError("make_net: dims must be >= 1");
    const double s = 1.0 / std::sqrt(static_cast<double>(in));
    L.W.resize(out, in);
    for (Eigen::Index i = 0; i < out; ++i)
      for (Eigen::Index j = 0; j < in; ++j) L.W(i, j) = s * rng.normal();
    L.b = RVec::Zero(out);
    L.act = (k + 2 == dims.size()) ? output : hidden;
    net.layers.push_back(std::move(L));
  }
  return net;
}

Net identity_net(Eigen::Index n) { return linear_net(RMat::Identity(n, n)); }

Net linear_net(const RMat& W) {
  Net net;
  net.layers.push_back(Layer{W, RVec::Zero(W.rows()), Activation{}});
  return net;
}

NetCache net_forward_cached(const Net& net, const RVec& x) {
  if (x.size() != net.input_dim()) throw ConfigError("net_forward: input dimension mismatch");
  NetCache c;
  RVec h = x;
  for (const Layer& L : net.layers) {
    c.inputs.push_back(h);
    RVec z = L.W * h + L.b;
    h = z.unaryExpr([&](double t) { return L.act.apply(t); });
    c.pre.push_back(std::move(z));
  }
  c.output = std::move(h);
  return c;
}

RVec net_forward(const Net& net, const RVec& x) {
  if (x.size() != net.input_dim()) throw ConfigError("net_forward: input dimension mismatch");
  RVec h = x;
  for (const Layer& L : net.layers) {
    RVec z = L.W * h + L.b;
    h = z.unaryExpr([&](double t) { return L.act.apply(t); });
  }
  return h;
}

VjpResult net_vjp(const Net& net, const RVec& x, const RVec& v) {
  if (v.size() != net.output_dim()) throw ConfigError("net_vjp: cotangent dimension mismatch");
  const NetCache c = net_forward_cached(net, x);
  VjpResult r;
  r.params.resize(net.layers.size());
  RVec w = v;
  for (std::size_t k = net.layers.size(); k-- > 0;) {
    const Layer& L = net.layers[k];
    const RVec gz = w.cwiseProduct(c.pre[k].unaryExpr([&](double t) { return L.act.deriv(t); }));
    r.params[k].W = gz * c.inputs[k].transpose();
    r.params[k].b = gz;
    w = L.W.transpose() * gz;
  }
  r.grad_x = std::move(w);
  return r;
}

RVec net_jvp(const Net& net, const RVec& x, const RVec& u) {
  if (u.size() != net.input_dim()) throw ConfigError("net_jvp: tangent dimension mismatch");
  const NetCache c = net_forward_cached(net, x);
  RVec t = u;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const Layer& L = net.layers[k];
    t = (L.W * t).cwiseProduct(c.pre[k].unaryExpr([&](double z) { return L.act.deriv(z); }));
  }
  return t;
}

double lipschitz_upper(const Net& net) {
  double prod = 1.0;
  for (const Layer& L : net.layers) prod *= spectral_norm(L.W, 1e-12).value;
  return prod;
}

LipschitzEstimate lipschitz_empirical(const Net& net, const std::vector<RVec>& samples) {
  if (samples.size() < 2) throw ConfigError("lipschitz_empirical: need at least 2 samples");
  std::vector<RVec> out;
  out.reserve(samples.size());
  for (const RVec& s : samples) out.push_back(net_forward(net, s));
  LipschitzEstimate est;
  est.lower = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double dx = (samples[i] - samples[j]).norm();
      if (dx == 0.0) continue;
      const double ratio = (out[i] - out[j]).norm() / dx;
      est.upper = std::max(est.upper, ratio);
      est.lower = std::min(est.lower, ratio);
      ++est.pairs;
    }
  if (est.pairs == 0) throw ConfigError("lipschitz_empirical: all samples are duplicates");
  return est;
}

}  // namespace uwf
