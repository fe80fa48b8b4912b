#pragma once

#include <cstdint>
#include <vector>

#include "uwf/forward_map.hpp"
#include "uwf/net.hpp"

namespace uwf {

/// Encoder (2N -> N_y), L step sizes, decoder (N_y -> N).
struct UnrolledModel {
  Net encoder;
  Net decoder;
  std::vector<double> gammas;

  int L() const { return static_cast<int>(gammas.size()); }
  Eigen::Index N() const { return decoder.output_dim(); }
  Eigen::Index N_y() const { return decoder.input_dim(); }
  /// Throws ConfigError when encoder/decoder dims do not chain with N, N_y.
  void validate() const;
};

struct ModelSpec {
  Eigen::Index N = 64;
  Eigen::Index N_y = 16;
  int L = 5;
  std::vector<Eigen::Index> encoder_hidden;  // hidden widths, may be empty
  std::vector<Eigen::Index> decoder_hidden;
  Activation encoder_act{ActKind::leaky_relu, 0.2};
  Activation decoder_act{ActKind::relu, 0.2};
  double gamma0 = 0.1;
  std::uint64_t seed = 0;
};

/// Hidden layers use the configured activation; both output layers are identity.
UnrolledModel make_model(const ModelSpec& spec);

/// Phase-aligned spectral estimate stacked as [Re; Im].
RVec encoder_input(const CVec& init);

/// (1/2M) sum_m (|<a_m, H(y)>|^2 - d_m)^2
double loss_K(const Net& decoder, const ForwardMap& F, const RVec& y, const RVec& d);
/// J_H(y)^T Re[(1/M) F^H(e) H(y)].
RVec grad_K(const Net& decoder, const ForwardMap& F, const RVec& y, const RVec& d);

struct EncodedTrace {
  RVec y0;
  std::vector<RVec> y;  // y_1 .. y_L
  RVec rho_hat;
  double norm_y0_sq = 1.0;
  bool degenerate = false;  // ||y0|| = 0, normalizer replaced by 1

  const RVec& y_final() const { return y.empty() ? y0 : y.back(); }
};

/// y0 = encoder(input); y_l = y_{l-1} - (gamma_l / ||y0||^2) grad_K(y_{l-1}); rho_hat = H(y_L).
EncodedTrace rnn_forward_encoded(const UnrolledModel& model, const ForwardMap& F, const RVec& d,
                                 const RVec& enc_input);
EncodedTrace rnn_forward(const UnrolledModel& model, const ForwardMap& F, const RVec& d,
                         const SpectralInit& init);

/// Spectral init followed by rnn_forward.
RVec reconstruct(const UnrolledModel& model, const ForwardMap& F, const RVec& d,
                 ScaleRule rule = ScaleRule::sqrt_lambda);

}  // namespace uwf
