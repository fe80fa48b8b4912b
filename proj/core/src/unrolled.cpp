#include "uwf/unrolled.hpp"

#include "uwf/errors.hpp"
#include "uwf/rng.hpp"

namespace uwf {

void UnrolledModel::validate() const {
  encoder.validate();
  decoder.validate();
  if (encoder.output_dim() != decoder.input_dim())
    throw ConfigError("encoder output dim must equal decoder input dim (N_y)");
  if (encoder.input_dim() != 2 * decoder.output_dim())
    throw ConfigError("encoder input dim must be 2N");
  for (double g : gammas)
    if (!(g >= 0.0)) throw ConfigError("step sizes must be nonnegative");
}

UnrolledModel make_model(const ModelSpec& spec) {
  if (spec.N < 1 || spec.N_y < 1) throw ConfigError("model dims must be >= 1");
  if (spec.L < 0) throw ConfigError("L must be >= 0");
  std::vector<Eigen::Index> enc{2 * spec.N};
  enc.insert(enc.end(), spec.encoder_hidden.begin(), spec.encoder_hidden.end());
  enc.push_back(spec.N_y);
  std::vector<Eigen::Index> dec{spec.N_y};
  dec.insert(dec.end(), spec.decoder_hidden.begin(), spec.decoder_hidden.end());
  dec.push_back(spec.N);
  UnrolledModel m;
  m.encoder = make_net(enc, spec.encoder_act, Activation{}, derive_seed(spec.seed, 1));
  m.decoder = make_net(dec, spec.decoder_act, Activation{}, derive_seed(spec.seed, 2));
  m.gammas.assign(static_cast<std::size_t>(spec.L), spec.gamma0);
  return m;
}

RVec encoder_input(const CVec& init) {
  const CVec a = canonical_phase(init);
  RVec out(2 * a.size());
  out << a.real(), a.imag();
  return out;
}

double loss_K(const Net& decoder, const ForwardMap& F, const RVec& y, const RVec& d) {
  if (d.size() != F.M()) throw ConfigError("loss_K: length mismatch");
  const RVec rho = net_forward(decoder, y);
  if (rho.size() != F.N()) throw ConfigError("loss_K: decoder output dim != N");
  return (intensity(F, rho) - d).squaredNorm() / (2.0 * static_cast<double>(F.M()));
}

RVec grad_K(const Net& decoder, const ForwardMap& F, const RVec& y, const RVec& d) {
  if (d.size() != F.M()) throw ConfigError("grad_K: length mismatch");
  const RVec rho = net_forward(decoder, y);
  if (rho.size() != F.N()) throw ConfigError("grad_K: decoder output dim != N");
  const RVec u = F.real_part() * rho;
  const RVec v = F.imag_part() * rho;
  const RVec e = u.cwiseAbs2() + v.cwiseAbs2() - d;
  const RVec g_rho = (F.real_part().transpose() * e.cwiseProduct(u) +
                      F.imag_part().transpose() * e.cwiseProduct(v)) /
                     static_cast<double>(F.M());
  return net_vjp(decoder, y, g_rho).grad_x;
}

EncodedTrace rnn_forward_encoded(const UnrolledModel& model, const ForwardMap& F, const RVec& d,
                                 const RVec& enc_input) {
  EncodedTrace tr;
  tr.y0 = net_forward(model.encoder, enc_input);
  tr.norm_y0_sq = tr.y0.squaredNorm();
  if (!(tr.norm_y0_sq > 0.0)) {
    tr.norm_y0_sq = 1.0;
    tr.degenerate = true;
  }
  RVec y = tr.y0;
  for (double gamma : model.gammas) {
    y = y - (gamma / tr.norm_y0_sq) * grad_K(model.decoder, F, y, d);
    if (!y.allFinite()) throw NumericError("rnn_forward: non-finite encoded iterate");
    tr.y.push_back(y);
  }
  tr.rho_hat = net_forward(model.decoder, y);
  return tr;
}

EncodedTrace rnn_forward(const UnrolledModel& model, const ForwardMap& F, const RVec& d,
                         const SpectralInit& init) {
  if (init.estimate.size() != F.N()) throw ConfigError("rnn_forward: init dimension mismatch");
  return rnn_forward_encoded(model, F, d, encoder_input(init.estimate));
}

RVec reconstruct(const UnrolledModel& model, const ForwardMap& F, const RVec& d, ScaleRule rule) {
  if (d.size() != F.M()) throw ConfigError("reconstruct: length mismatch");
  return rnn_forward(model, F, d, spectral_init(F, d, rule)).rho_hat;
}

}  // namespace uwf
