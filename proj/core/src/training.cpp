#include "uwf/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "uwf/errors.hpp"
#include "uwf/parallel.hpp"
#include "uwf/rng.hpp"
#include "uwf/tape.hpp"

namespace uwf {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  for (double e : {eta, eta1, eta2, eta3, eta4, max_pixel_prior})
    if (!(e >= 0.0)) throw ConfigError("loss weights must be >= 0");
  if (!(lr_decay > 0.0)) throw ConfigError("lr_decay must be > 0");
  if (!(spectral_tol > 0.0) || spectral_max_iter < 1) throw ConfigError("bad spectral power-iteration settings");
  if (!(grad_clip >= 0.0)) throw ConfigError("grad_clip must be >= 0");
}

std::vector<PreparedSample> prepare(const ForwardMap& F, const std::vector<Sample>& samples,
                                    ScaleRule rule) {
  std::vector<PreparedSample> out(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Sample& s = samples[i];
    if (s.rho_star.size() != F.N() || s.d.size() != F.M())
      throw ConfigError("prepare: sample dimensions do not match the forward map");
    const SpectralInit init = spectral_init(F, s.d, rule);
    out[i] = PreparedSample{s.rho_star, s.d, init.estimate, encoder_input(init.estimate)};
  });
  return out;
}

RVec pack_params(const UnrolledModel& m) {
  std::vector<double> flat;
  for (const Net* net : {&m.encoder, &m.decoder})
    for (const Layer& L : net->layers) {
      flat.insert(flat.end(), L.W.data(), L.W.data() + L.W.size());
      flat.insert(flat.end(), L.b.data(), L.b.data() + L.b.size());
    }
  flat.insert(flat.end(), m.gammas.begin(), m.gammas.end());
  return Eigen::Map<RVec>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

void unpack_params(UnrolledModel& m, const RVec& p) {
  Eigen::Index off = 0;
  auto take = [&](double* dst, Eigen::Index n) {
    if (off + n > p.size()) throw ConfigError("unpack_params: vector too short");
    std::copy(p.data() + off, p.data() + off + n, dst);
    off += n;
  };
  for (Net* net : {&m.encoder, &m.decoder})
    for (Layer& L : net->layers) {
      take(L.W.data(), L.W.size());
      take(L.b.data(), L.b.size());
    }
  take(m.gammas.data(), static_cast<Eigen::Index>(m.gammas.size()));
  if (off != p.size()) throw ConfigError("unpack_params: vector too long");
}

std::string param_path(const UnrolledModel& m, Eigen::Index i) {
  Eigen::Index off = 0;
  const char* tags[2] = {"enc", "dec"};
  const Net* nets[2] = {&m.encoder, &m.decoder};
  for (int k = 0; k < 2; ++k)
    for (std::size_t j = 0; j < nets[k]->layers.size(); ++j) {
      const Layer& L = nets[k]->layers[j];
      const std::string base = std::string(tags[k]) + ".L" + std::to_string(j);
      if (i < off + L.W.size()) return base + ".W";
      off += L.W.size();
      if (i < off + L.b.size()) return base + ".b";
      off += L.b.size();
    }
  return "rnn.gamma[" + std::to_string(i - off) + "]";
}

namespace {

struct NetIds {
  std::vector<Tape::Id> W, b;
};

struct Built {
  Tape::Id total;
  LossBreakdown parts;
  NetIds enc, dec;
  std::vector<Tape::Id> gammas;
};

struct ForwardIds {
  Tape::Id out;
  std::vector<RMat> masks;  // f'(pre-activation) per layer
};

ForwardIds tape_forward(Tape& t, const Net& net, const NetIds& ids, Tape::Id x) {
  ForwardIds r;
  Tape::Id h = x;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const Activation& act = net.layers[k].act;
    const Tape::Id z = t.add(t.matmul(ids.W[k], h), ids.b[k]);
    r.masks.push_back(t.value(z).unaryExpr([&](double v) { return act.deriv(v); }));
    h = t.activation(z, act);
  }
  r.out = h;
  return r;
}

double target_for(const std::vector<double>& targets, std::size_t k) {
  return targets.size() == 1 ? targets[0] : targets.at(k);
}

Tape::Id spectral_penalty(Tape& t, const Net& net, const NetIds& ids,
                          const std::vector<double>& targets, std::vector<RVec>* warm, double tol,
                          int max_iter) {
  if (targets.size() != 1 && targets.size() != net.layers.size())
    throw ConfigError("spectral-norm targets must have one entry or one per layer");
  if (warm) warm->resize(net.layers.size());
  std::vector<Tape::Id> terms;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    RVec* w = warm ? &(*warm)[k] : nullptr;
    if (w && w->size() != net.layers[k].W.cols()) *w = RVec();
    const Tape::Id s = t.spectral_norm(ids.W[k], w, tol, max_iter);
    terms.push_back(t.square(t.add_const(s, RMat::Constant(1, 1, -target_for(targets, k)))));
  }
  return t.add_all(terms);
}

Built build(Tape& t, const UnrolledModel& model, const ForwardMap& F,
            const std::vector<PreparedSample>& batch, const TrainConfig& cfg, SpectralWarm* warm) {
  if (batch.empty()) throw ConfigError("train_loss: empty batch");
  Built b;
  for (const Layer& L : model.encoder.layers) {
    b.enc.W.push_back(t.leaf(L.W));
    b.enc.b.push_back(t.leaf(L.b));
  }
  for (const Layer& L : model.decoder.layers) {
    b.dec.W.push_back(t.leaf(L.W));
    b.dec.b.push_back(t.leaf(L.b));
  }
  for (double g : model.gammas) b.gammas.push_back(t.leaf(RMat::Constant(1, 1, g)));

  const double inv_m = 1.0 / static_cast<double>(F.M());
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const RMat* Ar = &F.real_part();
  const RMat* Ai = &F.imag_part();
  const std::size_t K = model.decoder.layers.size();

  std::vector<Tape::Id> data_terms, inter_terms, pixel_terms, y0s, yLs;
  for (const PreparedSample& s : batch) {
    if (s.rho_star.size() != F.N() || s.d.size() != F.M())
      throw ConfigError("train_loss: sample dimensions do not match the forward map");
    const Tape::Id truth = t.constant(s.rho_star);
    const RMat neg_d = -s.d;
    const Tape::Id y0 = tape_forward(t, model.encoder, b.enc, t.constant(s.enc_in)).out;
    // step normalizer ||y0||^2 stays on the tape; a zero encoding falls back to 1
    Tape::Id n0 = t.sum_squares(y0);
    if (!(t.scalar(n0) > 0.0)) n0 = t.constant(RMat::Ones(1, 1));

    Tape::Id y = y0;
    std::vector<Tape::Id> inter;
    for (int l = 0; l < model.L(); ++l) {
      const ForwardIds dec = tape_forward(t, model.decoder, b.dec, y);
      const Tape::Id rho = dec.out;
      if (l >= 1) inter.push_back(t.sum_squares(t.sub(rho, truth)));
      const Tape::Id u = t.const_matmul(Ar, rho);
      const Tape::Id v = t.const_matmul(Ai, rho);
      const Tape::Id e = t.add_const(t.add(t.hadamard(u, u), t.hadamard(v, v)), neg_d);
      Tape::Id w = t.scale(t.add(t.const_matmul_t(Ar, t.hadamard(e, u)),
                                 t.const_matmul_t(Ai, t.hadamard(e, v))),
                           inv_m);
      // J_H(y)^T w as masked affine ops, so reverse mode sees its dependence on W
      for (std::size_t k = K; k-- > 0;) w = t.matmul_t(b.dec.W[k], t.mask_mul(w, dec.masks[k]));
      y = t.sub(y, t.div(t.scale_by(w, b.gammas[static_cast<std::size_t>(l)]), n0));
    }
    const Tape::Id rho_hat = tape_forward(t, model.decoder, b.dec, y).out;
    data_terms.push_back(t.sum_squares(t.sub(rho_hat, truth)));
    if (!inter.empty()) inter_terms.push_back(t.add_all(inter));
    if (cfg.max_pixel_prior > 0.0)
      pixel_terms.push_back(t.square(t.add_const(t.max_element(rho_hat), RMat::Constant(1, 1, -1.0))));
    y0s.push_back(y0);
    yLs.push_back(y);
  }

  std::vector<Tape::Id> parts;
  const Tape::Id data = t.scale(t.add_all(data_terms), inv_b);
  parts.push_back(data);
  const Tape::Id inter = t.scale(t.add_all(inter_terms), cfg.eta * inv_b);
  parts.push_back(inter);

  Tape::Id c1 = t.constant(RMat::Zero(1, 1));
  if (cfg.eta1 > 0.0) {
    const Tape::Id g0 = tape_forward(t, model.encoder, b.enc,
                                     t.constant(RMat::Zero(model.encoder.input_dim(), 1))).out;
    const Tape::Id h0 = tape_forward(t, model.decoder, b.dec,
                                     t.constant(RMat::Zero(model.decoder.input_dim(), 1))).out;
    c1 = t.scale(t.add(t.sum_squares(g0), t.sum_squares(h0)), cfg.eta1);
  }
  parts.push_back(c1);

  Tape::Id c2 = t.constant(RMat::Zero(1, 1));
  if (cfg.eta2 > 0.0 && cfg.target_mu_R && batch.size() >= 2) {
    std::vector<Tape::Id> ratios;
    for (std::size_t i = 0; i < batch.size(); ++i)
      for (std::size_t j = i + 1; j < batch.size(); ++j) {
        const Tape::Id den = t.sum_squares(t.sub(y0s[i], y0s[j]));
        if (!(t.scalar(den) > 0.0)) continue;
        const Tape::Id num = t.sum_squares(t.sub(yLs[i], yLs[j]));
        ratios.push_back(t.div(t.sqrt(num), t.sqrt(den)));
      }
    if (!ratios.empty()) {
      const Tape::Id mx = t.max_of(ratios);
      c2 = t.scale(t.square(t.add_const(mx, RMat::Constant(1, 1, -*cfg.target_mu_R))), cfg.eta2);
    }
  }
  parts.push_back(c2);

  Tape::Id c3 = t.constant(RMat::Zero(1, 1));
  if (cfg.eta3 > 0.0 && !cfg.mu_G_targets.empty())
    c3 = t.scale(spectral_penalty(t, model.encoder, b.enc, cfg.mu_G_targets, warm ? &warm->enc : nullptr,
                                  cfg.spectral_tol, cfg.spectral_max_iter),
                 cfg.eta3);
  parts.push_back(c3);

  Tape::Id c4 = t.constant(RMat::Zero(1, 1));
  if (cfg.eta4 > 0.0 && !cfg.mu_H_targets.empty())
    c4 = t.scale(spectral_penalty(t, model.decoder, b.dec, cfg.mu_H_targets, warm ? &warm->dec : nullptr,
                                  cfg.spectral_tol, cfg.spectral_max_iter),
                 cfg.eta4);
  parts.push_back(c4);

  Tape::Id pixel = t.constant(RMat::Zero(1, 1));
  if (!pixel_terms.empty()) pixel = t.scale(t.add_all(pixel_terms), cfg.max_pixel_prior * inv_b);
  parts.push_back(pixel);

  b.total = t.add_all(parts);
  b.parts.data = t.scalar(data);
  b.parts.intermediate = t.scalar(inter);
  b.parts.c1 = t.scalar(c1);
  b.parts.c2 = t.scalar(c2);
  b.parts.c3 = t.scalar(c3);
  b.parts.c4 = t.scalar(c4);
  b.parts.pixel = t.scalar(pixel);
  b.parts.total = t.scalar(b.total);
  return b;
}

}  // namespace

LossBreakdown train_loss(const UnrolledModel& model, const ForwardMap& F,
                         const std::vector<PreparedSample>& batch, const TrainConfig& cfg) {
  Tape t;
  return build(t, model, F, batch, cfg, nullptr).parts;
}

LossAndGrad train_backward(const UnrolledModel& model, const ForwardMap& F,
                           const std::vector<PreparedSample>& batch, const TrainConfig& cfg,
                           SpectralWarm* warm) {
  Tape t;
  const Built b = build(t, model, F, batch, cfg, warm);
  t.backward(b.total);

  std::vector<double> flat;
  auto append = [&](Tape::Id id) {
    const RMat& g = t.grad(id);
    flat.insert(flat.end(), g.data(), g.data() + g.size());
  };
  for (const NetIds* ids : {&b.enc, &b.dec})
    for (std::size_t k = 0; k < ids->W.size(); ++k) {
      append(ids->W[k]);
      append(ids->b[k]);
    }
  for (Tape::Id g : b.gammas) append(g);

  LossAndGrad out;
  out.loss = b.parts;
  out.grad = Eigen::Map<RVec>(flat.data(), static_cast<Eigen::Index>(flat.size()));
  for (Eigen::Index i = 0; i < out.grad.size(); ++i)
    if (!std::isfinite(out.grad(i)))
      throw NumericError("non-finite gradient in " + param_path(model, i));
  return out;
}

void adam_step(UnrolledModel& model, const RVec& grad, AdamState& st, double lr, double beta1,
               double beta2, double eps) {
  RVec p = pack_params(model);
  if (grad.size() != p.size()) throw ConfigError("adam_step: gradient size mismatch");
  if (st.m.size() != p.size()) {
    st.m = RVec::Zero(p.size());
    st.v = RVec::Zero(p.size());
    st.step = 0;
  }
  ++st.step;
  st.m = beta1 * st.m + (1.0 - beta1) * grad;
  st.v = beta2 * st.v + (1.0 - beta2) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.step));
  for (Eigen::Index i = 0; i < p.size(); ++i)
    p(i) -= lr * (st.m(i) / bc1) / (std::sqrt(st.v(i) / bc2) + eps);
  unpack_params(model, p);
  for (double& g : model.gammas) g = std::max(g, 1e-8);
}

std::vector<double> model_mse(const UnrolledModel& model, const ForwardMap& F,
                              const std::vector<PreparedSample>& set) {
  std::vector<double> out(set.size());
  parallel_for(set.size(), [&](std::size_t i) {
    const RVec rho = rnn_forward_encoded(model, F, set[i].d, set[i].enc_in).rho_hat;
    const double den = set[i].rho_star.squaredNorm();
    out[i] = (rho - set[i].rho_star).squaredNorm() / (den > 0.0 ? den : 1.0);
  });
  return out;
}

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  SplitMix64 rng(seed);
  // Fisher-Yates with the project PRNG, so order never depends on the standard library
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace

void train(UnrolledModel& model, const ForwardMap& F, const std::vector<PreparedSample>& train_set,
           const std::vector<PreparedSample>& val_set, const TrainConfig& cfg, TrainState& state) {
  cfg.validate();
  model.validate();
  if (train_set.empty()) throw ConfigError("train: empty training set");
  for (int epoch = state.epochs_done; epoch < cfg.epochs; ++epoch) {
    const auto order = permutation(train_set.size(), derive_seed(cfg.seed, 0x7261696eULL + epoch));
    const double lr = cfg.lr * std::pow(cfg.lr_decay, epoch);
    LossBreakdown acc;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      std::vector<PreparedSample> batch;
      for (std::size_t k = start; k < std::min(order.size(), start + cfg.batch); ++k)
        batch.push_back(train_set[order[k]]);
      LossAndGrad lg = train_backward(model, F, batch, cfg, &state.warm);
      const double gn = lg.grad.norm();
      if (cfg.grad_clip > 0.0 && gn > cfg.grad_clip) lg.grad *= cfg.grad_clip / gn;
      adam_step(model, lg.grad, state.adam, lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
      acc.data += lg.loss.data;
      acc.intermediate += lg.loss.intermediate;
      acc.c1 += lg.loss.c1;
      acc.c2 += lg.loss.c2;
      acc.c3 += lg.loss.c3;
      acc.c4 += lg.loss.c4;
      acc.pixel += lg.loss.pixel;
      acc.total += lg.loss.total;
      ++batches;
    }
    HistoryRow row;
    row.epoch = epoch;
    const double inv = 1.0 / batches;
    row.loss = {acc.data * inv, acc.intermediate * inv, acc.c1 * inv, acc.c2 * inv,
                acc.c3 * inv,   acc.c4 * inv,           acc.pixel * inv, acc.total * inv};
    row.train_mse = mean(model_mse(model, F, train_set));
    row.val_mse = val_set.empty() ? 0.0 : mean(model_mse(model, F, val_set));
    state.history.push_back(row);
    state.epochs_done = epoch + 1;
  }
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_dataset(const std::vector<Sample>& all,
                                                                  double val_fraction,
                                                                  std::uint64_t seed) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must be in [0, 1)");
  const auto order = permutation(all.size(), derive_seed(seed, 0x76616cULL));
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(all.size())));
  std::pair<std::vector<Sample>, std::vector<Sample>> out;
  for (std::size_t k = 0; k < order.size(); ++k)
    (k + n_val < order.size() ? out.first : out.second).push_back(all[order[k]]);
  return out;
}

void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "epoch,train_mse,val_mse,data_term,intermediate,c1,c2,c3,c4,pixel,loss\n";
  out << std::setprecision(17);
  for (const HistoryRow& r : history)
    out << r.epoch << ',' << r.train_mse << ',' << r.val_mse << ',' << r.loss.data << ','
        << r.loss.intermediate << ',' << r.loss.c1 << ',' << r.loss.c2 << ',' << r.loss.c3 << ','
        << r.loss.c4 << ',' << r.loss.pixel << ',' << r.loss.total << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace uwf
