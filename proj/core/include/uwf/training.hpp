#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uwf/data_io.hpp"
#include "uwf/unrolled.hpp"

namespace uwf {

struct TrainConfig {
  double eta = 0.1;  // intermediate-stage loss weight
  double eta1 = 0.01;
  double eta2 = 0.01;
  double eta3 = 0.01;
  double eta4 = 0.01;
  std::optional<double> target_mu_R;  // c2 is off when unset
  // per-layer spectral-norm targets; a single entry applies to every layer; empty turns c3/c4 off
  std::vector<double> mu_G_targets;
  std::vector<double> mu_H_targets;
  double max_pixel_prior = 0.0;  // weight of mean (max rho_hat - 1)^2, 0 = off
  double lr = 1e-3;
  double lr_decay = 1.0;  // multiplicative per epoch
  double grad_clip = 0.0;  // rescale gradients whose global norm exceeds this, 0 = off
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch = 20;
  int epochs = 100;
  std::uint64_t seed = 0;
  // power iteration for the c3/c4 singular pairs; warm starts make a few sweeps per step enough
  double spectral_tol = 1e-8;
  int spectral_max_iter = 50;

  void validate() const;
};

/// A training sample with its spectral initialization computed once.
struct PreparedSample {
  RVec rho_star;
  RVec d;
  CVec init;    // spectral estimate
  RVec enc_in;  // encoder_input(init)
};

std::vector<PreparedSample> prepare(const ForwardMap& F, const std::vector<Sample>& samples,
                                    ScaleRule rule = ScaleRule::sqrt_lambda);

struct LossBreakdown {
  double data = 0.0;
  double intermediate = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double pixel = 0.0;
  double total = 0.0;
};

/// Flat parameter vector: for encoder then decoder layers W (column-major) and b; then gammas.
RVec pack_params(const UnrolledModel& m);
void unpack_params(UnrolledModel& m, const RVec& p);
/// Human-readable owner of flat index i, e.g. "dec.L1.W".
std::string param_path(const UnrolledModel& m, Eigen::Index i);

struct SpectralWarm {
  std::vector<RVec> enc;
  std::vector<RVec> dec;
};

struct LossAndGrad {
  LossBreakdown loss;
  RVec grad;  // same layout as pack_params
};

LossBreakdown train_loss(const UnrolledModel& model, const ForwardMap& F,
                         const std::vector<PreparedSample>& batch, const TrainConfig& cfg);
LossAndGrad train_backward(const UnrolledModel& model, const ForwardMap& F,
                           const std::vector<PreparedSample>& batch, const TrainConfig& cfg,
                           SpectralWarm* warm = nullptr);

struct AdamState {
  RVec m;
  RVec v;
  std::int64_t step = 0;
};

/// Bias-corrected ADAM on the flat vector; step sizes are clamped to >= 1e-8 afterwards.
void adam_step(UnrolledModel& model, const RVec& grad, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct HistoryRow {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  LossBreakdown loss;  // mean over the epoch's minibatches
};

struct TrainState {
  AdamState adam;
  int epochs_done = 0;
  SpectralWarm warm;
  std::vector<HistoryRow> history;
};

/// ||rho_hat - rho*||^2 / ||rho*||^2 per sample.
std::vector<double> model_mse(const UnrolledModel& model, const ForwardMap& F,
                              const std::vector<PreparedSample>& set);

/// Runs epochs state.epochs_done .. cfg.epochs - 1. Shuffling depends only on (seed, epoch),
/// so a run resumed from a saved state matches an uninterrupted one.
void train(UnrolledModel& model, const ForwardMap& F, const std::vector<PreparedSample>& train_set,
           const std::vector<PreparedSample>& val_set, const TrainConfig& cfg, TrainState& state);

/// Seeded shuffle, then the last round(fraction * n) samples become the validation split.
std::pair<std::vector<Sample>, std::vector<Sample>> split_dataset(const std::vector<Sample>& all,
                                                                  double val_fraction,
                                                                  std::uint64_t seed);

void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path);

}  // namespace uwf
