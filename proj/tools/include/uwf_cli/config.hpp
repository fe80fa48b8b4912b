#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include <uwf/training.hpp>
#include <uwf/wirtinger_flow.hpp>

namespace uwf::cli {

struct MapConfig {
  std::string kind = "gaussian";  // gaussian | fourier | file
  Eigen::Index M = 0;
  Eigen::Index N = 0;
  std::uint64_t seed = 0;
  std::string path;
};

struct ModelConfig {
  Eigen::Index N_y = 16;
  int L = 5;
  std::vector<Eigen::Index> encoder_dims;  // hidden widths
  std::vector<Eigen::Index> decoder_dims;
  std::string encoder_act = "leaky_relu";
  std::string decoder_act = "relu";
  double slope = 0.2;
  double gamma0 = 1e-3;
  std::uint64_t seed = 0;
};

struct DataConfig {
  std::string source = "squares";  // squares | idx
  std::string path;
  std::size_t count = 100;
  int H = 8;
  int W = 8;
  std::optional<double> snr_db;
  std::uint64_t seed = 0;
};

struct WfOptions {
  int iterations = 2000;
  double step = 0.2;
  double warmup = 0.0;
};

struct EvalConfig {
  std::vector<double> snr_sweep;  // empty = no sweep
  std::uint64_t noise_seed = 0;
};

struct RunConfig {
  std::uint64_t seed = 0;
  MapConfig map;
  ModelConfig model;
  TrainConfig train;
  double val_fraction = 0.1;
  ScaleRule scale_rule = ScaleRule::sqrt_lambda;
  DataConfig data;
  WfOptions wf;
  EvalConfig eval;
  bool max_pixel_prior = false;
  std::string out_dir = ".";

  WfConfig wf_config() const;
  ModelSpec model_spec() const;
};

/// Throws ConfigError on unknown keys, wrong types or out-of-range values.
/// A seed override replaces the top-level seed; sub-seeds not given explicitly derive from it.
RunConfig parse_config(const nlohmann::json& j, std::optional<std::uint64_t> seed = std::nullopt);
RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace uwf::cli
