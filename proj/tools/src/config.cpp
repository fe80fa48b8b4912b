#include "uwf_cli/config.hpp"

#include <set>

#include <uwf/errors.hpp>
#include <uwf/rng.hpp>

namespace uwf::cli {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <class T>
void read(const json& j, const std::string& key, const std::string& where, T& out) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

// integers built in code arrive signed, parsed ones unsigned
bool non_negative_int(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::uint64_t read_seed(const json& j, const std::string& where, std::uint64_t base,
                        std::uint64_t stream) {
  if (!j.contains("seed")) return derive_seed(base, stream);
  const json& s = j.at("seed");
  if (!non_negative_int(s))
    throw ConfigError(where + ".seed: expected a non-negative integer");
  return s.get<std::uint64_t>();
}

void need_positive(double v, const std::string& what) {
  if (!(v > 0.0)) throw ConfigError(what + " must be > 0");
}

std::vector<Eigen::Index> read_dims(const json& j, const std::string& key, const std::string& where) {
  std::vector<Eigen::Index> out;
  if (!j.contains(key)) return out;
  const json& a = j.at(key);
  if (!a.is_array()) throw ConfigError(where + "." + key + ": expected an array");
  for (const json& v : a) {
    if (!v.is_number_integer() || v.get<long long>() <= 0)
      throw ConfigError(where + "." + key + ": widths must be positive integers");
    out.push_back(v.get<Eigen::Index>());
  }
  return out;
}

}  // namespace

WfConfig RunConfig::wf_config() const {
  WfConfig c;
  c.max_iter = wf.iterations;
  c.step = wf.step;
  c.warmup = wf.warmup;
  c.max_pixel_prior = max_pixel_prior;
  return c;
}

ModelSpec RunConfig::model_spec() const {
  ModelSpec s;
  s.N = map.N;
  s.N_y = model.N_y;
  s.L = model.L;
  s.encoder_hidden = model.encoder_dims;
  s.decoder_hidden = model.decoder_dims;
  s.encoder_act = activation_from_string(model.encoder_act, model.slope);
  s.decoder_act = activation_from_string(model.decoder_act, model.slope);
  s.gamma0 = model.gamma0;
  s.seed = model.seed;
  return s;
}

RunConfig parse_config(const json& j, std::optional<std::uint64_t> seed) {
  check_keys(j, "config",
             {"seed", "map", "model", "train", "data", "wf", "eval", "max_pixel_prior", "out_dir"});
  RunConfig c;
  if (j.contains("seed")) c.seed = read_seed(j, "config", 0, 0);
  if (seed) c.seed = *seed;
  read(j, "max_pixel_prior", "config", c.max_pixel_prior);
  read(j, "out_dir", "config", c.out_dir);

  const json empty = json::object();
  // commands that read a stored map do not need a map section
  const bool has_map = j.contains("map");
  const json& m = has_map ? j.at("map") : empty;
  check_keys(m, "map", {"kind", "M", "N", "seed", "path"});
  if (!has_map) c.map.kind = "";
  read(m, "kind", "map", c.map.kind);
  read(m, "M", "map", c.map.M);
  read(m, "N", "map", c.map.N);
  read(m, "path", "map", c.map.path);
  c.map.seed = read_seed(m, "map", c.seed, 1);
  if (has_map) {
    if (c.map.kind == "file") {
      if (c.map.path.empty()) throw ConfigError("map.path is required for kind 'file'");
    } else if (c.map.kind == "gaussian" || c.map.kind == "fourier") {
      if (c.map.M <= 0 || c.map.N <= 0) throw ConfigError("map.M and map.N must be positive");
    } else {
      throw ConfigError("map.kind must be gaussian, fourier or file");
    }
  }

  const json& d = j.contains("data") ? j.at("data") : empty;
  check_keys(d, "data", {"source", "path", "count", "H", "W", "snr_db", "seed"});
  read(d, "source", "data", c.data.source);
  read(d, "path", "data", c.data.path);
  if (d.contains("count")) {
    if (!non_negative_int(d.at("count"))) throw ConfigError("data.count: expected a non-negative integer");
    c.data.count = d.at("count").get<std::size_t>();
  }
  read(d, "H", "data", c.data.H);
  read(d, "W", "data", c.data.W);
  if (d.contains("snr_db") && !d.at("snr_db").is_null()) c.data.snr_db = get<double>(d, "snr_db", "data");
  c.data.seed = read_seed(d, "data", c.seed, 2);
  if (c.data.source == "squares") {
    if (c.data.H < 4 || c.data.W < 4) throw ConfigError("data.H and data.W must be >= 4");
    if (has_map && c.map.kind != "file" && c.map.N != Eigen::Index(c.data.H) * c.data.W)
      throw ConfigError("map.N must equal data.H * data.W");
  } else if (c.data.source == "idx") {
    if (c.data.path.empty()) throw ConfigError("data.path is required for source 'idx'");
  } else {
    throw ConfigError("data.source must be squares or idx");
  }

  const json& md = j.contains("model") ? j.at("model") : empty;
  check_keys(md, "model",
             {"N_y", "L", "encoder_dims", "decoder_dims", "activations", "gamma0", "seed"});
  read(md, "N_y", "model", c.model.N_y);
  read(md, "L", "model", c.model.L);
  read(md, "gamma0", "model", c.model.gamma0);
  c.model.encoder_dims = read_dims(md, "encoder_dims", "model");
  c.model.decoder_dims = read_dims(md, "decoder_dims", "model");
  c.model.seed = read_seed(md, "model", c.seed, 3);
  if (md.contains("activations")) {
    const json& a = md.at("activations");
    check_keys(a, "model.activations", {"encoder", "decoder", "slope"});
    read(a, "encoder", "model.activations", c.model.encoder_act);
    read(a, "decoder", "model.activations", c.model.decoder_act);
    read(a, "slope", "model.activations", c.model.slope);
  }
  if (c.model.N_y <= 0) throw ConfigError("model.N_y must be positive");
  if (c.model.L < 0) throw ConfigError("model.L must be >= 0");
  need_positive(c.model.gamma0, "model.gamma0");
  // rejects unknown activation names early
  activation_from_string(c.model.encoder_act, c.model.slope);
  activation_from_string(c.model.decoder_act, c.model.slope);

  const json& t = j.contains("train") ? j.at("train") : empty;
  check_keys(t, "train",
             {"eta", "eta1", "eta2", "eta3", "eta4", "target_mu_R", "mu_G_targets", "mu_H_targets",
              "max_pixel_weight", "lr", "lr_decay", "grad_clip", "beta1", "beta2", "adam_eps",
              "batch", "epochs", "seed", "spectral_tol", "spectral_max_iter", "val_fraction",
              "scale_rule"});
  TrainConfig& tc = c.train;
  tc.grad_clip = 1.0;
  read(t, "eta", "train", tc.eta);
  read(t, "eta1", "train", tc.eta1);
  read(t, "eta2", "train", tc.eta2);
  read(t, "eta3", "train", tc.eta3);
  read(t, "eta4", "train", tc.eta4);
  if (t.contains("target_mu_R") && !t.at("target_mu_R").is_null())
    tc.target_mu_R = get<double>(t, "target_mu_R", "train");
  read(t, "mu_G_targets", "train", tc.mu_G_targets);
  read(t, "mu_H_targets", "train", tc.mu_H_targets);
  double pixel_weight = 1.0;
  read(t, "max_pixel_weight", "train", pixel_weight);
  tc.max_pixel_prior = c.max_pixel_prior ? pixel_weight : 0.0;
  read(t, "lr", "train", tc.lr);
  read(t, "lr_decay", "train", tc.lr_decay);
  read(t, "grad_clip", "train", tc.grad_clip);
  read(t, "beta1", "train", tc.beta1);
  read(t, "beta2", "train", tc.beta2);
  read(t, "adam_eps", "train", tc.adam_eps);
  read(t, "batch", "train", tc.batch);
  read(t, "epochs", "train", tc.epochs);
  read(t, "spectral_tol", "train", tc.spectral_tol);
  read(t, "spectral_max_iter", "train", tc.spectral_max_iter);
  read(t, "val_fraction", "train", c.val_fraction);
  tc.seed = read_seed(t, "train", c.seed, 4);
  if (t.contains("scale_rule")) c.scale_rule = scale_rule_from_string(get<std::string>(t, "scale_rule", "train"));
  if (!(c.val_fraction >= 0.0 && c.val_fraction < 1.0))
    throw ConfigError("train.val_fraction must be in [0, 1)");
  tc.validate();

  const json& w = j.contains("wf") ? j.at("wf") : empty;
  check_keys(w, "wf", {"iterations", "step", "warmup"});
  read(w, "iterations", "wf", c.wf.iterations);
  read(w, "step", "wf", c.wf.step);
  read(w, "warmup", "wf", c.wf.warmup);
  if (c.wf.iterations < 0) throw ConfigError("wf.iterations must be >= 0");
  need_positive(c.wf.step, "wf.step");
  if (c.wf.warmup < 0.0) throw ConfigError("wf.warmup must be >= 0");

  const json& e = j.contains("eval") ? j.at("eval") : empty;
  check_keys(e, "eval", {"snr_sweep", "noise_seed"});
  read(e, "snr_sweep", "eval", c.eval.snr_sweep);
  c.eval.noise_seed = e.contains("noise_seed") ? get<std::uint64_t>(e, "noise_seed", "eval")
                                               : derive_seed(c.seed, 5);
  return c;
}

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j, seed);
}

}  // namespace uwf::cli
