#include "uwf_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include <uwf/errors.hpp>
#include <uwf/parallel.hpp>
#include <uwf/rng.hpp>
#include <uwf/theory.hpp>

#include "uwf_cli/checkpoint.hpp"
#include "uwf_cli/svg.hpp"

namespace fs = std::filesystem;

namespace uwf::cli {

namespace {

using nlohmann::json;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json summary(const std::vector<double>& v) {
  json per = json::array();
  for (double x : v) per.push_back(nan_to_null(x));
  return {{"mean", nan_to_null(mean_of(v))}, {"median", nan_to_null(median_of(v))}, {"per_sample", per}};
}

std::vector<RVec> images_of(const std::vector<Sample>& samples) {
  std::vector<RVec> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.rho_star);
  return out;
}

void check_dims(const UnrolledModel& m, const ForwardMap& F) {
  if (m.N() != F.N())
    throw ConfigError("model output length " + std::to_string(m.N()) + " does not match map N = " +
                      std::to_string(F.N()));
}

std::string fmt_csv(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ForwardMap build_map(const RunConfig& cfg) {
  if (cfg.map.kind == "gaussian") return make_gaussian(cfg.map.M, cfg.map.N, cfg.map.seed);
  if (cfg.map.kind == "fourier") return make_fourier(cfg.map.M, cfg.map.N);
  if (cfg.map.kind == "file") return map_from_container(load(cfg.map.path));
  throw ConfigError("config has no map section");
}

DataBundle load_bundle(const std::string& path, const std::string& map_path) {
  fs::path data = path, map;
  if (fs::is_directory(data)) {
    map = data / "map.uwfd";
    data /= "dataset.uwfd";
  } else {
    map = data.parent_path() / "map.uwfd";
  }
  if (!map_path.empty()) map = map_path;
  DataBundle b;
  const Container dc = load(data.string());
  b.samples = dataset_from_container(dc);
  b.meta = dc.meta;
  b.map = map_from_container(load(map.string()));
  for (const Sample& s : b.samples)
    if (s.rho_star.size() != b.map.N() || s.d.size() != b.map.M())
      throw ConfigError("dataset dimensions do not match the forward map");
  return b;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
  if (v.size() % 2) return v[h];
  const double hi = v[h];
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)));
}

double wf_mse(const CVec& estimate, const RVec& rho_star) {
  const double n2 = rho_star.squaredNorm();
  const double e = dist(estimate, CVec(rho_star.cast<cd>()));
  return n2 > 0.0 ? e * e / n2 : e * e;
}

WfTrace wf_baseline(const ForwardMap& F, const PreparedSample& s, const WfConfig& cfg) {
  return run_wf(F, s.d, s.init, cfg);
}

std::vector<double> wf_baseline_mse(const ForwardMap& F, const std::vector<PreparedSample>& set,
                                    const WfConfig& cfg) {
  std::vector<double> out(set.size());
  parallel_for(set.size(), [&](std::size_t i) {
    out[i] = wf_mse(wf_baseline(F, set[i], cfg).final, set[i].rho_star);
  });
  return out;
}

void cmd_gen_data(const RunConfig& cfg, const std::string& out_dir) {
  const ForwardMap F = build_map(cfg);
  std::vector<RVec> images;
  int H = cfg.data.H, W = cfg.data.W;
  if (cfg.data.source == "squares") {
    images = gen_squares(cfg.data.count, H, W, cfg.data.seed);
  } else {
    IdxData idx = load_idx(cfg.data.path);
    if (idx.images.empty()) throw ConfigError(cfg.data.path + " holds no images");
    H = static_cast<int>(idx.dims.at(1));
    W = static_cast<int>(idx.dims.at(2));
    if (idx.images.size() > cfg.data.count) idx.images.resize(cfg.data.count);
    images = std::move(idx.images);
  }
  if (Eigen::Index(H) * W != F.N())
    throw ConfigError("image size " + std::to_string(H) + "x" + std::to_string(W) +
                      " does not match map N = " + std::to_string(F.N()));
  const auto samples = synthesize(F, images, cfg.data.snr_db, derive_seed(cfg.data.seed, 7));
  json meta = {{"source", cfg.data.source}, {"H", H},           {"W", W},
               {"seed", cfg.data.seed},     {"map", F.kind()},  {"M", F.M()},
               {"N", F.N()},                {"snr_db", nullptr}};
  if (cfg.data.snr_db) meta["snr_db"] = *cfg.data.snr_db;
  ensure_dir(out_dir);
  store(join(out_dir, "dataset.uwfd"), dataset_container(samples, meta));
  store(join(out_dir, "map.uwfd"), map_container(F));
  std::fprintf(stderr, "wrote %zu samples (M=%ld, N=%ld) to %s\n", samples.size(),
               static_cast<long>(F.M()), static_cast<long>(F.N()), out_dir.c_str());
}

void cmd_train(const RunConfig& cfg, const std::string& data, const std::string& out_dir,
               const std::string& resume_model) {
  const DataBundle b = load_bundle(data);
  const ForwardMap& F = b.map;
  auto [tr, va] = split_dataset(b.samples, cfg.val_fraction, derive_seed(cfg.train.seed, 9));
  if (tr.empty()) throw ConfigError("training split is empty");
  const auto train_set = prepare(F, tr, cfg.scale_rule);
  const auto val_set = prepare(F, va, cfg.scale_rule);

  UnrolledModel model;
  TrainState state;
  if (!resume_model.empty()) {
    Checkpoint ck = load_checkpoint(resume_model);
    model = std::move(ck.model);
    if (ck.state) state = std::move(*ck.state);
  } else {
    ModelSpec spec = cfg.model_spec();
    spec.N = F.N();
    model = make_model(spec);
  }
  check_dims(model, F);

  train(model, F, train_set, val_set, cfg.train, state);

  ensure_dir(out_dir);
  save_checkpoint(join(out_dir, "model.uwfd"), model, &state);
  write_history_csv(state.history, join(out_dir, "history.csv"));
  if (!state.history.empty()) {
    const HistoryRow& r = state.history.back();
    std::fprintf(stderr, "epoch %d: train_mse %.6g val_mse %.6g loss %.6g\n", r.epoch, r.train_mse,
                 r.val_mse, r.loss.total);
  }
}

void cmd_reconstruct(const RunConfig& cfg, const std::string& model, const std::string& data,
                     const std::string& out_dir, const std::string& method) {
  const DataBundle b = load_bundle(data);
  const ForwardMap& F = b.map;
  const auto set = prepare(F, b.samples, cfg.scale_rule);
  const auto n = static_cast<Eigen::Index>(set.size());
  Container out;
  out.meta = {{"method", method}, {"count", set.size()}};
  RVec mse(n);
  if (method == "model") {
    const UnrolledModel m = load_checkpoint(model).model;
    check_dims(m, F);
    RMat R(n, F.N());
    parallel_for(set.size(), [&](std::size_t i) {
      const auto r = static_cast<Eigen::Index>(i);
      R.row(r) = rnn_forward_encoded(m, F, set[i].d, set[i].enc_in).rho_hat.transpose();
      const double n2 = set[i].rho_star.squaredNorm();
      const double e = (R.row(r).transpose() - set[i].rho_star).squaredNorm();
      mse(r) = n2 > 0.0 ? e / n2 : e;
    });
    out.put(Tensor::from("recon.rho_hat", R));
  } else if (method == "wf") {
    const WfConfig wc = cfg.wf_config();
    CMat R(n, F.N());
    parallel_for(set.size(), [&](std::size_t i) {
      const auto r = static_cast<Eigen::Index>(i);
      const CVec est = wf_baseline(F, set[i], wc).final;
      R.row(r) = align_global_phase(est, CVec(set[i].rho_star.cast<cd>())).transpose();
      mse(r) = wf_mse(est, set[i].rho_star);
    });
    out.put(Tensor::from("recon.rho_hat", R));
  } else {
    throw ConfigError("unknown reconstruction method: " + method);
  }
  out.put(Tensor::from("recon.mse", mse));
  ensure_dir(out_dir);
  store(join(out_dir, "reconstructions.uwfd"), out);
}

void cmd_eval(const RunConfig& cfg, const std::string& model, const std::string& data,
              const std::string& out_dir, const std::string& baseline) {
  if (baseline != "wf" && baseline != "none") throw ConfigError("--baseline must be wf or none");
  const DataBundle b = load_bundle(data);
  const ForwardMap& F = b.map;
  const UnrolledModel m = load_checkpoint(model).model;
  check_dims(m, F);
  const WfConfig wc = cfg.wf_config();
  const bool with_wf = baseline == "wf";

  const auto set = prepare(F, b.samples, cfg.scale_rule);
  json report = {{"count", set.size()}, {"M", F.M()}, {"N", F.N()}, {"N_y", m.N_y()}, {"L", m.L()}};
  report["model"] = summary(model_mse(m, F, set));
  if (with_wf) report["wf"] = summary(wf_baseline_mse(F, set, wc));
  if (!set.empty()) {
    const InitMetrics im = init_metrics(m, F, set);
    report["init_metrics"] = {{"d1", im.d1}, {"d2", im.d2}, {"d3", im.d3}, {"used", im.used},
                              {"skipped", im.skipped}};
  }

  std::string csv;
  if (!cfg.eval.snr_sweep.empty()) {
    csv = with_wf ? "snr_db,model,wf\n" : "snr_db,model\n";
    json sweep = json::array();
    const auto images = images_of(b.samples);
    for (double snr : cfg.eval.snr_sweep) {
      const auto noisy = prepare(F, synthesize(F, images, snr, cfg.eval.noise_seed), cfg.scale_rule);
      const auto mm = model_mse(m, F, noisy);
      json row = {{"snr_db", snr}, {"model", summary(mm)}};
      csv += fmt_csv(snr) + "," + fmt_csv(mean_of(mm));
      if (with_wf) {
        const auto wm = wf_baseline_mse(F, noisy, wc);
        row["wf"] = summary(wm);
        csv += "," + fmt_csv(mean_of(wm));
      }
      csv += "\n";
      sweep.push_back(row);
    }
    report["snr_sweep"] = sweep;
  } else {
    // mean relative error of the decoded iterate after each unrolled stage
    csv = "stage,model\n";
    std::vector<double> stage(static_cast<std::size_t>(m.L()) + 1, 0.0);
    std::size_t used = 0;
    for (const PreparedSample& s : set) {
      const double n2 = s.rho_star.squaredNorm();
      if (!(n2 > 0.0)) continue;
      const EncodedTrace tr = rnn_forward_encoded(m, F, s.d, s.enc_in);
      stage[0] += (net_forward(m.decoder, tr.y0) - s.rho_star).squaredNorm() / n2;
      for (std::size_t l = 0; l < tr.y.size(); ++l)
        stage[l + 1] += (net_forward(m.decoder, tr.y[l]) - s.rho_star).squaredNorm() / n2;
      ++used;
    }
    json st = json::array();
    for (std::size_t l = 0; l < stage.size(); ++l) {
      const double v = used ? stage[l] / static_cast<double>(used)
                            : std::numeric_limits<double>::quiet_NaN();
      csv += std::to_string(l) + "," + fmt_csv(v) + "\n";
      st.push_back(nan_to_null(v));
    }
    report["stage_mse"] = st;
  }

  ensure_dir(out_dir);
  write_file(join(out_dir, "report.json"), report.dump(2) + "\n");
  write_file(join(out_dir, "curves.csv"), csv);
}

void cmd_theory(const RunConfig& cfg, const std::string& model, const std::string& map,
                const std::string& samples, const std::string& out_dir, double eps_y) {
  const UnrolledModel m = load_checkpoint(model).model;
  const DataBundle b = load_bundle(samples, map);
  const ForwardMap& F = b.map;
  check_dims(m, F);
  EstimateInputs in;
  in.samples = prepare(F, b.samples, cfg.scale_rule);
  in.eps_y = eps_y;
  const TheoryParams p = estimate_params(m, F, in);
  const TheoryReport r = check_theorem1(p);

  json out = to_json(r);
  double hi = 2.0 * r.delta_upper;
  if (!(std::isfinite(hi) && hi > 0.0)) hi = 1.0;
  const Delta1Sweep sw = sweep_delta1(p, 0.0, hi, 64);
  json pts = json::array();
  for (const SweepPoint& q : sw.points) pts.push_back({{"delta", q.delta}, {"delta1", nan_to_null(q.delta1)}});
  out["delta1_sweep"] = {{"points", pts}, {"crossing", sw.crossing}, {"boundary", nan_to_null(sw.boundary)}};

  // same ledger with the decoder treated as the identity
  TheoryParams id = p;
  id.omega = 1.0;
  id.mu_G = id.mu_H = id.mu_H_tilde = id.mu_R = 1.0;
  id.sigma_H = id.sigma_H_tilde = 1.0;
  id.eps_y = id.eps;
  out["identity_reduction"] = to_json(check_theorem1(id));

  const InitMetrics im = init_metrics(m, F, in.samples);
  out["init_metrics"] = {{"d1", im.d1}, {"d2", im.d2}, {"d3", im.d3}, {"used", im.used}, {"skipped", im.skipped}};
  ensure_dir(out_dir);
  write_file(join(out_dir, "theory_report.json"), out.dump(2) + "\n");
}

void cmd_plot(const std::string& curves, const std::string& out) {
  const CurveTable t = parse_curves_csv(read_file(curves));
  const fs::path p = out;
  if (p.has_parent_path()) ensure_dir(p.parent_path().string());
  write_file(out, render_svg(t));
}

}  // namespace uwf::cli
