#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>
#include <uwf/errors.hpp>

#include "uwf_cli/commands.hpp"
#include "uwf_cli/config.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;
constexpr int kIoError = 4;

}  // namespace

int main(int argc, char** argv) {
  using namespace uwf::cli;
  CLI::App app{"uwf: phaseless imaging with Wirtinger flow and unrolled networks"};
  app.require_subcommand(1);

  std::string config, out, data, model, baseline = "wf", map, samples, curves, method = "model";
  std::optional<std::uint64_t> seed;
  double eps_y = 0.1;

  auto add_common = [&](CLI::App* c, bool need_config) {
    auto* o = c->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    if (need_config) o->required();
    c->add_option("--seed", seed, "override the base seed of the configuration");
  };

  auto* gen = app.add_subcommand("gen-data", "generate a dataset and forward map");
  add_common(gen, true);
  gen->add_option("--out", out, "output directory")->required();

  auto* tr = app.add_subcommand("train", "train an unrolled model");
  add_common(tr, true);
  tr->add_option("--data", data, "dataset directory or file")->required();
  tr->add_option("--out", out, "output directory")->required();
  tr->add_option("--model", model, "checkpoint to resume from");

  auto* rec = app.add_subcommand("reconstruct", "reconstruct every sample of a dataset");
  add_common(rec, false);
  rec->add_option("--data", data, "dataset directory or file")->required();
  rec->add_option("--out", out, "output directory")->required();
  rec->add_option("--model", model, "model checkpoint");
  rec->add_option("--method", method, "model or wf")->check(CLI::IsMember({"model", "wf"}));

  auto* ev = app.add_subcommand("eval", "evaluate a model against the WF baseline");
  add_common(ev, false);
  ev->add_option("--model", model, "model checkpoint")->required();
  ev->add_option("--data", data, "dataset directory or file")->required();
  ev->add_option("--out", out, "output directory")->required();
  ev->add_option("--baseline", baseline, "wf or none")->check(CLI::IsMember({"wf", "none"}));

  auto* th = app.add_subcommand("theory", "estimate the convergence-ledger constants");
  add_common(th, false);
  th->add_option("--model", model, "model checkpoint")->required();
  th->add_option("--map", map, "forward map container");
  th->add_option("--samples", samples, "dataset directory or file")->required();
  th->add_option("--out", out, "output directory")->required();
  th->add_option("--eps-y", eps_y, "latent perturbation radius")->check(CLI::PositiveNumber);

  auto* pl = app.add_subcommand("plot", "render a curves CSV as SVG");
  pl->add_option("--curves", curves, "curves CSV")->required()->check(CLI::ExistingFile);
  pl->add_option("--out", out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    auto cfg = [&] {
      if (config.empty()) return parse_config(nlohmann::json::object(), seed);
      return load_config(config, seed);
    };
    if (*gen) {
      cmd_gen_data(cfg(), out);
    } else if (*tr) {
      cmd_train(cfg(), data, out, model);
    } else if (*rec) {
      if (method == "model" && model.empty()) throw uwf::ConfigError("--model is required for method model");
      cmd_reconstruct(cfg(), model, data, out, method);
    } else if (*ev) {
      cmd_eval(cfg(), model, data, out, baseline);
    } else if (*th) {
      cmd_theory(cfg(), model, map, samples, out, eps_y);
    } else if (*pl) {
      cmd_plot(curves, out);
    }
  } catch (const uwf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const uwf::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumericError;
  } catch (const uwf::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIoError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
