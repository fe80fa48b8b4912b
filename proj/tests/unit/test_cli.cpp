#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>
#include <uwf/errors.hpp>

#include "uwf_cli/checkpoint.hpp"
#include "uwf_cli/commands.hpp"
#include "uwf_cli/config.hpp"
#include "uwf_cli/svg.hpp"

using namespace uwf;
using namespace uwf::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("uwf_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(UWF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_config() {
  return {{"seed", 5},
          {"map", {{"kind", "gaussian"}, {"M", 48}, {"N", 16}}},
          {"data", {{"source", "squares"}, {"count", 24}, {"H", 4}, {"W", 4}}},
          {"model", {{"N_y", 4}, {"L", 2}, {"encoder_dims", {8}}, {"decoder_dims", {8}}}},
          {"train", {{"epochs", 3}, {"batch", 5}, {"lr", 1e-3}}},
          {"wf", {{"iterations", 60}, {"step", 0.2}}}};
}

fs::path write_config(const fs::path& dir, const json& j, const std::string& name = "cfg.json") {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("config defaults and seed derivation") {
  const RunConfig a = parse_config(small_config());
  CHECK(a.seed == 5);
  CHECK(a.map.M == 48);
  CHECK(a.model.N_y == 4);
  CHECK(a.train.epochs == 3);
  CHECK(a.data.count == 24);
  CHECK(a.val_fraction == doctest::Approx(0.1));
  CHECK(a.scale_rule == ScaleRule::sqrt_lambda);

  const RunConfig b = parse_config(small_config(), 6);
  CHECK(b.seed == 6);
  CHECK(b.map.seed != a.map.seed);
  CHECK(b.data.seed != a.data.seed);

  json j = small_config();
  j["map"]["seed"] = 77;
  CHECK(parse_config(j, 6).map.seed == 77);

  j["max_pixel_prior"] = true;
  CHECK(parse_config(j).train.max_pixel_prior > 0.0);
  CHECK(parse_config(small_config()).train.max_pixel_prior == 0.0);
}

TEST_CASE("config rejects unknown keys and bad values") {
  auto bad = [](const std::function<void(json&)>& edit) {
    json j = small_config();
    edit(j);
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  };
  bad([](json& j) { j["bogus"] = 1; });
  bad([](json& j) { j["map"]["bogus"] = 1; });
  bad([](json& j) { j["model"]["activations"] = {{"bogus", "relu"}}; });
  bad([](json& j) { j["train"]["learning_rate"] = 1; });
  bad([](json& j) { j["data"]["count"] = -3; });
  bad([](json& j) { j["train"]["epochs"] = "ten"; });
  bad([](json& j) { j["seed"] = -1; });
  bad([](json& j) { j["map"]["N"] = 15; });
  bad([](json& j) { j["model"]["activations"] = {{"encoder", "tanh"}}; });
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), std::exception);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  CHECK(run("--help") == 0);
  CHECK(run("no-such-command") == 2);
  CHECK(run("gen-data --config /nonexistent.json --out " + dir.string()) == 2);
  json j = small_config();
  j["oops"] = 1;
  CHECK(run("gen-data --config " + write_config(dir, j).string() + " --out " + (dir / "d").string()) == 2);
  const fs::path good = write_config(dir, small_config(), "good.json");
  CHECK(run("train --config " + good.string() + " --data " + (dir / "missing").string() + " --out " +
            (dir / "t").string()) == 4);
  std::ofstream(dir / "junk.uwfd") << "not a container";
  CHECK(run("train --config " + good.string() + " --data " + (dir / "junk.uwfd").string() + " --out " +
            (dir / "t").string()) == 4);
}

TEST_CASE("gen-data is deterministic and scales linearly with count") {
  const fs::path dir = scratch("gen");
  const fs::path cfg = write_config(dir, small_config());
  REQUIRE(run("gen-data --config " + cfg.string() + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run("gen-data --config " + cfg.string() + " --out " + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "dataset.uwfd") == slurp(dir / "b" / "dataset.uwfd"));
  CHECK(slurp(dir / "a" / "map.uwfd") == slurp(dir / "b" / "map.uwfd"));
  REQUIRE(run("gen-data --config " + cfg.string() + " --seed 9 --out " + (dir / "c").string()) == 0);
  CHECK(slurp(dir / "a" / "dataset.uwfd") != slurp(dir / "c" / "dataset.uwfd"));

  std::vector<std::uintmax_t> sizes;
  for (int count : {10, 20, 30}) {
    json j = small_config();
    j["data"]["count"] = count;
    const fs::path out = dir / ("n" + std::to_string(count));
    REQUIRE(run("gen-data --config " + write_config(dir, j, "n.json").string() + " --out " + out.string()) == 0);
    sizes.push_back(fs::file_size(out / "dataset.uwfd"));
  }
  CHECK(sizes[1] - sizes[0] == sizes[2] - sizes[1]);
  CHECK(sizes[1] - sizes[0] == 10u * (16 + 48) * 8);
}

TEST_CASE("training writes history and resumes exactly") {
  const fs::path dir = scratch("train");
  const fs::path cfg = write_config(dir, small_config());
  REQUIRE(run("gen-data --config " + cfg.string() + " --out " + (dir / "data").string()) == 0);

  REQUIRE(run("train --config " + cfg.string() + " --data " + (dir / "data").string() + " --out " +
              (dir / "full").string()) == 0);
  const std::string hist = slurp(dir / "full" / "history.csv");
  CHECK(count_lines(hist) == 1 + 3);

  json j = small_config();
  j["train"]["epochs"] = 1;
  REQUIRE(run("train --config " + write_config(dir, j, "one.json").string() + " --data " +
              (dir / "data").string() + " --out " + (dir / "part").string()) == 0);
  REQUIRE(run("train --config " + cfg.string() + " --data " + (dir / "data").string() + " --model " +
              (dir / "part" / "model.uwfd").string() + " --out " + (dir / "resumed").string()) == 0);
  CHECK(slurp(dir / "resumed" / "history.csv") == hist);
  CHECK(slurp(dir / "resumed" / "model.uwfd") == slurp(dir / "full" / "model.uwfd"));
}

TEST_CASE("zero epochs leaves the initialization untouched") {
  const fs::path dir = scratch("zero");
  json j = small_config();
  j["train"]["epochs"] = 0;
  const fs::path cfg = write_config(dir, j);
  REQUIRE(run("gen-data --config " + cfg.string() + " --out " + (dir / "data").string()) == 0);
  REQUIRE(run("train --config " + cfg.string() + " --data " + (dir / "data").string() + " --out " +
              (dir / "m").string()) == 0);
  CHECK(count_lines(slurp(dir / "m" / "history.csv")) == 1);
  const Checkpoint ck = load_checkpoint((dir / "m" / "model.uwfd").string());
  ModelSpec spec = parse_config(j).model_spec();
  spec.N = 16;
  CHECK(pack_params(ck.model) == pack_params(make_model(spec)));
}

TEST_CASE("eval report and the WF column") {
  const fs::path dir = scratch("eval");
  const fs::path cfg = write_config(dir, small_config());
  REQUIRE(run("gen-data --config " + cfg.string() + " --out " + (dir / "data").string()) == 0);
  REQUIRE(run("train --config " + cfg.string() + " --data " + (dir / "data").string() + " --out " +
              (dir / "m").string()) == 0);
  REQUIRE(run("eval --config " + cfg.string() + " --model " + (dir / "m" / "model.uwfd").string() +
              " --data " + (dir / "data").string() + " --out " + (dir / "e").string()) == 0);
  const json r = json::parse(slurp(dir / "e" / "report.json"));
  for (const char* k : {"count", "M", "N", "N_y", "L", "model", "wf", "init_metrics", "stage_mse"})
    CHECK(r.contains(k));
  CHECK(r["count"] == 24);
  CHECK(r["stage_mse"].size() == 3);
  CHECK(r["model"]["per_sample"].size() == 24);

  // the baseline column equals a direct WF run on the same samples
  const RunConfig rc = parse_config(small_config());
  const DataBundle b = load_bundle((dir / "data").string());
  const auto set = prepare(b.map, b.samples, rc.scale_rule);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const WfTrace t = run_wf(b.map, set[i].d, set[i].init, rc.wf_config());
    const double want = wf_mse(t.final, set[i].rho_star);
    CHECK(r["wf"]["per_sample"][i].get<double>() == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(count_lines(slurp(dir / "e" / "curves.csv")) == 1 + 3);

  json j = small_config();
  j["eval"] = {{"snr_sweep", {10, 20}}};
  REQUIRE(run("eval --config " + write_config(dir, j, "sw.json").string() + " --model " +
              (dir / "m" / "model.uwfd").string() + " --data " + (dir / "data").string() + " --out " +
              (dir / "s").string()) == 0);
  const std::string curves = slurp(dir / "s" / "curves.csv");
  CHECK(curves.rfind("snr_db,model,wf\n", 0) == 0);
  CHECK(count_lines(curves) == 3);

  REQUIRE(run("plot --curves " + (dir / "s" / "curves.csv").string() + " --out " + (dir / "p.svg").string()) == 0);
  const std::string svg = slurp(dir / "p.svg");
  const std::regex poly("<polyline class=\"series\"");
  CHECK(std::distance(std::sregex_iterator(svg.begin(), svg.end(), poly), std::sregex_iterator()) == 2);
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, std::regex("data-xmin=\"([^\"]+)\" data-xmax=\"([^\"]+)\"")));
  CHECK(std::stod(m[1]) <= 10.0);
  CHECK(std::stod(m[2]) >= 20.0);

  REQUIRE(run("theory --model " + (dir / "m" / "model.uwfd").string() + " --samples " +
              (dir / "data").string() + " --out " + (dir / "th").string()) == 0);
  const json th = json::parse(slurp(dir / "th" / "theory_report.json"));
  for (const char* k : {"params", "checks", "delta1", "delta_upper", "delta1_sweep", "identity_reduction",
                        "init_metrics"})
    CHECK(th.contains(k));
  CHECK(th["params"]["M"] == 48);

  REQUIRE(run("reconstruct --method wf --data " + (dir / "data").string() + " --out " + (dir / "r").string()) == 0);
  const Container rec = load((dir / "r" / "reconstructions.uwfd").string());
  CHECK(rec.at("recon.mse").numel() == 24);
}

TEST_CASE("svg extent covers the data") {
  const CurveTable t = parse_curves_csv("x,a,b\n1,2,\n3,-1,5\n");
  REQUIRE(t.series.size() == 2);
  CHECK(std::isnan(t.y[1][0]));
  const std::string svg = render_svg(t);
  CHECK(svg.find("data-ymin=\"-1\"") != std::string::npos);
  CHECK(svg.find("data-ymax=\"5\"") != std::string::npos);
  CHECK(svg.find("data-name=\"a\"") != std::string::npos);
}

TEST_CASE("checkpoint round trip keeps model and optimizer state") {
  ModelSpec spec;
  spec.N = 6;
  spec.N_y = 3;
  spec.L = 2;
  spec.encoder_hidden = {5};
  spec.decoder_hidden = {4};
  spec.seed = 3;
  const UnrolledModel m = make_model(spec);
  TrainState st;
  st.epochs_done = 2;
  st.adam.step = 7;
  st.adam.m = RVec::LinSpaced(pack_params(m).size(), 0, 1);
  st.adam.v = st.adam.m * 2;
  const Checkpoint ck = checkpoint_from_container(deserialize(serialize(checkpoint_container(m, &st))));
  CHECK(pack_params(ck.model) == pack_params(m));
  CHECK(ck.model.decoder.layers[0].act.kind == m.decoder.layers[0].act.kind);
  REQUIRE(ck.state);
  CHECK(ck.state->epochs_done == 2);
  CHECK(ck.state->adam.step == 7);
  CHECK(ck.state->adam.v == st.adam.v);
  CHECK_FALSE(checkpoint_from_container(checkpoint_container(m, nullptr)).state);
  Container broken = checkpoint_container(m, nullptr);
  broken.tensors.pop_back();
  CHECK_THROWS_AS(checkpoint_from_container(broken), IoError);
}
