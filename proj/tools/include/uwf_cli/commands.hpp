#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <uwf/training.hpp>
#include <uwf/wirtinger_flow.hpp>

#include "uwf_cli/config.hpp"

namespace uwf::cli {

/// A dataset file plus the forward map it was measured with.
struct DataBundle {
  std::vector<Sample> samples;
  ForwardMap map;
  nlohmann::json meta;
};

/// path may be a directory holding dataset.uwfd and map.uwfd, or a dataset file with map.uwfd
/// next to it. map_path overrides the sibling lookup.
DataBundle load_bundle(const std::string& path, const std::string& map_path = "");
ForwardMap build_map(const RunConfig& cfg);

/// Relative error after global phase alignment: dist(x, rho*)^2 / ||rho*||^2.
double wf_mse(const CVec& estimate, const RVec& rho_star);
/// Classic WF from the sample's spectral estimate; returns the final iterate.
WfTrace wf_baseline(const ForwardMap& F, const PreparedSample& s, const WfConfig& cfg);
std::vector<double> wf_baseline_mse(const ForwardMap& F, const std::vector<PreparedSample>& set,
                                    const WfConfig& cfg);

double mean_of(const std::vector<double>& v);
double median_of(std::vector<double> v);

/// gen-data: writes <out>/dataset.uwfd and <out>/map.uwfd.
void cmd_gen_data(const RunConfig& cfg, const std::string& out_dir);
/// train: writes <out>/model.uwfd and <out>/history.csv; resumes from resume_model when given.
void cmd_train(const RunConfig& cfg, const std::string& data, const std::string& out_dir,
               const std::string& resume_model = "");
/// reconstruct: writes <out>/reconstructions.uwfd with one estimate per row.
void cmd_reconstruct(const RunConfig& cfg, const std::string& model, const std::string& data,
                     const std::string& out_dir, const std::string& method);
/// eval: writes <out>/report.json and <out>/curves.csv.
void cmd_eval(const RunConfig& cfg, const std::string& model, const std::string& data,
              const std::string& out_dir, const std::string& baseline);
/// theory: writes <out>/theory_report.json.
void cmd_theory(const RunConfig& cfg, const std::string& model, const std::string& map,
                const std::string& samples, const std::string& out_dir, double eps_y);
/// plot: renders a curves CSV to SVG.
void cmd_plot(const std::string& curves, const std::string& out);

}  // namespace uwf::cli
