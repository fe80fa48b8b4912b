#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uwf/forward_map.hpp"

namespace uwf {

/// (1/2M) sum_m (|<a_m, rho>|^2 - d_m)^2
double loss_J(const ForwardMap& F, const CVec& rho, const RVec& d);
/// (1/M) F^H(e) rho with e = |A rho|^2 - d.
CVec grad_J(const ForwardMap& F, const CVec& rho, const RVec& d);

struct WfConfig {
  int max_iter = 2000;
  double step = 0.2;
  // per-iteration step sizes; the last entry repeats once exhausted
  std::vector<double> schedule;
  // when > 0 and no schedule is given: gamma_l = min(1 - exp(-l / warmup), step)
  double warmup = 0.0;
  // stop when ||grad|| / ||rho0||^3 <= tol (0 disables)
  double tol = 0.0;
  bool record_trace = false;
  // rescale each iterate so max |rho_n| = 1
  bool max_pixel_prior = false;
};

enum class WfStatus { ok, converged, degenerate, diverged, non_finite };
std::string to_string(WfStatus s);

struct WfTrace {
  std::vector<CVec> iterates;
  std::vector<double> loss_history;  // entry l is J at iterate l (entry 0 = init)
  std::vector<double> dist_history;  // relative dist to truth when supplied
  CVec final;
  int iterations = 0;
  WfStatus status = WfStatus::ok;
  std::string diagnostic;
};

/// rho_l = rho_{l-1} - (gamma_l / ||rho_0||^2) grad_J(rho_{l-1}).
WfTrace run_wf(const ForwardMap& F, const RVec& d, const CVec& init, const WfConfig& cfg,
               const std::optional<CVec>& truth = std::nullopt);

/// Columns iter, loss, dist_to_truth (last column only when the trace has it).
void write_trace_csv(const WfTrace& trace, const std::string& path);

}  // namespace uwf
