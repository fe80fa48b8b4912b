#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uwf/training.hpp"
#include "uwf/unrolled.hpp"

namespace uwf {

/// Delta(X) = (1/M) F^H F(X) - X - tr(X) I.
CMat delta_operator(const ForwardMap& F, const CMat& X);

struct DeltaEstimate {
  double max = 0.0;  // empirical lower bound on the supremum
  std::vector<double> values;
  std::size_t skipped = 0;  // zero-norm samples
};

/// ||Delta(rho rho^H)|| / ||rho||^2 over samples (spectral norm of a Hermitian matrix).
DeltaEstimate estimate_delta(const ForwardMap& F, const std::vector<CVec>& samples);

struct HTildeResult {
  CMat value;
  double lambda0 = 0.0;
  bool zero_path = false;         // lambda0 < 0
  double imag_residual = 0.0;     // ||Im u0|| after phase alignment (decoder is real-valued)
  double sign_sensitivity = 0.0;  // ||H(x)H(x)^T - H(-x)H(-x)^T||_F / ||H(x)||^2
};

/// H(sqrt(lambda0) u0) H(sqrt(lambda0) u0)^H with (lambda0, u0) the largest-magnitude eigenpair of Z.
/// u0 is rotated so its largest entry is real positive.
HTildeResult h_tilde(const Net& decoder, const CMat& Z);

struct OmegaEstimate {
  double omega = 0.0;
  std::size_t argmax = 0;
  std::size_t admissible = 0;
  std::vector<double> ratios;
  double max_sign_sensitivity = 0.0;
};

/// max ||Delta(Ht(yy^T) - Ht(y*y*^T))|| / ||Delta(Ht(yy^T - y*y*^T))|| over pairs with
/// ||y - y*|| <= eps_y ||y*||.
OmegaEstimate estimate_omega(const Net& decoder, const ForwardMap& F,
                             const std::vector<std::pair<RVec, RVec>>& pairs, double eps_y);

struct TheoryParams {
  double delta = 0.0;
  double omega = 1.0;
  double mu_G = 1.0, mu_H = 1.0, mu_H_tilde = 1.0, mu_R = 1.0;
  double sigma_H = 1.0, sigma_H_tilde = 1.0;
  double eps = 0.0;
  double eps_y = 0.0;
  double chi = 1.0;  // also used as tau in the Lipschitz window
  double xi_y = 1.0, xi_rho = 1.0;
  double alpha = 0.0, beta = 0.0;  // 0 = not supplied
  int L = 0;
  Eigen::Index M = 0, N = 0, N_y = 0;
};

enum class CheckStatus { pass, fail, indeterminate };
std::string to_string(CheckStatus s);

struct TheoryCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = false;  // lhs < rhs instead of lhs <= rhs
  CheckStatus status = CheckStatus::indeterminate;
};

struct TheoryReport {
  TheoryParams params;
  double eps_rho = 0.0;
  double delta_hat = 0.0;
  double c_val = 0.0;
  double h_val = 0.0;
  double delta1 = 0.0;
  double bound_4ab = 0.0;        // (mu~/mu)^8 (h/c)^2
  double bound_4ab_frame = 0.0;  // (mu~/mu)^4 (sigma~/sigma)^4 (h/c)^2
  double delta_upper = 0.0;
  double delta_upper_frame = 0.0;
  std::pair<double, double> lip_window{0.0, 0.0};  // admissible range of mu_G mu_H
  std::vector<TheoryCheck> checks;

  const TheoryCheck* find(const std::string& name) const;
};

/// eps_rho = mu_G mu_R mu_H (1 + eps) eps_y
double eps_rho_of(const TheoryParams& p);
/// c = (1 + eps_y)(2 + eps_y)(2 + omega delta)
double c_of(const TheoryParams& p);
/// delta1 = sqrt(2) delta_hat (2 + eps_rho)(2 + eps_y) / (mu~_H^2 (1 - eps_rho)(2 - eps_rho))
double delta1_of(const TheoryParams& p);
/// h = (1 - delta1)(1 - eps_rho)(2 - eps_rho)
double h_of(const TheoryParams& p);

TheoryReport check_theorem1(const TheoryParams& params);

struct SweepPoint {
  double delta = 0.0;
  double delta1 = 0.0;
};

struct Delta1Sweep {
  std::vector<SweepPoint> points;
  bool crossing = false;
  double boundary = 0.0;  // delta where delta1 = 1, refined by bisection
};

/// Evaluates delta1 over a uniform delta grid and bisects the first crossing of 1.
Delta1Sweep sweep_delta1(TheoryParams params, double lo, double hi, int steps);

struct InitMetrics {
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

InitMetrics init_metrics(const UnrolledModel& model, const ForwardMap& F,
                         const std::vector<PreparedSample>& testset);

/// b1 = (1/eps)(1/mu_H - mu_G (1 + eps)); b2 = mu_G/(eps mu_M)(1 - mu_R) with mu_M = mu_G mu_R mu_H.
std::pair<double, double> b1_b2(double mu_G, double mu_H, double mu_R, double eps);

struct AuditStage {
  int stage = 0;
  double dist2 = 0.0;
  double ratio = 1.0;   // dist2_l / dist2_{l-1}
  double factor = 1.0;  // 1 - 2 gamma_l / (alpha ||y0||^2)
  double bound = 0.0;   // eps_y^2 prod(factor) ||y*||^2, when eps_y is supplied
  bool contracts = true;
  bool within_bound = true;
};

std::vector<AuditStage> contraction_audit(const EncodedTrace& trace, const std::vector<double>& gammas,
                                          const RVec& y_star, double alpha,
                                          std::optional<double> eps_y = std::nullopt);

struct EstimateInputs {
  std::vector<PreparedSample> samples;
  double eps_y = 0.1;
  double chi = 1.0;
};

/// Empirical (lower-bound) estimates of every constant from a model and a sample set.
TheoryParams estimate_params(const UnrolledModel& model, const ForwardMap& F,
                             const EstimateInputs& in);

nlohmann::json to_json(const TheoryParams& p);
nlohmann::json to_json(const TheoryReport& r);

}  // namespace uwf
