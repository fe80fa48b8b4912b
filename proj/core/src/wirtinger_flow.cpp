#include "uwf/wirtinger_flow.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "uwf/errors.hpp"

namespace uwf {

double loss_J(const ForwardMap& F, const CVec& rho, const RVec& d) {
  if (d.size() != F.M()) throw ConfigError("loss_J: length mismatch");
  const RVec e = intensity(F, rho) - d;
  return e.squaredNorm() / (2.0 * static_cast<double>(F.M()));
}

CVec grad_J(const ForwardMap& F, const CVec& rho, const RVec& d) {
  if (d.size() != F.M()) throw ConfigError("grad_J: length mismatch");
  if (rho.size() != F.N()) throw ConfigError("grad_J: dimension mismatch");
  const CVec z = F.matrix() * rho;
  const RVec e = z.cwiseAbs2() - d;
  return F.matrix().adjoint() * (e.cast<cd>().cwiseProduct(z)) / static_cast<double>(F.M());
}

std::string to_string(WfStatus s) {
  switch (s) {
    case WfStatus::ok: return "ok";
    case WfStatus::converged: return "converged";
    case WfStatus::degenerate: return "degenerate";
    case WfStatus::diverged: return "diverged";
    case WfStatus::non_finite: return "non_finite";
  }
  return "unknown";
}

namespace {

void apply_max_pixel(CVec& rho) {
  const double mx = rho.cwiseAbs().maxCoeff();
  if (mx > 0.0) rho /= mx;
}

}  // namespace

WfTrace run_wf(const ForwardMap& F, const RVec& d, const CVec& init, const WfConfig& cfg,
               const std::optional<CVec>& truth) {
  if (cfg.max_iter < 1) throw ConfigError("run_wf: max_iter must be >= 1");
  if (!(cfg.step > 0.0) && cfg.schedule.empty()) throw ConfigError("run_wf: step must be > 0");
  if (init.size() != F.N()) throw ConfigError("run_wf: init dimension mismatch");
  if (truth && truth->size() != F.N()) throw ConfigError("run_wf: truth dimension mismatch");

  WfTrace tr;
  CVec rho = init;
  if (cfg.max_pixel_prior) apply_max_pixel(rho);
  const double truth_norm = truth ? truth->norm() : 0.0;
  auto record = [&](const CVec& x, double J) {
    tr.loss_history.push_back(J);
    if (truth) tr.dist_history.push_back(truth_norm > 0 ? dist(x, *truth) / truth_norm : dist(x, *truth));
    if (cfg.record_trace) tr.iterates.push_back(x);
  };

  const double n0 = rho.squaredNorm();
  record(rho, loss_J(F, rho, d));
  if (!(n0 > 0.0)) {
    tr.status = WfStatus::degenerate;
    tr.diagnostic = "initial estimate has zero norm";
    tr.final = rho;
    return tr;
  }

  for (int l = 1; l <= cfg.max_iter; ++l) {
    const CVec g = grad_J(F, rho, d);
    if (cfg.tol > 0.0 && g.norm() / std::pow(n0, 1.5) <= cfg.tol) {
      tr.status = WfStatus::converged;
      break;
    }
    double gamma = cfg.step;
    if (!cfg.schedule.empty())
      gamma = cfg.schedule[std::min<std::size_t>(l - 1, cfg.schedule.size() - 1)];
    else if (cfg.warmup > 0.0)
      gamma = std::min(1.0 - std::exp(-l / cfg.warmup), cfg.step);
    const CVec prev = rho;
    rho -= (gamma / n0) * g;
    if (cfg.max_pixel_prior) apply_max_pixel(rho);
    const double J = loss_J(F, rho, d);
    tr.iterations = l;
    if (!rho.allFinite() || !std::isfinite(J)) {
      tr.status = WfStatus::non_finite;
      tr.diagnostic = "non-finite iterate at iteration " + std::to_string(l);
      rho = prev;
      break;
    }
    record(rho, J);
    const auto n = tr.loss_history.size();
    if (n > 50 && J > 10.0 * tr.loss_history[n - 51]) {
      tr.status = WfStatus::diverged;
      tr.diagnostic = "loss grew more than 10x over 50 iterations at iteration " + std::to_string(l);
      break;
    }
  }
  tr.final = rho;
  return tr;
}

void write_trace_csv(const WfTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const bool has_dist = !trace.dist_history.empty();
  out << (has_dist ? "iter,loss,dist_to_truth\n" : "iter,loss\n");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < trace.loss_history.size(); ++i) {
    out << i << ',' << trace.loss_history[i];
    if (has_dist) out << ',' << trace.dist_history[i];
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace uwf
