#include "uwf/theory.hpp"

#include <cmath>
#include <limits>

#include "uwf/errors.hpp"
#include "uwf/rng.hpp"

namespace uwf {

CMat delta_operator(const ForwardMap& F, const CMat& X) {
  const Eigen::Index n = X.rows();
  CMat out = spectral_matrix(F, lifted_apply(F, X)) - X - X.trace() * CMat::Identity(n, n);
  return 0.5 * (out + out.adjoint());
}

DeltaEstimate estimate_delta(const ForwardMap& F, const std::vector<CVec>& samples) {
  DeltaEstimate est;
  for (const CVec& rho : samples) {
    const double n2 = rho.squaredNorm();
    if (!(n2 > 0.0)) {
      ++est.skipped;
      continue;
    }
    const double v = hermitian_norm(delta_operator(F, rho * rho.adjoint())) / n2;
    est.values.push_back(v);
    est.max = std::max(est.max, v);
  }
  return est;
}

namespace {

RVec as_real_input(const CVec& x, double* imag_residual) {
  const CVec a = canonical_phase(x);
  if (imag_residual) *imag_residual = a.imag().norm();
  return a.real();
}

CMat lift(const RVec& v) {
  const CVec c = v.cast<cd>();
  return c * c.adjoint();
}

}  // namespace

HTildeResult h_tilde(const Net& decoder, const CMat& Z) {
  if (Z.rows() != Z.cols() || Z.rows() != decoder.input_dim())
    throw ConfigError("h_tilde: Z must be N_y x N_y");
  if (!is_hermitian(Z, 1e-10) && Z.norm() > 0.0) throw ConfigError("h_tilde: Z is not Hermitian");
  HTildeResult r;
  if (Z.norm() == 0.0) {
    r.value = lift(net_forward(decoder, RVec::Zero(Z.rows())));
    return r;
  }
  const PowerResult top = power_iteration(Z);
  r.lambda0 = top.pair.value;
  if (r.lambda0 < 0.0) {
    r.zero_path = true;
    r.value = lift(net_forward(decoder, RVec::Zero(Z.rows())));
    return r;
  }
  const RVec x = std::sqrt(r.lambda0) * as_real_input(top.pair.vector, &r.imag_residual);
  const RVec hx = net_forward(decoder, x);
  const RVec hm = net_forward(decoder, -x);
  r.value = lift(hx);
  const double scale = hx.squaredNorm();
  r.sign_sensitivity = scale > 0.0 ? (hx * hx.transpose() - hm * hm.transpose()).norm() / scale : 0.0;
  return r;
}

OmegaEstimate estimate_omega(const Net& decoder, const ForwardMap& F,
                             const std::vector<std::pair<RVec, RVec>>& pairs, double eps_y) {
  OmegaEstimate est;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const RVec& y = pairs[i].first;
    const RVec& ys = pairs[i].second;
    if ((y - ys).norm() > eps_y * ys.norm()) continue;
    const CMat Y = lift(y), Ys = lift(ys);
    const HTildeResult a = h_tilde(decoder, Y);
    const HTildeResult b = h_tilde(decoder, Ys);
    const HTildeResult c = h_tilde(decoder, Y - Ys);
    const double den = hermitian_norm(delta_operator(F, c.value));
    if (!(den > 1e-12)) continue;
    const double num = hermitian_norm(delta_operator(F, a.value - b.value));
    const double ratio = num / den;
    est.ratios.push_back(ratio);
    est.max_sign_sensitivity =
        std::max({est.max_sign_sensitivity, a.sign_sensitivity, b.sign_sensitivity, c.sign_sensitivity});
    if (est.admissible == 0 || ratio > est.omega) {
      est.omega = ratio;
      est.argmax = i;
    }
    ++est.admissible;
  }
  if (est.admissible == 0) throw NumericError("estimate_omega: no admissible pairs");
  return est;
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

const TheoryCheck* TheoryReport::find(const std::string& name) const {
  for (const TheoryCheck& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

double eps_rho_of(const TheoryParams& p) { return p.mu_G * p.mu_R * p.mu_H * (1.0 + p.eps) * p.eps_y; }

double c_of(const TheoryParams& p) {
  return (1.0 + p.eps_y) * (2.0 + p.eps_y) * (2.0 + p.omega * p.delta);
}

double delta1_of(const TheoryParams& p) {
  const double er = eps_rho_of(p);
  const double delta_hat = p.omega * p.mu_H * p.mu_H * p.delta;
  return std::sqrt(2.0) * delta_hat * (2.0 + er) * (2.0 + p.eps_y) /
         (p.mu_H_tilde * p.mu_H_tilde * (1.0 - er) * (2.0 - er));
}

double h_of(const TheoryParams& p) {
  const double er = eps_rho_of(p);
  return (1.0 - delta1_of(p)) * (1.0 - er) * (2.0 - er);
}

namespace {

TheoryCheck make_check(std::string name, double lhs, double rhs, bool strict, bool determinate) {
  TheoryCheck c{std::move(name), lhs, rhs, strict, CheckStatus::indeterminate};
  if (determinate && std::isfinite(lhs) && std::isfinite(rhs))
    c.status = (strict ? lhs < rhs : lhs <= rhs) ? CheckStatus::pass : CheckStatus::fail;
  return c;
}

}  // namespace

TheoryReport check_theorem1(const TheoryParams& p) {
  TheoryReport r;
  r.params = p;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.eps_rho = eps_rho_of(p);
  r.delta_hat = p.omega * p.mu_H * p.mu_H * p.delta;
  r.c_val = c_of(p);
  const double er = r.eps_rho;
  const double shrink = (1.0 - er) * (2.0 - er);  // appears in every denominator
  const bool d1_ok = p.mu_H_tilde > 0.0 && shrink != 0.0;
  r.delta1 = d1_ok ? delta1_of(p) : nan;
  r.h_val = d1_ok ? h_of(p) : nan;

  const bool ratio_ok = p.mu_H > 0.0 && r.c_val != 0.0 && d1_ok;
  const double mu_ratio = p.mu_H > 0.0 ? p.mu_H_tilde / p.mu_H : nan;
  const double hc = ratio_ok ? r.h_val / r.c_val : nan;
  r.bound_4ab = ratio_ok ? std::pow(mu_ratio, 8) * hc * hc : nan;
  const bool frame_ok = ratio_ok && p.sigma_H > 0.0;
  r.bound_4ab_frame =
      frame_ok ? std::pow(mu_ratio, 4) * std::pow(p.sigma_H_tilde / p.sigma_H, 4) * hc * hc : nan;

  const double tail_den = std::sqrt(2.0) * p.omega * (2.0 + er) * (2.0 + p.eps_y);
  const bool du_ok = p.mu_H > 0.0 && tail_den != 0.0;
  r.delta_upper = du_ok ? mu_ratio * mu_ratio * shrink / tail_den : nan;
  const bool duf_ok = p.sigma_H > 0.0 && tail_den != 0.0;
  r.delta_upper_frame =
      duf_ok ? (p.sigma_H_tilde * p.mu_H_tilde / (p.sigma_H * p.sigma_H)) * shrink / tail_den : nan;

  const double lip_lo = (1.0 - p.chi * p.eps * p.mu_H) / (1.0 + p.eps);
  const bool win_ok = p.mu_R > 0.0 && p.xi_y > 0.0;
  const double lip_hi = win_ok ? std::min(2.0 - 1.0 / p.mu_R, p.xi_rho / p.xi_y) / (1.0 + p.eps) : nan;
  r.lip_window = {lip_lo, lip_hi};

  const bool ab_ok = p.alpha > 0.0 && p.beta > 0.0;
  const double four_ab = ab_ok ? 4.0 / (p.alpha * p.beta) : nan;

  const double wf_lhs = d1_ok ? p.omega * std::pow(p.mu_H / p.mu_H_tilde, 2) * (2.0 + er) *
                                    (2.0 + p.eps_y) / shrink
                              : nan;
  const bool wf_ok = d1_ok && p.eps < 1.0;
  const double wf_rhs = wf_ok ? (2.0 + p.eps) / std::sqrt((1.0 - p.eps) * (2.0 - p.eps)) : nan;

  r.checks.push_back(make_check("delta1_lt_1", r.delta1, 1.0, true, d1_ok));
  r.checks.push_back(make_check("delta_upper", p.delta, r.delta_upper, true, du_ok));
  r.checks.push_back(make_check("delta_upper_frame", p.delta, r.delta_upper_frame, true, duf_ok));
  r.checks.push_back(make_check("rate_bound", four_ab, r.bound_4ab, false, ab_ok && ratio_ok));
  r.checks.push_back(make_check("rate_bound_frame", four_ab, r.bound_4ab_frame, false, ab_ok && frame_ok));
  r.checks.push_back(make_check("eps_rho_lt_1", er, 1.0, true, true));
  r.checks.push_back(make_check("lipschitz_window_lower", lip_lo, p.mu_G * p.mu_H, false, true));
  r.checks.push_back(make_check("lipschitz_window_upper", p.mu_G * p.mu_H, lip_hi, false, win_ok));
  r.checks.push_back(make_check("mu_R_le_1", p.mu_R, 1.0, false, true));
  r.checks.push_back(make_check("delta1_vs_wf", wf_lhs, wf_rhs, false, wf_ok));
  return r;
}

Delta1Sweep sweep_delta1(TheoryParams params, double lo, double hi, int steps) {
  if (steps < 2 || !(hi > lo)) throw ConfigError("sweep_delta1: need hi > lo and steps >= 2");
  Delta1Sweep s;
  auto f = [&](double d) {
    params.delta = d;
    return delta1_of(params);
  };
  for (int i = 0; i < steps; ++i) {
    const double d = lo + (hi - lo) * i / (steps - 1);
    s.points.push_back({d, f(d)});
  }
  for (std::size_t i = 1; i < s.points.size(); ++i) {
    if (s.points[i - 1].delta1 < 1.0 && s.points[i].delta1 >= 1.0) {
      double a = s.points[i - 1].delta, b = s.points[i].delta;
      for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double m = 0.5 * (a + b);
        (f(m) < 1.0 ? a : b) = m;
      }
      s.crossing = true;
      s.boundary = 0.5 * (a + b);
      break;
    }
  }
  return s;
}

InitMetrics init_metrics(const UnrolledModel& model, const ForwardMap& F,
                         const std::vector<PreparedSample>& testset) {
  if (testset.empty()) throw ConfigError("init_metrics: empty test set");
  InitMetrics m;
  std::size_t n3 = 0;
  for (const PreparedSample& s : testset) {
    const double n2 = s.rho_star.squaredNorm();
    const EncodedTrace tr = rnn_forward_encoded(model, F, s.d, s.enc_in);
    if (n2 > 0.0) {
      const double d1 = dist(s.init, CVec(s.rho_star.cast<cd>()));
      m.d1 += d1 * d1 / n2;
      m.d2 += (net_forward(model.decoder, tr.y0) - s.rho_star).squaredNorm() / n2;
      ++m.used;
    } else {
      ++m.skipped;
    }
    // d3 has its own denominator and is averaged separately
    const double yl2 = tr.y_final().squaredNorm();
    if (yl2 > 0.0) {
      m.d3 += (tr.y0 - tr.y_final()).squaredNorm() / yl2;
      ++n3;
    } else {
      ++m.skipped;
    }
  }
  if (m.used > 0) {
    m.d1 /= static_cast<double>(m.used);
    m.d2 /= static_cast<double>(m.used);
  }
  if (n3 > 0) m.d3 /= static_cast<double>(n3);
  return m;
}

std::pair<double, double> b1_b2(double mu_G, double mu_H, double mu_R, double eps) {
  const double b1 = (1.0 / eps) * (1.0 / mu_H - mu_G * (1.0 + eps));
  const double mu_M = mu_G * mu_R * mu_H;
  const double b2 = mu_G / (eps * mu_M) * (1.0 - mu_R);
  return {b1, b2};
}

std::vector<AuditStage> contraction_audit(const EncodedTrace& trace, const std::vector<double>& gammas,
                                          const RVec& y_star, double alpha,
                                          std::optional<double> eps_y) {
  if (gammas.size() != trace.y.size()) throw ConfigError("contraction_audit: gamma count != stages");
  if (y_star.size() != trace.y0.size()) throw ConfigError("contraction_audit: y_star dimension");
  std::vector<AuditStage> out;
  double prev = std::pow(dist(trace.y0, y_star), 2);
  double prod = 1.0;
  const double ys2 = y_star.squaredNorm();
  for (std::size_t l = 0; l < trace.y.size(); ++l) {
    AuditStage s;
    s.stage = static_cast<int>(l + 1);
    s.dist2 = std::pow(dist(trace.y[l], y_star), 2);
    s.ratio = prev > 0.0 ? s.dist2 / prev : (s.dist2 > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    s.factor = 1.0 - 2.0 * gammas[l] / (alpha * trace.norm_y0_sq);
    prod *= s.factor;
    s.contracts = s.ratio <= s.factor;
    if (eps_y) {
      s.bound = (*eps_y) * (*eps_y) * prod * ys2;
      s.within_bound = s.dist2 <= s.bound;
    }
    out.push_back(s);
    prev = s.dist2;
  }
  return out;
}

TheoryParams estimate_params(const UnrolledModel& model, const ForwardMap& F, const EstimateInputs& in) {
  if (in.samples.size() < 2) throw ConfigError("estimate_params: need at least 2 samples");
  TheoryParams p;
  p.L = model.L();
  p.M = F.M();
  p.N = F.N();
  p.N_y = model.N_y();
  p.eps_y = in.eps_y;
  p.chi = in.chi;

  std::vector<RVec> enc_in, y0s, yLs, ys;
  std::vector<CVec> decoded;
  double eps = 0.0;
  for (const PreparedSample& s : in.samples) {
    const EncodedTrace tr = rnn_forward_encoded(model, F, s.d, s.enc_in);
    enc_in.push_back(s.enc_in);
    y0s.push_back(tr.y0);
    yLs.push_back(tr.y_final());
    ys.push_back(tr.y0);
    ys.push_back(tr.y_final());
    decoded.push_back(tr.rho_hat.cast<cd>());
    const double n = s.rho_star.norm();
    if (n > 0.0) eps = std::max(eps, dist(s.init, CVec(s.rho_star.cast<cd>())) / n);
  }
  p.eps = eps;
  p.mu_G = lipschitz_empirical(model.encoder, enc_in).upper;
  const LipschitzEstimate lh = lipschitz_empirical(model.decoder, ys);
  p.mu_H = lh.upper;
  p.mu_H_tilde = lh.lower;
  double mu_R = 0.0;
  for (std::size_t i = 0; i < y0s.size(); ++i)
    for (std::size_t j = i + 1; j < y0s.size(); ++j) {
      const double den = (y0s[i] - y0s[j]).norm();
      if (den > 0.0) mu_R = std::max(mu_R, (yLs[i] - yLs[j]).norm() / den);
    }
  p.mu_R = mu_R;
  double smax = 0.0, smin = std::numeric_limits<double>::infinity();
  for (const RVec& y : ys) {
    const double n = y.norm();
    if (!(n > 0.0)) continue;
    const double r = net_forward(model.decoder, y).norm() / n;
    smax = std::max(smax, r);
    smin = std::min(smin, r);
  }
  p.sigma_H = smax;
  p.sigma_H_tilde = std::isfinite(smin) ? smin : 0.0;
  p.delta = estimate_delta(F, decoded).max;

  std::vector<std::pair<RVec, RVec>> pairs;
  for (std::size_t i = 0; i < yLs.size(); ++i) {
    const RVec& ystar = yLs[i];
    RVec dir = random_rvec(ystar.size(), derive_seed(0x6f6d6567ULL, i));
    dir.normalize();
    pairs.emplace_back(ystar + 0.5 * in.eps_y * ystar.norm() * dir, ystar);
  }
  try {
    p.omega = estimate_omega(model.decoder, F, pairs, in.eps_y).omega;
  } catch (const NumericError&) {
    p.omega = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

nlohmann::json to_json(const TheoryParams& p) {
  return {{"delta", p.delta},     {"omega", p.omega},     {"mu_G", p.mu_G},
          {"mu_H", p.mu_H},       {"mu_H_tilde", p.mu_H_tilde},
          {"mu_R", p.mu_R},       {"sigma_H", p.sigma_H}, {"sigma_H_tilde", p.sigma_H_tilde},
          {"eps", p.eps},         {"eps_y", p.eps_y},     {"chi", p.chi},
          {"xi_y", p.xi_y},       {"xi_rho", p.xi_rho},   {"alpha", p.alpha},
          {"beta", p.beta},       {"L", p.L},             {"M", p.M},
          {"N", p.N},             {"N_y", p.N_y}};
}

namespace {

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const TheoryReport& r) {
  nlohmann::json j;
  j["params"] = to_json(r.params);
  j["estimates_are_empirical_lower_bounds"] = true;
  j["eps_rho"] = num(r.eps_rho);
  j["delta_hat"] = num(r.delta_hat);
  j["c"] = num(r.c_val);
  j["h"] = num(r.h_val);
  j["delta1"] = num(r.delta1);
  j["bound_4ab"] = num(r.bound_4ab);
  j["bound_4ab_frame"] = num(r.bound_4ab_frame);
  j["delta_upper"] = num(r.delta_upper);
  j["delta_upper_frame"] = num(r.delta_upper_frame);
  j["lip_window"] = {num(r.lip_window.first), num(r.lip_window.second)};
  j["checks"] = nlohmann::json::array();
  for (const TheoryCheck& c : r.checks)
    j["checks"].push_back({{"name", c.name},
                           {"lhs", num(c.lhs)},
                           {"rhs", num(c.rhs)},
                           {"strict", c.strict},
                           {"status", to_string(c.status)}});
  return j;
}

}  // namespace uwf
