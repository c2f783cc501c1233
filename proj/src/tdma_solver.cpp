#include "wpsn/tdma_solver.hpp"

#include <cmath>
#include <limits>

#include "solver_internal.hpp"
#include "wpsn/errors.hpp"

namespace wpsn {

namespace {

std::vector<double> gains_of(const linalg::SvdFactors& f, Eigen::Index nu, double sigma2) {
  std::vector<double> g(nu, 0.0);
  for (Eigen::Index i = 0; i < f.singulars.size() && i < nu; ++i) g[i] = f.singulars(i) * f.singulars(i) / sigma2;
  return g;
}

UplinkCovariance covariance(const CMatrix& basis, const std::vector<double>& diag) {
  linalg::RVector d = Eigen::Map<const linalg::RVector>(diag.data(), static_cast<Eigen::Index>(diag.size()));
  return HermitianMatrix(basis * d.cast<linalg::Complex>().asDiagonal() * basis.adjoint());
}

// Per-ER quantities at a common power level w (powers p_i = [w - 1/g_i]^+):
//   phi(w) = g_T at the matching slot, s(w) = total power.
// phi depends on the slot only through Q / tau, which is what lets the slot and the split be solved together.
struct LevelEval {
  double phi = 0.0;
  double power = 0.0;
};

LevelEval at_level(const std::vector<double>& g, double w) {
  LevelEval e;
  for (double gi : g) {
    const double x = gi * w;
    if (x > 1.0) {
      e.phi += std::log2(x) - (1.0 - 1.0 / x) / kLn2;
      e.power += w - 1.0 / gi;
    }
  }
  return e;
}

// Level w with phi(w) = gamma; phi increases from 0 at w = 1/g_max. Newton inside a shrinking bracket.
double level_for(const std::vector<double>& g, double gamma) {
  double gmax = 0.0;
  for (double gi : g) gmax = std::max(gmax, gi);
  double lo = 1.0 / gmax;
  double hi = 2.0 * lo;
  while (at_level(g, hi).phi < gamma) {
    lo = hi;
    hi *= 2.0;
  }
  double w = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
    double phi = 0.0;
    double slope = 0.0;
    for (double gi : g) {
      const double x = gi * w;
      if (x > 1.0) {
        phi += std::log2(x) - (1.0 - 1.0 / x) / kLn2;
        slope += (1.0 - 1.0 / x) / (kLn2 * w);
      }
    }
    if (phi < gamma)
      lo = w;
    else
      hi = w;
    if (phi == gamma) break;
    double next = slope > 0.0 ? w + (gamma - phi) / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - w) <= 1e-16 * w) {
      w = next;
      break;
    }
    w = next;
  }
  return w;
}

struct ErBasis {
  std::vector<double> gains;  // descending, per right singular vector
  CMatrix v;
  double gmax = 0.0;
};

struct Allocation {
  std::vector<double> tau_e;
  std::vector<double> level;  // 0 for idle ERs
  double tau_ir = 0.0;
  double gamma = 0.0;
};

// Joint slot lengths and energy splits for budgets q.
Allocation allocate(const std::vector<ErBasis>& ers, const std::vector<double>& q, double span, double c_r) {
  const std::size_t kk = ers.size();
  Allocation a;
  a.tau_e.assign(kk, 0.0);
  a.level.assign(kk, 0.0);
  std::vector<bool> idle(kk);
  bool any = false;
  for (std::size_t k = 0; k < kk; ++k) {
    idle[k] = !(q[k] > 0.0) || !(ers[k].gmax > 0.0);
    any = any || !idle[k];
  }
  if (!any || !(span > 0.0)) {
    a.tau_ir = std::max(span, 0.0);
    a.gamma = c_r;
    return a;
  }
  auto total = [&](double gamma, bool fill) {
    double s = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
      if (idle[k]) continue;
      const double w = level_for(ers[k].gains, gamma);
      const double t = q[k] / at_level(ers[k].gains, w).power;
      if (fill) {
        a.level[k] = w;
        a.tau_e[k] = t;
      }
      s += t;
    }
    return s;
  };
  if (c_r > 0.0 && total(c_r, false) <= span) {
    a.gamma = c_r;
    a.tau_ir = span - total(c_r, true);
    return a;
  }
  double lo = std::max(c_r, 0.0);
  double hi = std::max(2.0 * lo, 1.0);
  while (total(hi, false) > span) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total(mid, false) > span)
      lo = mid;
    else
      hi = mid;
  }
  a.gamma = 0.5 * (lo + hi);
  const double s = total(a.gamma, true);
  // close the simplex exactly; the correction is at rounding level
  for (double& t : a.tau_e) t *= span / s;
  a.tau_ir = 0.0;
  return a;
}

struct TdmaState {
  double f = 0.0;
  std::vector<double> mu;
  HermitianMatrix w;
  double beta = 0.0;
  double lambda = 0.0;
  bool beta_infinite = false;
  Allocation alloc;
  std::vector<UplinkCovariance> p;
};

TdmaState evaluate_w(const HermitianMatrix& w, double tau0, const std::vector<ErBasis>& ers, double c_r,
                     const ChannelSet& ch, const SystemConfig& config) {
  const std::size_t kk = ers.size();
  TdmaState st;
  st.w = w;
  std::vector<double> q(kk);
  for (std::size_t k = 0; k < kk; ++k) q[k] = harvested_energy(w, tau0, ch.h_dl[k], config.eps[k]);
  st.alloc = allocate(ers, q, 1.0 - tau0, c_r);
  st.mu.assign(kk, 0.0);
  st.p.clear();
  st.f = st.alloc.tau_ir * c_r;
  for (std::size_t k = 0; k < kk; ++k) {
    std::vector<double> powers(ers[k].gains.size(), 0.0);
    const double lvl = st.alloc.level[k];
    if (lvl > 0.0) {
      double r = 0.0;
      for (std::size_t i = 0; i < powers.size(); ++i) {
        const double gi = ers[k].gains[i];
        if (gi * lvl > 1.0) {
          powers[i] = lvl - 1.0 / gi;
          r += std::log2(gi * lvl);
        }
      }
      st.f += st.alloc.tau_e[k] * r;
      st.mu[k] = 1.0 / (kLn2 * lvl);
    } else {
      st.mu[k] = ers[k].gmax / kLn2;
    }
    st.p.push_back(covariance(ers[k].v, powers));
  }
  return st;
}

}  // namespace

TdmaFill tdma_waterfill(const CMatrix& g_k, double energy_budget, double tau_ek, double sigma2) {
  if (!(energy_budget >= 0.0)) throw DomainError("energy budget must be nonnegative");
  const Eigen::Index nu = g_k.cols();
  const linalg::SvdFactors f = linalg::svd(g_k);
  TdmaFill out;
  out.energies.assign(nu, 0.0);
  if (!(tau_ek > 0.0)) {
    out.p = HermitianMatrix::zeros(nu);
    return out;
  }
  const std::vector<double> gains = gains_of(f, nu, sigma2);
  out.fill = waterfill(gains, energy_budget / tau_ek);
  out.mu = waterfill_dual(out.fill, gains);
  std::vector<double> powers = out.fill.powers;
  for (Eigen::Index i = 0; i < nu; ++i) out.energies[i] = tau_ek * powers[i];
  out.p = covariance(f.right, powers);
  return out;
}

SubchannelProfile make_profile(const CMatrix& g_k, const std::vector<double>& energies) {
  const linalg::SvdFactors f = linalg::svd(g_k);
  SubchannelProfile p;
  p.lambdabar.assign(energies.size(), 0.0);
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double s = static_cast<Eigen::Index>(i) < f.singulars.size() ? f.singulars(i) : 0.0;
    p.lambdabar[i] = s * s * energies[i];
  }
  return p;
}

double g_t(double tau, const SubchannelProfile& profile, double sigma2) {
  if (!(tau > 0.0)) throw DomainError("g_T needs a positive slot length");
  double s = 0.0;
  for (double lb : profile.lambdabar) {
    const double x = lb / sigma2;
    if (x > 0.0) s += std::log2(1.0 + x / tau) - x / (kLn2 * (tau + x));
  }
  return s;
}

double g_t_derivative(double tau, const SubchannelProfile& profile, double sigma2) {
  if (!(tau > 0.0)) throw DomainError("g_T needs a positive slot length");
  double s = 0.0;
  for (double lb : profile.lambdabar) {
    const double x = lb / sigma2;
    if (x > 0.0) s -= x * x / (kLn2 * (tau + x) * (tau + x) * tau);
  }
  return s;
}

GtInverse invert_g_t(double gamma, const SubchannelProfile& profile, double sigma2) {
  bool any = false;
  for (double lb : profile.lambdabar) any = any || lb > 0.0;
  if (!any) return {0.0, false};
  if (!(gamma > 0.0)) return {std::numeric_limits<double>::infinity(), false};
  if (g_t(kMinSlot, profile, sigma2) <= gamma) return {kMinSlot, true};
  double lo = kMinSlot;
  double hi = 1.0;
  while (g_t(hi, profile, sigma2) > gamma) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return {lo, false};
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    // geometric midpoint while the bracket spans decades
    const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (g_t(mid, profile, sigma2) > gamma)
      lo = mid;
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), false};
}

TimeSplit allocate_uplink_time(const std::vector<SubchannelProfile>& profiles, double tau0, double c_r,
                               double sigma2) {
  if (!(tau0 >= 0.0 && tau0 < 1.0)) throw DomainError("tau0 must lie in [0, 1)");
  const double span = 1.0 - tau0;
  const std::size_t kk = profiles.size();
  TimeSplit out;
  out.tau.tau0 = tau0;
  out.tau.tau_e.assign(kk, 0.0);
  auto total = [&](double gamma, bool fill) {
    double s = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
      const double t = invert_g_t(gamma, profiles[k], sigma2).tau;
      if (fill) out.tau.tau_e[k] = t;
      s += t;
    }
    return s;
  };
  if (total(c_r, false) < span) {
    out.gamma = c_r;
    out.tau.tau_ir = span - total(c_r, true);
    return out;
  }
  double lo = std::max(c_r, 0.0);
  double hi = std::max(2.0 * lo, 1.0);
  while (total(hi, false) > span) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total(mid, false) > span)
      lo = mid;
    else
      hi = mid;
  }
  out.gamma = 0.5 * (lo + hi);
  const double s = total(out.gamma, true);
  for (double& t : out.tau.tau_e) t *= span / s;
  out.tau.tau_ir = 0.0;
  return out;
}

TdmaSolution solve_fixed_tau_tdma(double tau0, double r_i, const ChannelSet& ch, const SystemConfig& config,
                                  const SolverOptions& opts, const WarmStart* warm) {
  config.validate();
  detail::check_threshold(tau0, r_i, ch, config);
  const int kk = config.k;
  const double c_r = ir_spectral_efficiency(ch, config);
  std::vector<ErBasis> ers(kk);
  for (int k = 0; k < kk; ++k) {
    const linalg::SvdFactors f = linalg::svd(ch.g_ul[k]);
    ers[k].gains = gains_of(f, config.n_u, config.sigma2);
    ers[k].v = f.right;
    for (double g : ers[k].gains) ers[k].gmax = std::max(ers[k].gmax, g);
  }

  TdmaSolution sol;
  sol.r_i = r_i;
  auto map = [&](const std::vector<double>& x, const TdmaState& w) {
    const detail::DownlinkStep step = detail::downlink_step(x, tau0, r_i, ch, config, w.beta, true);
    TdmaState st = evaluate_w(step.w_b, tau0, ers, c_r, ch, config);
    st.beta = step.beta;
    st.lambda = step.lambda;
    st.beta_infinite = step.beta_infinite;
    return st;
  };

  TdmaState fin;
  if (tau0 >= 1.0) {
    std::vector<double> uni(kk, 1.0 / kk);
    fin = map(uni, TdmaState{});
    fin.mu.assign(kk, 0.0);
    sol.iterations = 1;
    sol.trace = {fin.f};
    sol.converged = true;
    sol.warm.direction = uni;
  } else if (opts.pin_matched_filter) {
    fin = evaluate_w(rate_upper_bound(ch, config).w_up, tau0, ers, c_r, ch, config);
    fin.beta_infinite = true;
    sol.iterations = 1;
    sol.trace = {fin.f};
    sol.converged = true;
    sol.warm.direction = detail::direction_of(fin.mu);
  } else {
    TdmaState init;
    std::vector<double> x0;
    bool mapped = false;
    if (warm && static_cast<int>(warm->direction.size()) == kk) {
      TdmaState seed;
      seed.beta = warm->beta_scaled;
      x0 = warm->direction;
      init = map(x0, seed);
      mapped = true;
    } else {
      const HermitianMatrix w0 = opts.init == InitKind::Uniform
                                     ? HermitianMatrix::identity(config.n_b) * (config.p_b / config.n_b)
                                     : rate_matched_beamformer(tau0, r_i, ch, config);
      init = evaluate_w(w0, tau0, ers, c_r, ch, config);
    }
    detail::FixedPointSettings fs{opts.max_outer, opts.outer_tol, opts.polish, opts.relax_steps,
                                  opts.fixed_point_tol};
    auto run = detail::run_fixed_point(std::move(init), x0, mapped, map, fs);
    fin = std::move(run.state);
    sol.iterations = run.iterations;
    sol.trace = std::move(run.trace);
    sol.converged = run.converged;
    sol.fixed_point_residual = run.residual;
    sol.warm.direction = run.x;
  }

  double mu_sum = 0.0;
  for (double m : fin.mu) mu_sum += m;
  sol.w_b = fin.w;
  sol.p_set = fin.p;
  sol.tau.tau0 = tau0;
  sol.tau.tau_e = fin.alloc.tau_e;
  sol.tau.tau_ir = fin.alloc.tau_ir;
  if (sol.tau.tau_e.empty()) sol.tau.tau_e.assign(kk, 0.0);
  sol.duals.mu = fin.mu;
  sol.duals.gamma = fin.alloc.gamma;
  if (fin.beta_infinite) {
    sol.duals.beta = kBetaInfinite;
    sol.duals.lambda = 0.0;
  } else {
    sol.duals.beta = fin.beta * mu_sum;
    sol.duals.lambda = fin.lambda * mu_sum;
  }
  sol.uplink_rate = fin.f;
  sol.downlink_rate = downlink_rate(sol.w_b, tau0, ch.h_ir, config.sigma2);
  for (int k = 0; k < kk; ++k) {
    std::vector<double> e(ers[k].gains.size(), 0.0);
    const double lvl = fin.alloc.level.empty() ? 0.0 : fin.alloc.level[k];
    for (std::size_t i = 0; i < e.size(); ++i)
      if (ers[k].gains[i] * lvl > 1.0) e[i] = sol.tau.tau_e[k] * (lvl - 1.0 / ers[k].gains[i]);
    sol.profiles.push_back(make_profile(ch.g_ul[k], e));
  }
  sol.warm.beta_scaled = fin.beta_infinite ? 0.0 : fin.beta;
  return sol;
}

}  // namespace wpsn
