#include "wpsn/sdma_solver.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <string>

#include "solver_internal.hpp"
#include "wpsn/errors.hpp"
#include "wpsn/golden_section.hpp"

namespace wpsn {

namespace detail {

namespace {

CMatrix energy_matrix(const std::vector<double>& mu, const ChannelSet& ch, const SystemConfig& config) {
  const Eigen::Index n = ch.h_ir.size();
  CMatrix e = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < mu.size(); ++k)
    if (mu[k] != 0.0) e.noalias() += (mu[k] * config.eps[k]) * (ch.h_dl[k].adjoint() * ch.h_dl[k]);
  return e;
}

struct Probe {
  CVector u;
  double lambda = 0.0;
  double rate = 0.0;
};

Probe probe(const CMatrix& e, double beta, double tau0, const ChannelSet& ch, const SystemConfig& config) {
  CMatrix h = e;
  if (beta != 0.0) h.noalias() += beta * (ch.h_ir * ch.h_ir.adjoint());
  const linalg::EigenSystem es = linalg::hermitian_eig(HermitianMatrix(h));
  Probe p;
  p.u = es.vectors.col(0);
  p.lambda = es.values(0);
  const double gain = std::norm(p.u.dot(ch.h_ir));
  p.rate = tau0 * std::log2(1.0 + config.p_b * gain / config.sigma2);
  return p;
}

}  // namespace

void check_threshold(double tau0, double r_i, const ChannelSet& ch, const SystemConfig& config) {
  if (!(tau0 >= 0.0 && tau0 <= 1.0)) throw DomainError("tau0 must lie in [0, 1]");
  if (!(r_i >= 0.0)) throw DomainError("downlink threshold must be nonnegative");
  const double r_up = rate_upper_bound(ch, config).r_up;
  if (r_i > r_up + 1e-12) throw Infeasible(r_i, r_up);
  if (r_i > tau0 * r_up + 1e-12) throw InfeasibleAtTau(tau0, r_i, tau0 * r_up);
}

DownlinkStep downlink_step(const std::vector<double>& mu, double tau0, double r_i, const ChannelSet& ch,
                           const SystemConfig& config, double beta_hint, bool fallback_to_ceiling) {
  const RateBound bound = rate_upper_bound(ch, config);
  const double hn2 = ch.h_ir.squaredNorm();
  const CMatrix e = energy_matrix(mu, ch, config);
  const double tr = e.trace().real();
  DownlinkStep out;
  auto ceiling = [&] {
    out.w_b = bound.w_up;
    out.beta = kBetaInfinite;
    out.lambda = 0.0;
    out.beta_infinite = true;
    return out;
  };
  if (!(tr > 0.0)) {
    // no energy value anywhere: the matched filter is as good as any beamformer
    out.w_b = bound.w_up;
    out.beta = r_i > 0.0 ? hn2 : 0.0;
    out.lambda = r_i > 0.0 ? hn2 * hn2 : 0.0;
    return out;
  }
  auto finish = [&](const Probe& p, double beta) {
    out.w_b = HermitianMatrix::outer(p.u, config.p_b);
    out.beta = beta;
    out.lambda = p.lambda;
    return out;
  };
  const Probe p0 = probe(e, 0.0, tau0, ch, config);
  if (p0.rate >= r_i) return finish(p0, 0.0);
  if (r_i >= tau0 * bound.r_up - 1e-12) return ceiling();

  // bracket in units of tr(E) / ||h||^2 so the search is scale free
  const double scale = tr / hn2;
  constexpr double kCap = 1e15;
  double lo = 0.0;
  double hi = beta_hint > 0.0 && std::isfinite(beta_hint) ? beta_hint / scale : 1.0;
  Probe ph = probe(e, hi * scale, tau0, ch, config);
  if (ph.rate >= r_i) {
    // shrink from a warm hint until the lower end is infeasible
    lo = 0.5 * hi;
    while (true) {
      const Probe pl = probe(e, lo * scale, tau0, ch, config);
      if (pl.rate < r_i) break;
      hi = lo;
      ph = pl;
      lo *= 0.5;
      if (lo < 1e-18) {
        lo = 0.0;
        break;
      }
    }
  } else {
    while (ph.rate < r_i) {
      lo = hi;
      hi *= 2.0;
      if (hi > kCap) {
        if (fallback_to_ceiling) return ceiling();
        throw BracketNotFound("downlink threshold not reached for beta up to the cap");
      }
      ph = probe(e, hi * scale, tau0, ch, config);
    }
  }
  for (int it = 0; it < 200; ++it) {
    if (ph.rate - r_i <= 1e-12 * std::max(1.0, r_i) || hi - lo <= 1e-15 * hi) break;
    const double mid = 0.5 * (lo + hi);
    const Probe pm = probe(e, mid * scale, tau0, ch, config);
    if (pm.rate >= r_i) {
      hi = mid;
      ph = pm;
    } else {
      lo = mid;
    }
  }
  return finish(ph, hi * scale);
}

}  // namespace detail

namespace {

struct SdmaState {
  double f = 0.0;
  std::vector<double> mu;
  HermitianMatrix w;
  double beta = 0.0;
  double lambda = 0.0;
  bool beta_infinite = false;
  std::vector<UplinkCovariance> p;
  int sweeps = 0;
  bool iwf_converged = true;
};

struct GramFill {
  UplinkCovariance p;
  std::vector<double> powers;
  double mu = 0.0;
  Waterfill fill;
};

// Water-fill given C = B^H B of the whitened channel B; its eigenvectors are B's right singular vectors.
GramFill fill_from_gram(const CMatrix& c, double power_budget, double sigma2) {
  const linalg::EigenSystem es = linalg::hermitian_eig(HermitianMatrix(c));
  std::vector<double> gains(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) gains[i] = std::max(0.0, es.values(i)) / sigma2;
  GramFill g;
  g.fill = waterfill(gains, power_budget);
  g.powers = g.fill.powers;
  g.mu = waterfill_dual(g.fill, gains);
  linalg::RVector d = Eigen::Map<const linalg::RVector>(g.powers.data(), static_cast<Eigen::Index>(g.powers.size()));
  g.p = HermitianMatrix(es.vectors * d.cast<linalg::Complex>().asDiagonal() * es.vectors.adjoint());
  return g;
}

IwfResult iwf_core(const HermitianMatrix& w_b, double tau0, const ChannelSet& ch, const SystemConfig& config,
                   const SolverOptions& opts, const std::vector<UplinkCovariance>* warm) {
  const int kk = config.k;
  const Eigen::Index n = ch.g_ir.size();
  const Eigen::Index nu = config.n_u;
  const double s2 = config.sigma2;
  const CMatrix a0 = CMatrix::Identity(n, n) + (config.p_i / s2) * (ch.g_ir * ch.g_ir.adjoint());
  IwfResult r;
  r.p_set.assign(kk, HermitianMatrix::zeros(nu));
  if (warm && static_cast<int>(warm->size()) == kk) r.p_set = *warm;
  r.mu.assign(kk, 0.0);
  std::vector<double> budget(kk);
  for (int k = 0; k < kk; ++k)
    budget[k] = harvested_energy(w_b, tau0, ch.h_dl[k], config.eps[k]) / (1.0 - tau0);
  CMatrix s = CMatrix::Zero(n, n);
  std::vector<CMatrix> contrib(kk);
  for (int k = 0; k < kk; ++k) {
    contrib[k] = ch.g_ul[k] * r.p_set[k].matrix() * ch.g_ul[k].adjoint();
    s += contrib[k];
  }
  double prev_rate = 0.0;
  double best_res = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double dmu = 0.0;
    for (int k = 0; k < kk; ++k) {
      const CMatrix a = a0 + (s - contrib[k]) / s2;
      Eigen::LLT<CMatrix> llt(0.5 * (a + a.adjoint()));
      const CMatrix x = llt.solve(ch.g_ul[k]);
      const CMatrix c = ch.g_ul[k].adjoint() * x;
      GramFill g = fill_from_gram(0.5 * (c + c.adjoint()), budget[k], s2);
      const double old = r.mu[k];
      dmu = std::max(dmu, std::abs(g.mu - old) / std::max(std::abs(g.mu), 1e-300));
      r.mu[k] = g.mu;
      r.p_set[k] = std::move(g.p);
      s -= contrib[k];
      contrib[k] = ch.g_ul[k] * r.p_set[k].matrix() * ch.g_ul[k].adjoint();
      s += contrib[k];
    }
    const CMatrix a = a0 + s / s2;
    r.rate = (1.0 - tau0) * linalg::log2_det_spd(0.5 * (a + a.adjoint()));
    r.sweeps = sweep + 1;
    const double drate = std::abs(r.rate - prev_rate);
    r.residual = std::max(dmu, drate / std::max(std::abs(r.rate), 1e-300));
    prev_rate = r.rate;
    if (sweep > 0 && r.residual <= opts.sweep_tol) {
      r.converged = true;
      break;
    }
    // rounding floor: close to tolerance but no longer improving
    if (r.residual < best_res) {
      best_res = r.residual;
      stalled = 0;
    } else if (++stalled >= 8 && best_res <= 100.0 * opts.sweep_tol) {
      r.converged = true;
      break;
    }
    if (kk == 1 && sweep == 0) {
      r.converged = true;
      r.residual = 0.0;
      break;
    }
  }
  return r;
}

SdmaState evaluate(const std::vector<double>& x, const SdmaState& warm, double tau0, double r_i,
                   const ChannelSet& ch, const SystemConfig& config, const SolverOptions& opts) {
  SdmaState st;
  const detail::DownlinkStep step = detail::downlink_step(x, tau0, r_i, ch, config, warm.beta, true);
  st.w = step.w_b;
  st.beta = step.beta;
  st.lambda = step.lambda;
  st.beta_infinite = step.beta_infinite;
  IwfResult iwf = iwf_core(st.w, tau0, ch, config, opts, warm.p.empty() ? nullptr : &warm.p);
  st.f = iwf.rate;
  st.mu = std::move(iwf.mu);
  st.p = std::move(iwf.p_set);
  st.sweeps = iwf.sweeps;
  st.iwf_converged = iwf.converged;
  return st;
}

SdmaState from_iwf(const HermitianMatrix& w, double tau0, const ChannelSet& ch, const SystemConfig& config,
                   const SolverOptions& opts) {
  SdmaState st;
  st.w = w;
  IwfResult iwf = iwf_core(w, tau0, ch, config, opts, nullptr);
  st.f = iwf.rate;
  st.mu = std::move(iwf.mu);
  st.p = std::move(iwf.p_set);
  st.sweeps = iwf.sweeps;
  st.iwf_converged = iwf.converged;
  return st;
}

}  // namespace

HermitianMatrix composite_matrix(const std::vector<double>& mu, double beta, const ChannelSet& ch,
                                 const SystemConfig& config) {
  const Eigen::Index n = ch.h_ir.size();
  CMatrix h = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < mu.size(); ++k)
    h += (mu[k] * config.eps[k]) * (ch.h_dl[k].adjoint() * ch.h_dl[k]);
  if (beta != 0.0) h += beta * (ch.h_ir * ch.h_ir.adjoint());
  return HermitianMatrix(h);
}

Beamformer optimal_downlink_beamforming(const std::vector<double>& mu, double beta, const ChannelSet& ch,
                                        const SystemConfig& config, double r_i, double tau0) {
  const RateBound bound = rate_upper_bound(ch, config);
  if (r_i > tau0 * bound.r_up + 1e-12) throw Infeasible(r_i, tau0 * bound.r_up);
  if (beta == kBetaInfinite || (r_i > 0.0 && r_i >= tau0 * bound.r_up - 1e-12)) return {bound.w_up, 0.0};
  const linalg::EigenSystem es = linalg::hermitian_eig(composite_matrix(mu, beta, ch, config));
  return {HermitianMatrix::outer(es.vectors.col(0), config.p_b), es.values(0)};
}

double beta_search(const std::vector<double>& mu, double tau0, double r_i, const ChannelSet& ch,
                   const SystemConfig& config) {
  const detail::DownlinkStep step = detail::downlink_step(mu, tau0, r_i, ch, config, 0.0, false);
  if (step.beta_infinite) throw BracketNotFound("threshold sits at the matched-filter ceiling");
  return step.beta;
}

HermitianMatrix interference_whitener(const std::vector<UplinkCovariance>& p_set, int skip,
                                      const ChannelSet& ch, const SystemConfig& config) {
  const Eigen::Index n = ch.g_ir.size();
  CMatrix a = CMatrix::Identity(n, n) + (config.p_i / config.sigma2) * (ch.g_ir * ch.g_ir.adjoint());
  for (std::size_t k = 0; k < p_set.size(); ++k)
    if (static_cast<int>(k) != skip) a += ch.g_ul[k] * p_set[k].matrix() * ch.g_ul[k].adjoint() / config.sigma2;
  return linalg::psd_inverse_sqrt(HermitianMatrix(0.5 * (a + a.adjoint())));
}

ErAllocation per_er_waterfill(const CMatrix& whitened_channel, double energy_budget, double tau0,
                              double sigma2) {
  if (!(energy_budget >= 0.0)) throw DomainError("energy budget must be nonnegative");
  const linalg::SvdFactors f = linalg::svd(whitened_channel);
  const Eigen::Index nu = whitened_channel.cols();
  std::vector<double> gains(nu, 0.0);
  for (Eigen::Index i = 0; i < f.singulars.size(); ++i) gains[i] = f.singulars(i) * f.singulars(i) / sigma2;
  const double power = tau0 < 1.0 ? energy_budget / (1.0 - tau0) : 0.0;
  ErAllocation out;
  out.fill = waterfill(gains, power);
  out.powers = out.fill.powers;
  out.mu = waterfill_dual(out.fill, gains);
  linalg::RVector d = Eigen::Map<const linalg::RVector>(out.powers.data(), nu);
  out.p = HermitianMatrix(f.right * d.cast<linalg::Complex>().asDiagonal() * f.right.adjoint());
  return out;
}

IwfResult iterative_waterfilling(const HermitianMatrix& w_b, double tau0, const ChannelSet& ch,
                                 const SystemConfig& config, const SolverOptions& opts,
                                 const std::vector<UplinkCovariance>* warm) {
  if (!(tau0 >= 0.0 && tau0 < 1.0)) throw DomainError("iterative water-filling needs tau0 in [0, 1)");
  IwfResult r = iwf_core(w_b, tau0, ch, config, opts, warm);
  if (!r.converged) throw NotConverged("iterative water-filling", r.residual);
  return r;
}

HermitianMatrix rate_matched_beamformer(double tau0, double r_i, const ChannelSet& ch,
                                        const SystemConfig& config) {
  detail::check_threshold(tau0, r_i, ch, config);
  const double hn = ch.h_ir.norm();
  const CVector hh = ch.h_ir / hn;
  const double need = r_i > 0.0 ? config.sigma2 * (std::exp2(r_i / tau0) - 1.0) : 0.0;
  const double a2 = std::min(need / (hn * hn), config.p_b);
  // spend the rest on the strongest ER direction orthogonal to h
  std::vector<double> ones(config.k, 1.0);
  const linalg::EigenSystem es = linalg::hermitian_eig(composite_matrix(ones, 0.0, ch, config));
  CVector v = CVector::Zero(hh.size());
  for (Eigen::Index j = 0; j < es.vectors.cols() && v.norm() < 1e-8; ++j) {
    v = es.vectors.col(j) - hh * hh.dot(es.vectors.col(j));
  }
  for (Eigen::Index j = 0; j < hh.size() && v.norm() < 1e-8; ++j) {
    v = CVector::Unit(hh.size(), j) - hh * hh(j);
  }
  CVector a = std::sqrt(a2) * hh;
  if (v.norm() >= 1e-8) a += std::sqrt(std::max(0.0, config.p_b - a2)) * v / v.norm();
  return HermitianMatrix::outer(a);
}

SdmaSolution solve_fixed_tau_sdma(double tau0, double r_i, const ChannelSet& ch, const SystemConfig& config,
                                  const SolverOptions& opts, const WarmStart* warm) {
  config.validate();
  detail::check_threshold(tau0, r_i, ch, config);
  const int kk = config.k;
  SdmaSolution sol;
  sol.tau0 = tau0;
  sol.r_i = r_i;

  if (tau0 >= 1.0) {
    // no uplink time: any beamformer meeting the threshold is optimal
    std::vector<double> uni(kk, 1.0 / kk);
    const detail::DownlinkStep step = detail::downlink_step(uni, tau0, r_i, ch, config, 0.0, true);
    sol.w_b = step.w_b;
    sol.p_set.assign(kk, HermitianMatrix::zeros(config.n_u));
    sol.duals.mu.assign(kk, 0.0);
    sol.duals.beta = step.beta_infinite ? kBetaInfinite : 0.0;
    sol.downlink_rate = downlink_rate(sol.w_b, tau0, ch.h_ir, config.sigma2);
    sol.iterations = 1;
    sol.converged = true;
    sol.trace = {0.0};
    sol.warm.direction = uni;
    return sol;
  }

  auto map = [&](const std::vector<double>& x, const SdmaState& w) {
    return evaluate(x, w, tau0, r_i, ch, config, opts);
  };

  SdmaState final_state;
  if (opts.pin_matched_filter) {
    final_state = from_iwf(rate_upper_bound(ch, config).w_up, tau0, ch, config, opts);
    final_state.beta_infinite = true;
    final_state.beta = kBetaInfinite;
    sol.iterations = 1;
    sol.trace = {final_state.f};
    sol.converged = final_state.iwf_converged;
    sol.warm.direction = detail::direction_of(final_state.mu);
  } else {
    SdmaState init;
    std::vector<double> x0;
    bool mapped = false;
    if (warm && static_cast<int>(warm->direction.size()) == kk) {
      SdmaState seed;
      seed.p = warm->p_set;
      seed.beta = warm->beta_scaled;
      x0 = warm->direction;
      init = map(x0, seed);
      mapped = true;
    } else {
      const HermitianMatrix w0 = opts.init == InitKind::Uniform
                                     ? HermitianMatrix::identity(config.n_b) * (config.p_b / config.n_b)
                                     : rate_matched_beamformer(tau0, r_i, ch, config);
      init = from_iwf(w0, tau0, ch, config, opts);
    }
    detail::FixedPointSettings fs{opts.max_outer, opts.outer_tol, opts.polish, opts.relax_steps,
                                  opts.fixed_point_tol};
    auto run = detail::run_fixed_point(std::move(init), x0, mapped, map, fs);
    final_state = std::move(run.state);
    sol.iterations = run.iterations;
    sol.trace = std::move(run.trace);
    sol.converged = run.converged && final_state.iwf_converged;
    sol.fixed_point_residual = run.residual;
    sol.warm.direction = run.x;
  }

  double mu_sum = 0.0;
  for (double m : final_state.mu) mu_sum += m;
  sol.w_b = final_state.w;
  sol.p_set = final_state.p;
  sol.duals.mu = final_state.mu;
  if (final_state.beta_infinite) {
    sol.duals.beta = kBetaInfinite;
    sol.duals.lambda = 0.0;
  } else {
    sol.duals.beta = final_state.beta * mu_sum;
    sol.duals.lambda = final_state.lambda * mu_sum;
  }
  sol.uplink_rate = final_state.f;
  sol.downlink_rate = downlink_rate(sol.w_b, tau0, ch.h_ir, config.sigma2);
  sol.warm.p_set = final_state.p;
  sol.warm.beta_scaled = final_state.beta_infinite ? 0.0 : final_state.beta;
  return sol;
}

namespace {

std::string cache_key(const ChannelSet& ch, const SystemConfig& c, double kappa) {
  std::string key;
  auto put = [&](const void* p, std::size_t n) { key.append(static_cast<const char*>(p), n); };
  const double scalars[] = {c.p_b, c.p_i, c.sigma2, kappa};
  put(scalars, sizeof(scalars));
  const int ints[] = {c.n_b, c.n_u, c.k};
  put(ints, sizeof(ints));
  put(c.eps.data(), c.eps.size() * sizeof(double));
  for (const auto& m : ch.h_dl) put(m.data(), m.size() * sizeof(linalg::Complex));
  for (const auto& m : ch.g_ul) put(m.data(), m.size() * sizeof(linalg::Complex));
  put(ch.h_ir.data(), ch.h_ir.size() * sizeof(linalg::Complex));
  put(ch.g_ir.data(), ch.g_ir.size() * sizeof(linalg::Complex));
  return key;
}

std::mutex g_cache_mutex;
std::map<std::string, RiMi> g_cache;

}  // namespace

RiMi compute_ri_mi(const ChannelSet& ch, const SystemConfig& config, double kappa) {
  if (ch.h_dl.empty()) return {0.0, 0.0};
  const std::string key = cache_key(ch, config, kappa);
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_cache.find(key);
    if (it != g_cache.end()) return it->second;
  }
  WarmStart warm;
  bool have_warm = false;
  auto objective = [&](double t) {
    SdmaSolution s = solve_fixed_tau_sdma(t, 0.0, ch, config, {}, have_warm ? &warm : nullptr);
    warm = s.warm;
    have_warm = true;
    return s.uplink_rate;
  };
  const GoldenResult g = golden_section(objective, 0.0, 1.0, kappa);
  const SdmaSolution best = solve_fixed_tau_sdma(g.tau, 0.0, ch, config, {}, &warm);
  const RiMi out{best.downlink_rate, g.tau};
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  if (g_cache.size() > 4096) g_cache.clear();
  g_cache.emplace(key, out);
  return out;
}

}  // namespace wpsn
