#pragma once

// Pieces shared by the SDMA and TDMA fixed-duration solvers.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "wpsn/network_model.hpp"

namespace wpsn::detail {

struct DownlinkStep {
  HermitianMatrix w_b;
  double beta = 0.0;    // multiplier for the composite matrix built from the given mu
  double lambda = 0.0;  // top eigenvalue of that composite matrix
  bool beta_infinite = false;
};

// Beamformer meeting r_i for the energy weights mu. beta_hint warm-starts the bracket.
// fallback_to_ceiling: return the matched filter instead of throwing BracketNotFound.
DownlinkStep downlink_step(const std::vector<double>& mu, double tau0, double r_i, const ChannelSet& ch,
                           const SystemConfig& config, double beta_hint, bool fallback_to_ceiling);

void check_threshold(double tau0, double r_i, const ChannelSet& ch, const SystemConfig& config);

inline std::vector<double> direction_of(const std::vector<double>& mu) {
  double s = 0.0;
  for (double m : mu) s += (std::isfinite(m) && m > 0.0) ? m : 0.0;
  std::vector<double> d(mu.size(), mu.empty() ? 0.0 : 1.0 / static_cast<double>(mu.size()));
  if (!(s > 0.0) || !std::isfinite(s)) return d;
  for (std::size_t k = 0; k < mu.size(); ++k) d[k] = (std::isfinite(mu[k]) && mu[k] > 0.0) ? mu[k] / s : 0.0;
  return d;
}

inline double l2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

struct FixedPointSettings {
  int max_outer = 100;
  double outer_tol = 1e-8;
  bool polish = true;
  int relax_steps = 3;
  double fixed_point_tol = 1e-11;
};

template <class State>
struct FixedPointRun {
  State state;
  std::vector<double> x;
  std::vector<double> trace;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Seeks a direction x on the simplex with x = normalize(mu(x)), where `map(x, warm)` returns the
// state (objective f and energy duals mu) obtained from the beamformer built on weights x.
// Relaxation steps move toward the new dual direction, halving until the objective does not drop.
// Newton steps on the residual normalize(mu(x)) - x take over after a few of those.
template <class State, class Map>
FixedPointRun<State> run_fixed_point(State init, std::vector<double> x0, bool init_is_mapped, Map&& map,
                                     const FixedPointSettings& s) {
  FixedPointRun<State> run;
  run.state = std::move(init);
  run.trace.push_back(run.state.f);
  run.iterations = 1;
  const std::size_t k = run.state.mu.size();
  std::vector<double> d = direction_of(run.state.mu);
  std::vector<double> x = x0;
  bool have_anchor = init_is_mapped;
  bool settled = false;

  auto accept = [&](std::vector<double> xn, State st) {
    ++run.iterations;
    x = std::move(xn);
    have_anchor = true;
    d = direction_of(st.mu);
    run.state = std::move(st);
    run.trace.push_back(run.state.f);
  };

  // One damped step toward the new dual direction. Returns false when no step keeps the objective.
  bool halved = false;
  auto relax_step = [&]() {
    double th = 1.0;
    std::vector<double> cand(k);
    while (true) {
      for (std::size_t i = 0; i < k; ++i) cand[i] = have_anchor ? (1.0 - th) * x[i] + th * d[i] : d[i];
      State st = map(cand, run.state);
      if (!have_anchor || st.f >= run.state.f - 1e-12 * std::abs(run.state.f)) {
        const double change = std::abs(st.f - run.state.f);
        settled = change <= s.outer_tol * std::max(std::abs(st.f), 1e-300);
        accept(cand, std::move(st));
        return true;
      }
      th *= 0.5;
      halved = true;
      if (th < 1e-6) return false;
    }
  };

  auto residual = [&] { return l2(d, x); };

  // Newton step on r(x) = normalize(mu(x)) - x with a forward-difference Jacobian.
  auto newton_step = [&]() {
    std::vector<double> r(k);
    for (std::size_t i = 0; i < k; ++i) r[i] = d[i] - x[i];
    const double res = residual();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k + 1, k);
    for (std::size_t j = 0; j < k; ++j) {
      const double h = 1e-6 * std::max(x[j], 1e-3);
      std::vector<double> xp = x;
      xp[j] += h;
      const double sum = std::accumulate(xp.begin(), xp.end(), 0.0);
      for (double& v : xp) v /= sum;
      const State sp = map(xp, run.state);
      const std::vector<double> dp = direction_of(sp.mu);
      for (std::size_t i = 0; i < k; ++i) a(i, j) = ((dp[i] - xp[i]) - r[i]) / h;
      a(k, j) = 1.0;
    }
    Eigen::VectorXd rhs(k + 1);
    for (std::size_t i = 0; i < k; ++i) rhs(i) = -r[i];
    rhs(k) = 0.0;
    const Eigen::VectorXd step = a.completeOrthogonalDecomposition().solve(rhs);
    double t = 1.0;
    for (int ls = 0; ls < 5; ++ls, t *= 0.5) {
      std::vector<double> xn(k);
      for (std::size_t i = 0; i < k; ++i) xn[i] = std::max(x[i] + t * step(static_cast<Eigen::Index>(i)), 0.0);
      const double sum = std::accumulate(xn.begin(), xn.end(), 0.0);
      if (!(sum > 0.0)) continue;
      for (double& v : xn) v /= sum;
      State sn = map(xn, run.state);
      const double rn = l2(direction_of(sn.mu), xn);
      if (rn < res && sn.f >= run.state.f - 1e-10 * std::abs(run.state.f)) {
        accept(std::move(xn), std::move(sn));
        return true;
      }
    }
    return false;
  };

  // Plain relaxation while it makes fast progress; Newton once it settles or starts to oscillate.
  int relax_steps = 0;
  while (run.iterations < s.max_outer) {
    if (!relax_step()) break;
    ++relax_steps;
    if (settled || halved || (s.polish && relax_steps >= s.relax_steps)) break;
  }
  if (!have_anchor) {
    x = d;
    run.state = map(x, run.state);
    d = direction_of(run.state.mu);
  }
  if (s.polish && k > 1) {
    while (run.iterations < s.max_outer && residual() > s.fixed_point_tol) {
      if (newton_step()) continue;
      if (!relax_step()) break;
    }
  } else {
    while (!settled && run.iterations < s.max_outer)
      if (!relax_step()) break;
  }
  run.x = x;
  run.residual = residual();
  run.converged = run.residual <= std::max(s.fixed_point_tol, 1e-9) || (settled && !s.polish) || k <= 1;
  return run;
}

}  // namespace wpsn::detail
