#include "wpsn/outer_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "wpsn/errors.hpp"

namespace wpsn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

SolveResult assemble(const SolveRequest& req, double r_up, FixedTauSolution sol) {
  SolveResult out;
  out.scheme = req.scheme;
  out.benchmark = req.benchmark;
  out.r_i = req.r_i;
  out.r_up = r_up;
  std::visit(
      [&](const auto& s) {
        out.uplink_rate = s.uplink_rate;
        out.downlink_rate = s.downlink_rate;
        out.duals = s.duals;
        out.iterations = s.iterations;
        out.converged = s.converged;
      },
      sol);
  if (const auto* s = std::get_if<SdmaSolution>(&sol)) out.tau0 = s->tau0;
  if (const auto* s = std::get_if<TdmaSolution>(&sol)) out.tau0 = s->tau.tau0;
  out.solution = std::move(sol);
  return out;
}

}  // namespace

std::string to_string(Benchmark b) {
  switch (b) {
    case Benchmark::None: return "optimal";
    case Benchmark::Mdr: return "mdr";
    case Benchmark::FixedTau: return "fixed_tau";
  }
  return "?";
}

FixedTauSolution solve_fixed_tau(Scheme scheme, double tau0, double r_i, const ChannelSet& ch,
                                 const SystemConfig& config, const SolverOptions& opts, const WarmStart* warm) {
  if (scheme == Scheme::Sdma) return solve_fixed_tau_sdma(tau0, r_i, ch, config, opts, warm);
  return solve_fixed_tau_tdma(tau0, r_i, ch, config, opts, warm);
}

double uplink_rate_of(const FixedTauSolution& s) {
  return std::visit([](const auto& x) { return x.uplink_rate; }, s);
}

double downlink_rate_of(const FixedTauSolution& s) {
  return std::visit([](const auto& x) { return x.downlink_rate; }, s);
}

const WarmStart& warm_of(const FixedTauSolution& s) {
  return std::visit([](const auto& x) -> const WarmStart& { return x.warm; }, s);
}

std::function<double(double)> uplink_objective(Scheme scheme, double r_i, const ChannelSet& ch,
                                               const SystemConfig& config, const SolverOptions& opts) {
  auto warm = std::make_shared<std::optional<WarmStart>>();
  return [=, &ch, &config](double t) {
    try {
      FixedTauSolution s = solve_fixed_tau(scheme, t, r_i, ch, config, opts, *warm ? &**warm : nullptr);
      *warm = warm_of(s);
      return uplink_rate_of(s);
    } catch (const InfeasibleAtTau&) {
      return kNegInf;
    }
  };
}

SolveResult solve(const SolveRequest& req) {
  req.config.validate();
  if (!(req.r_i >= 0.0) || !std::isfinite(req.r_i)) throw ValidationError("r_i", "must be finite and >= 0");
  if (!(req.kappa > 0.0 && req.kappa < 1.0)) throw ValidationError("kappa", "must lie in (0, 1)");
  const double r_up = rate_upper_bound(req.channels, req.config).r_up;
  if (req.r_i > r_up * (1.0 + 1e-12)) throw Infeasible(req.r_i, r_up);

  SolverOptions opts = req.options;
  opts.pin_matched_filter = req.benchmark == Benchmark::Mdr;

  if (req.benchmark == Benchmark::FixedTau) {
    if (!(req.fixed_tau >= 0.0 && req.fixed_tau <= 1.0)) throw ValidationError("fixed_tau", "must lie in [0, 1]");
    return assemble(req, r_up, solve_fixed_tau(req.scheme, req.fixed_tau, req.r_i, req.channels, req.config, opts));
  }

  std::optional<WarmStart> warm;
  auto objective = [&](double t) {
    try {
      FixedTauSolution s = solve_fixed_tau(req.scheme, t, req.r_i, req.channels, req.config, opts,
                                           warm ? &*warm : nullptr);
      warm = warm_of(s);
      return uplink_rate_of(s);
    } catch (const InfeasibleAtTau&) {
      return kNegInf;
    }
  };
  double lo = 0.0;
  if (req.analytic_lower_bound && r_up > 0.0) lo = std::min(req.r_i / r_up, 1.0);
  GoldenResult g;
  if (1.0 - lo <= req.kappa) {
    g.tau = 0.5 * (lo + 1.0);
    g.value = objective(g.tau);
    g.evaluations = 1;
  } else {
    g = golden_section(objective, lo, 1.0, req.kappa);
  }
  SolveResult out = assemble(req, r_up,
                             solve_fixed_tau(req.scheme, g.tau, req.r_i, req.channels, req.config, opts,
                                             warm ? &*warm : nullptr));
  out.golden = std::move(g);
  return out;
}

Thresholds downlink_thresholds(Scheme scheme, const ChannelSet& ch, const SystemConfig& config, double kappa) {
  Thresholds t;
  t.r_up = rate_upper_bound(ch, config).r_up;
  if (scheme == Scheme::Sdma) {
    const RiMi m = compute_ri_mi(ch, config, kappa);
    t.r_mi = m.r_mi;
    t.tau0_star = m.tau0_star;
    return t;
  }
  SolveRequest req;
  req.scheme = scheme;
  req.config = config;
  req.channels = ch;
  req.kappa = kappa;
  const SolveResult r = solve(req);
  t.r_mi = r.downlink_rate;
  t.tau0_star = r.tau0;
  return t;
}

Thresholds subproblem_thresholds(Scheme scheme, double tau0, const ChannelSet& ch, const SystemConfig& config,
                                 const SolverOptions& opts) {
  Thresholds t;
  t.r_up = tau0 * rate_upper_bound(ch, config).r_up;
  t.r_mi = downlink_rate_of(solve_fixed_tau(scheme, tau0, 0.0, ch, config, opts));
  t.tau0_star = tau0;
  return t;
}

UnimodalityReport unimodality_audit(const std::function<double(double)>& objective, double grid_step,
                                    double slack) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw DomainError("grid step must lie in (0, 1]");
  UnimodalityReport rep;
  const int n = static_cast<int>(std::lround(1.0 / grid_step));
  for (int i = 0; i <= n; ++i) {
    const double t = std::min(1.0, i * grid_step);
    rep.grid.push_back(t);
    rep.values.push_back(objective(t));
  }
  const int m = static_cast<int>(rep.values.size());
  while (rep.infeasible_prefix < m && rep.values[rep.infeasible_prefix] == kNegInf) ++rep.infeasible_prefix;
  double top = kNegInf;
  for (int i = rep.infeasible_prefix; i < m; ++i) {
    if (!std::isfinite(rep.values[i])) {
      rep.violations.push_back(i);  // infeasible point past the first feasible one, or NaN
      continue;
    }
    if (rep.values[i] > top) top = rep.values[i], rep.peak = i;
  }
  if (rep.peak < 0) return rep;
  const double tol = slack * std::max(1.0, std::abs(top));
  for (int i = rep.infeasible_prefix + 1; i <= rep.peak; ++i)
    if (std::isfinite(rep.values[i]) && std::isfinite(rep.values[i - 1]) && rep.values[i] < rep.values[i - 1] - tol)
      rep.violations.push_back(i);
  for (int i = rep.peak + 1; i < m; ++i)
    if (std::isfinite(rep.values[i]) && std::isfinite(rep.values[i - 1]) && rep.values[i] > rep.values[i - 1] + tol)
      rep.violations.push_back(i);
  std::sort(rep.violations.begin(), rep.violations.end());
  rep.pass = rep.violations.empty();
  return rep;
}

}  // namespace wpsn
