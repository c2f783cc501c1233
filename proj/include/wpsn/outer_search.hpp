#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "wpsn/golden_section.hpp"
#include "wpsn/sdma_solver.hpp"
#include "wpsn/tdma_solver.hpp"

namespace wpsn {

enum class Benchmark { None, Mdr, FixedTau };

std::string to_string(Benchmark b);

struct SolveRequest {
  Scheme scheme = Scheme::Sdma;
  double r_i = 0.0;
  SystemConfig config;
  ChannelSet channels;
  Benchmark benchmark = Benchmark::None;
  double fixed_tau = 0.5;  // used by Benchmark::FixedTau
  double kappa = 1e-4;
  SolverOptions options;
  // start the search at tau0_min = r_i / r_up instead of relying on the -inf sentinel
  bool analytic_lower_bound = false;
};

using FixedTauSolution = std::variant<SdmaSolution, TdmaSolution>;

struct SolveResult {
  Scheme scheme = Scheme::Sdma;
  Benchmark benchmark = Benchmark::None;
  double tau0 = 0.0;
  double r_i = 0.0;
  double r_up = 0.0;
  double uplink_rate = 0.0;
  double downlink_rate = 0.0;
  DualVariables duals;
  int iterations = 0;  // fixed-point iterations of the final solve
  bool converged = false;
  std::optional<GoldenResult> golden;  // absent for FixedTau
  FixedTauSolution solution;

  const SdmaSolution* sdma() const { return std::get_if<SdmaSolution>(&solution); }
  const TdmaSolution* tdma() const { return std::get_if<TdmaSolution>(&solution); }
};

// Dispatches to the SDMA or TDMA solver for one downlink duration.
FixedTauSolution solve_fixed_tau(Scheme scheme, double tau0, double r_i, const ChannelSet& ch,
                                 const SystemConfig& config, const SolverOptions& opts = {},
                                 const WarmStart* warm = nullptr);

double uplink_rate_of(const FixedTauSolution& s);
double downlink_rate_of(const FixedTauSolution& s);
const WarmStart& warm_of(const FixedTauSolution& s);

// f(tau0) for a fixed threshold; -inf where tau0 cannot carry r_i.
// Consecutive calls warm-start from the previous evaluation, so the returned closure is stateful.
std::function<double(double)> uplink_objective(Scheme scheme, double r_i, const ChannelSet& ch,
                                               const SystemConfig& config, const SolverOptions& opts = {});

// Throws Infeasible (with r_up attached) when r_i exceeds the ceiling.
SolveResult solve(const SolveRequest& request);

struct Thresholds {
  double r_mi = 0.0;
  double r_up = 0.0;
  double tau0_star = 0.0;  // maximizer of the unconstrained objective
};

// Global thresholds over all tau0. r_mi is the downlink rate of the r_i = 0 optimum of that scheme.
Thresholds downlink_thresholds(Scheme scheme, const ChannelSet& ch, const SystemConfig& config,
                               double kappa = 1e-4);

// Same thresholds for the subproblem at one tau0: r_up is tau0 * R_up, r_mi the rate at r_i = 0.
Thresholds subproblem_thresholds(Scheme scheme, double tau0, const ChannelSet& ch, const SystemConfig& config,
                                 const SolverOptions& opts = {});

struct UnimodalityReport {
  std::vector<double> grid;
  std::vector<double> values;
  int infeasible_prefix = 0;
  int peak = -1;
  std::vector<int> violations;  // grid indices breaking the rise-then-fall pattern
  bool pass = false;
};

UnimodalityReport unimodality_audit(const std::function<double(double)>& objective, double grid_step = 0.02,
                                    double slack = 1e-9);

}  // namespace wpsn
