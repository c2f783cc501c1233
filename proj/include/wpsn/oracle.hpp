#pragma once

#include <string>
#include <vector>

#include "wpsn/network_model.hpp"
#include "wpsn/sdma_solver.hpp"
#include "wpsn/tdma_solver.hpp"

// Independent certification: a generic first-order maximizer of the perspective (energy-form)
// problems and a KKT residual auditor. Nothing here calls into the semi-closed-form solvers.
namespace wpsn::oracle {

// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
HermitianMatrix project_psd(const HermitianMatrix& a);

struct OracleOptions {
  int max_iterations = 100000;  // total projected-gradient steps over all multiplier rounds
  double gradient_tol = 1e-7;   // gradient-map norm in scaled variables
  double feasibility_tol = 1e-7;  // scaled; restoration removes the rest
  double penalty = 100.0;
};

struct OracleSolution {
  double objective = 0.0;  // bits, evaluated at the restored feasible point
  HermitianMatrix w_b;     // power form
  std::vector<HermitianMatrix> p_set;  // power form
  TimeAllocation tau;
  int iterations = 0;
  int rounds = 0;
  double gradient_norm = 0.0;
  double violation = 0.0;  // largest scaled constraint violation before restoration
  bool converged = false;
};

// Throws Infeasible / InfeasibleAtTau like the solvers, DomainError for tau0 outside (0, 1),
// NotConverged when the iteration budget runs out far from stationarity.
OracleSolution oracle_solve(Scheme scheme, double tau0, double r_i, const ChannelSet& ch,
                            const SystemConfig& config, const OracleOptions& opts = {});

struct KktEntry {
  std::string name;
  double value = 0.0;  // nonnegative residual
  double scale = 1.0;  // natural magnitude the residual is compared against

  double relative() const { return value / (scale > 0.0 ? scale : 1.0); }
};

struct KktReport {
  std::vector<KktEntry> primal;
  std::vector<KktEntry> slackness;
  std::vector<KktEntry> stationarity;
  double rank_gap = 0.0;  // second over first eigenvalue of W_B

  double worst() const;  // largest relative residual
  std::string worst_name() const;
  bool pass(double tol = 1e-6, double rank_tol = 1e-8) const;
};

KktReport kkt_audit(const SdmaSolution& s, const ChannelSet& ch, const SystemConfig& config);
KktReport kkt_audit(const TdmaSolution& s, const ChannelSet& ch, const SystemConfig& config);

}  // namespace wpsn::oracle
