#pragma once

#include <limits>
#include <vector>

#include "wpsn/network_model.hpp"
#include "wpsn/waterfill.hpp"

namespace wpsn {

inline constexpr double kBetaInfinite = std::numeric_limits<double>::infinity();

struct DualVariables {
  double lambda = 0.0;
  double beta = 0.0;  // kBetaInfinite when the threshold sits at the matched-filter ceiling
  std::vector<double> mu;
  double gamma = 0.0;

  bool beta_infinite() const { return beta == kBetaInfinite; }
};

enum class InitKind { Uniform, RateMatched };

struct SolverOptions {
  InitKind init = InitKind::Uniform;
  int max_outer = 100;
  int max_sweeps = 500;
  // relaxation hands over to Newton once the objective moves less than this (relative)
  double outer_tol = 1e-6;
  // water-filling sweeps stop when duals and rate move less than this (relative)
  double sweep_tol = 1e-12;
  // Newton refinement of the dual-direction fixed point, after relax_steps plain updates
  bool polish = true;
  int relax_steps = 3;
  double fixed_point_tol = 1e-11;
  // pin the downlink beamformer to the matched filter (MDR benchmark)
  bool pin_matched_filter = false;
};

// Carries a previous solution forward, e.g. between neighbouring downlink durations.
struct WarmStart {
  std::vector<double> direction;
  std::vector<UplinkCovariance> p_set;
  double beta_scaled = 0.0;
};

struct SdmaSolution {
  HermitianMatrix w_b;
  std::vector<UplinkCovariance> p_set;  // power form
  double tau0 = 0.0;
  double r_i = 0.0;
  DualVariables duals;
  double uplink_rate = 0.0;
  double downlink_rate = 0.0;
  int iterations = 0;
  bool converged = false;
  double fixed_point_residual = 0.0;
  std::vector<double> trace;  // uplink rate after each outer iteration
  WarmStart warm;
};

HermitianMatrix composite_matrix(const std::vector<double>& mu, double beta, const ChannelSet& ch,
                                 const SystemConfig& config);

struct Beamformer {
  HermitianMatrix w_b;
  double lambda = 0.0;
};

// Rank-one beamformer P_B u u^H from the top eigenvector of the composite matrix.
// A threshold at the ceiling tau0 * r_up (or beta = +inf) returns the matched filter with lambda = 0.
Beamformer optimal_downlink_beamforming(const std::vector<double>& mu, double beta, const ChannelSet& ch,
                                        const SystemConfig& config, double r_i, double tau0 = 1.0);

// Smallest beta whose beamformer meets r_i; 0 when the constraint is already slack.
// Throws BracketNotFound when no finite beta reaches r_i.
double beta_search(const std::vector<double>& mu, double tau0, double r_i, const ChannelSet& ch,
                   const SystemConfig& config);

// M^{1/2} = (I_R + sigma^-2 sum_{i != skip} G_i P_i G_i^H)^{-1/2}, power-form P.
HermitianMatrix interference_whitener(const std::vector<UplinkCovariance>& p_set, int skip,
                                      const ChannelSet& ch, const SystemConfig& config);

struct ErAllocation {
  UplinkCovariance p;          // power form
  std::vector<double> powers;  // per right singular vector
  double mu = 0.0;
  Waterfill fill;
};

// Water-filling on the whitened channel with power budget energy_budget / (1 - tau0).
ErAllocation per_er_waterfill(const CMatrix& whitened_channel, double energy_budget, double tau0,
                              double sigma2);

struct IwfResult {
  std::vector<UplinkCovariance> p_set;
  std::vector<double> mu;
  double rate = 0.0;
  int sweeps = 0;
  bool converged = false;
  double residual = 0.0;
};

// Cyclic per-ER water-filling for a fixed beamformer. Throws NotConverged after max_sweeps.
IwfResult iterative_waterfilling(const HermitianMatrix& w_b, double tau0, const ChannelSet& ch,
                                 const SystemConfig& config, const SolverOptions& opts = {},
                                 const std::vector<UplinkCovariance>* warm = nullptr);

// Rank-one a a^H with the downlink rate exactly r_i at tau0 and ||a||^2 = P_B.
HermitianMatrix rate_matched_beamformer(double tau0, double r_i, const ChannelSet& ch,
                                        const SystemConfig& config);

SdmaSolution solve_fixed_tau_sdma(double tau0, double r_i, const ChannelSet& ch, const SystemConfig& config,
                                  const SolverOptions& opts = {}, const WarmStart* warm = nullptr);

struct RiMi {
  double r_mi = 0.0;
  double tau0_star = 0.0;
};

// Downlink rate delivered incidentally by the unconstrained optimum (golden section over tau0).
// Results are memoized per channel set and configuration.
RiMi compute_ri_mi(const ChannelSet& ch, const SystemConfig& config, double kappa = 1e-4);

}  // namespace wpsn
