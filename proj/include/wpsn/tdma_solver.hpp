#pragma once

#include <vector>

#include "wpsn/sdma_solver.hpp"

namespace wpsn {

// Effective energy-weighted gains Lambda_G,i^2 * Lambda_P,i of one ER (energy-form powers).
struct SubchannelProfile {
  std::vector<double> lambdabar;
};

struct TdmaSolution {
  HermitianMatrix w_b;
  std::vector<UplinkCovariance> p_set;  // power form; energy form is p * tau_e[k]
  TimeAllocation tau;
  double r_i = 0.0;
  DualVariables duals;  // gamma filled
  double uplink_rate = 0.0;
  double downlink_rate = 0.0;
  int iterations = 0;
  bool converged = false;
  double fixed_point_residual = 0.0;
  std::vector<double> trace;
  std::vector<SubchannelProfile> profiles;
  WarmStart warm;
};

struct TdmaFill {
  std::vector<double> energies;  // per right singular vector of G_k
  double mu = 0.0;
  UplinkCovariance p;  // power form, V diag(energies) V^H / tau
  Waterfill fill;
};

// Energy split in the eigenbasis of G_k's right singular vectors. tau_ek = 0 gives a zero allocation.
TdmaFill tdma_waterfill(const CMatrix& g_k, double energy_budget, double tau_ek, double sigma2);

SubchannelProfile make_profile(const CMatrix& g_k, const std::vector<double>& energies);

// Marginal uplink rate per unit slot length (bits). Throws DomainError for tau <= 0.
double g_t(double tau, const SubchannelProfile& profile, double sigma2);
double g_t_derivative(double tau, const SubchannelProfile& profile, double sigma2);

struct GtInverse {
  double tau = 0.0;
  bool at_lower_edge = false;  // gamma exceeds g_T at the smallest bracketed slot
};

inline constexpr double kMinSlot = 1e-12;

// Unique tau with g_T(tau) = gamma. All-zero profiles return 0.
GtInverse invert_g_t(double gamma, const SubchannelProfile& profile, double sigma2);

struct TimeSplit {
  TimeAllocation tau;
  double gamma = 0.0;
};

// Slot lengths for fixed profiles: equalize g_T at gamma >= c_r and fill 1 - tau0 exactly.
TimeSplit allocate_uplink_time(const std::vector<SubchannelProfile>& profiles, double tau0, double c_r,
                               double sigma2);

TdmaSolution solve_fixed_tau_tdma(double tau0, double r_i, const ChannelSet& ch, const SystemConfig& config,
                                  const SolverOptions& opts = {}, const WarmStart* warm = nullptr);

}  // namespace wpsn
