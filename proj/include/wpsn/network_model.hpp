#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wpsn/matrix_kernels.hpp"

namespace wpsn {

using linalg::CMatrix;
using linalg::CVector;
using linalg::HermitianMatrix;

enum class Scheme { Sdma, Tdma };

std::string to_string(Scheme s);

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

struct SystemConfig {
  int n_b = 6;
  int n_u = 3;
  int k = 3;
  double p_b = 0.1;                // watts
  double p_i = 0.0031622776601683794;  // 5 dBm
  double sigma2 = 1e-13;           // -100 dBm
  std::vector<double> eps{1.0, 1.0, 1.0};
  double pathloss_coeff = 1e-3;
  double alpha = 3.0;
  double radius_m = 10.0;
  // Nodes are kept at least this far from the H-AP so d^-alpha stays bounded.
  double min_distance_m = 1.0;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

struct ChannelSet {
  std::vector<CMatrix> h_dl;  // K matrices, n_u x n_b
  CVector h_ir;               // n_b
  std::vector<CMatrix> g_ul;  // K matrices, n_b x n_u
  CVector g_ir;               // n_b
  std::vector<double> distances;  // ERs first, IR last
};

struct TimeAllocation {
  double tau0 = 0.0;
  std::vector<double> tau_e;
  double tau_ir = 0.0;

  bool valid_tdma(double tol = 1e-9) const;
};

// Power-form uplink covariance of one ER. Energy form is p * tau.
using UplinkCovariance = HermitianMatrix;

// Portable standard normal stream: Box-Muller over mt19937_64, so draws match across standard libraries.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : eng_(seed) {}
  double uniform();  // [0, 1)
  double normal();
  // circularly symmetric complex Gaussian with E|z|^2 = variance
  linalg::Complex complex_normal(double variance);
  CMatrix matrix(Eigen::Index rows, Eigen::Index cols, double variance);

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

ChannelSet generate_channels(const SystemConfig& config, std::uint64_t seed);

double downlink_rate(const HermitianMatrix& w_b, double tau0, const CVector& h_ir, double sigma2);
double harvested_energy(const HermitianMatrix& w_b, double tau0, const CMatrix& h_dl_k, double eps_k);

// Power-form covariances, one per ER.
double sdma_sum_rate(const std::vector<UplinkCovariance>& p_set, double tau0, const ChannelSet& ch,
                     const SystemConfig& config);
double tdma_sum_rate(const std::vector<UplinkCovariance>& p_set, const TimeAllocation& tau,
                     const ChannelSet& ch, const SystemConfig& config);

struct RateBound {
  double r_up = 0.0;
  HermitianMatrix w_up;
};

RateBound rate_upper_bound(const ChannelSet& ch, const SystemConfig& config);
double ir_spectral_efficiency(const ChannelSet& ch, const SystemConfig& config);

}  // namespace wpsn
