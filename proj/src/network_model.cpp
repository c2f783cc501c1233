#include "wpsn/network_model.hpp"

#include <cmath>
#include <numbers>

#include "wpsn/errors.hpp"

namespace wpsn {

std::string to_string(Scheme s) { return s == Scheme::Sdma ? "sdma" : "tdma"; }

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

void SystemConfig::validate() const {
  if (n_b < 1) throw ValidationError("n_b", "must be >= 1");
  if (n_u < 1) throw ValidationError("n_u", "must be >= 1");
  if (k < 1) throw ValidationError("k", "must be >= 1");
  if (!(p_b > 0.0) || !std::isfinite(p_b)) throw ValidationError("p_b", "must be a positive finite power");
  if (!(p_i > 0.0) || !std::isfinite(p_i)) throw ValidationError("p_i", "must be a positive finite power");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw ValidationError("sigma2", "must be a positive finite power");
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (!(eps[i] >= 0.0 && eps[i] <= 1.0))
      throw ValidationError("eps[" + std::to_string(i) + "]", "must lie in [0, 1]");
  if (eps.size() != static_cast<std::size_t>(k))
    throw ValidationError("eps", "expected " + std::to_string(k) + " entries");
  if (!(pathloss_coeff >= 0.0) || !std::isfinite(pathloss_coeff))
    throw ValidationError("pathloss_coeff", "must be nonnegative");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha", "must be nonnegative");
  if (!(radius_m > 0.0) || !std::isfinite(radius_m)) throw ValidationError("radius_m", "must be positive");
  if (!(min_distance_m > 0.0 && min_distance_m <= radius_m))
    throw ValidationError("min_distance_m", "must lie in (0, radius_m]");
}

bool TimeAllocation::valid_tdma(double tol) const {
  if (!(tau0 >= -tol && tau0 <= 1.0 + tol) || tau_ir < -tol) return false;
  double s = tau0 + tau_ir;
  for (double t : tau_e) {
    if (t < -tol) return false;
    s += t;
  }
  return std::abs(s - 1.0) <= tol;
}

double GaussianSource::uniform() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double GaussianSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

linalg::Complex GaussianSource::complex_normal(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

CMatrix GaussianSource::matrix(Eigen::Index rows, Eigen::Index cols, double variance) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_normal(variance);
  return m;
}

ChannelSet generate_channels(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  GaussianSource src(seed);
  ChannelSet ch;
  const double r0 = config.min_distance_m;
  const double r1 = config.radius_m;
  ch.distances.resize(config.k + 1);
  for (double& d : ch.distances) {
    // uniform by area over the annulus [r0, r1]
    const double u = src.uniform();
    d = std::sqrt(r0 * r0 + u * (r1 * r1 - r0 * r0));
  }
  auto var = [&](double d) { return config.pathloss_coeff * std::pow(d, -config.alpha); };
  for (int k = 0; k < config.k; ++k) {
    const double v = var(ch.distances[k]);
    ch.h_dl.push_back(src.matrix(config.n_u, config.n_b, v));
    ch.g_ul.push_back(src.matrix(config.n_b, config.n_u, v));
  }
  const double v = var(ch.distances[config.k]);
  ch.h_ir = src.matrix(config.n_b, 1, v).col(0);
  ch.g_ir = src.matrix(config.n_b, 1, v).col(0);
  return ch;
}

double downlink_rate(const HermitianMatrix& w_b, double tau0, const CVector& h_ir, double sigma2) {
  if (tau0 <= 0.0) return 0.0;
  const double snr = std::max(0.0, (h_ir.adjoint() * w_b.matrix() * h_ir)(0, 0).real()) / sigma2;
  return tau0 * std::log2(1.0 + snr);
}

double harvested_energy(const HermitianMatrix& w_b, double tau0, const CMatrix& h_dl_k, double eps_k) {
  const double tr = (h_dl_k * w_b.matrix() * h_dl_k.adjoint()).trace().real();
  return tau0 * eps_k * std::max(0.0, tr);
}

double sdma_sum_rate(const std::vector<UplinkCovariance>& p_set, double tau0, const ChannelSet& ch,
                     const SystemConfig& config) {
  if (tau0 >= 1.0) return 0.0;
  const Eigen::Index n = ch.g_ir.size();
  CMatrix a = CMatrix::Identity(n, n) + (config.p_i / config.sigma2) * (ch.g_ir * ch.g_ir.adjoint());
  for (std::size_t k = 0; k < p_set.size(); ++k)
    a += ch.g_ul[k] * p_set[k].matrix() * ch.g_ul[k].adjoint() / config.sigma2;
  return (1.0 - tau0) * linalg::log2_det_spd(0.5 * (a + a.adjoint()));
}

double tdma_sum_rate(const std::vector<UplinkCovariance>& p_set, const TimeAllocation& tau,
                     const ChannelSet& ch, const SystemConfig& config) {
  double r = tau.tau_ir > 0.0 ? tau.tau_ir * ir_spectral_efficiency(ch, config) : 0.0;
  for (std::size_t k = 0; k < p_set.size(); ++k) {
    if (!(tau.tau_e[k] > 0.0)) continue;
    const CMatrix& g = ch.g_ul[k];
    CMatrix a = CMatrix::Identity(g.rows(), g.rows()) + g * p_set[k].matrix() * g.adjoint() / config.sigma2;
    r += tau.tau_e[k] * linalg::log2_det_spd(0.5 * (a + a.adjoint()));
  }
  return r;
}

RateBound rate_upper_bound(const ChannelSet& ch, const SystemConfig& config) {
  const double hn2 = ch.h_ir.squaredNorm();
  if (!(hn2 > 0.0)) throw ZeroIrChannel();
  RateBound b;
  b.r_up = std::log2(1.0 + config.p_b * hn2 / config.sigma2);
  b.w_up = HermitianMatrix::outer(ch.h_ir, config.p_b / hn2);
  return b;
}

double ir_spectral_efficiency(const ChannelSet& ch, const SystemConfig& config) {
  return std::log2(1.0 + config.p_i * ch.g_ir.squaredNorm() / config.sigma2);
}

}  // namespace wpsn
