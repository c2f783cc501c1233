#include <doctest.h>

#include <cmath>
#include <cstring>

#include "support.hpp"
#include "wpsn/errors.hpp"
#include "wpsn/network_model.hpp"

using namespace wpsn;

namespace {

bool same_bytes(const CMatrix& a, const CMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(linalg::Complex) * a.size()) == 0;
}

}  // namespace

TEST_CASE("dBm conversion") {
  CHECK(dbm_to_watt(20.0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(dbm_to_watt(-100.0) == doctest::Approx(1e-13).epsilon(1e-14));
  CHECK(watt_to_dbm(dbm_to_watt(5.0)) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("config validation names the offending field") {
  SystemConfig c;
  c.eps = {1.2, 1.0, 1.0};
  try {
    c.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "eps[0]");
  }
  SystemConfig d;
  d.eps = {1.0};
  CHECK_THROWS_AS(d.validate(), ValidationError);
  SystemConfig e;
  e.n_b = 0;
  CHECK_THROWS_AS(e.validate(), ValidationError);
}

TEST_CASE("channel generation is deterministic per seed") {
  const SystemConfig c;
  const ChannelSet a = generate_channels(c, 42);
  const ChannelSet b = generate_channels(c, 42);
  const ChannelSet other = generate_channels(c, 43);
  for (int k = 0; k < c.k; ++k) {
    CHECK(same_bytes(a.h_dl[k], b.h_dl[k]));
    CHECK(same_bytes(a.g_ul[k], b.g_ul[k]));
  }
  CHECK(same_bytes(a.h_ir, b.h_ir));
  CHECK(same_bytes(a.g_ir, b.g_ir));
  CHECK(a.distances == b.distances);
  CHECK_FALSE(same_bytes(a.h_ir, other.h_ir));
  CHECK(a.h_dl[0].rows() == c.n_u);
  CHECK(a.h_dl[0].cols() == c.n_b);
  CHECK(a.g_ul[0].rows() == c.n_b);
  CHECK(a.g_ul[0].cols() == c.n_u);
  for (double d : a.distances) {
    CHECK(d >= c.min_distance_m);
    CHECK(d <= c.radius_m);
  }
}

TEST_CASE("zero path-loss coefficient gives all-zero channels") {
  SystemConfig c;
  c.pathloss_coeff = 0.0;
  const ChannelSet ch = generate_channels(c, 1);
  for (int k = 0; k < c.k; ++k) {
    CHECK(ch.h_dl[k].norm() == 0.0);
    CHECK(ch.g_ul[k].norm() == 0.0);
  }
  CHECK(ch.h_ir.norm() == 0.0);
  CHECK(ch.g_ir.norm() == 0.0);
}

TEST_CASE("complex Gaussian draws have the path-loss variance at 10 m") {
  const double variance = 1e-3 * std::pow(10.0, -3.0);
  GaussianSource src(9);
  const int n = 100000;
  double sum = 0.0;
  linalg::Complex mean = 0.0;
  for (int i = 0; i < n; ++i) {
    const linalg::Complex z = src.complex_normal(variance);
    sum += std::norm(z);
    mean += z;
  }
  CHECK(std::abs(sum / n - 1e-6) <= 0.03 * 1e-6);
  CHECK(std::abs(mean / static_cast<double>(n)) < 0.02 * std::sqrt(variance));
}

TEST_CASE("downlink rate") {
  CHECK(downlink_rate(HermitianMatrix::zeros(2), 0.5, CVector::Ones(2), 1.0) == 0.0);
  CHECK(downlink_rate(HermitianMatrix::identity(1), 1.0, CVector::Ones(1), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  // h^H W h = 1e-10 against -100 dBm noise
  const CVector h = CVector::Constant(1, 1e-5);
  CHECK(downlink_rate(HermitianMatrix::identity(1), 0.5, h, 1e-13) ==
        doctest::Approx(0.5 * std::log2(1001.0)).epsilon(1e-12));
  CHECK(std::abs(0.5 * std::log2(1001.0) - 4.9835) < 2e-4);  // quoted value is truncated, exact is 4.98361
}

TEST_CASE("harvested energy") {
  const CMatrix h = CMatrix::Constant(2, 3, linalg::Complex(1e-5, 1e-5));
  CHECK(harvested_energy(HermitianMatrix::identity(3), 0.5, h, 0.0) == 0.0);
  const double c = h.squaredNorm();
  const HermitianMatrix w = HermitianMatrix::identity(3) * (0.1 / 3.0);
  CHECK(harvested_energy(w, 0.5, h, 0.7) == doctest::Approx(0.5 * 0.7 * 0.1 * c / 3.0).epsilon(1e-12));
  // tau0 = 0.5, eps = 1, P_B = 0.1, N_B = 6, ||H||_F^2 = 2e-9
  CMatrix h6 = CMatrix::Zero(1, 6);
  h6(0, 0) = std::sqrt(2e-9);
  const HermitianMatrix w6 = HermitianMatrix::identity(6) * (0.1 / 6.0);
  CHECK(harvested_energy(w6, 0.5, h6, 1.0) == doctest::Approx(1.6667e-11).epsilon(1e-4));
}

TEST_CASE("SDMA sum rate special cases") {
  const auto inst = testing::scalar_instance();
  auto c = inst.config;
  const std::vector<UplinkCovariance> zero{HermitianMatrix::zeros(1)};
  const double tau0 = 0.3;
  CHECK(sdma_sum_rate(zero, tau0, inst.ch, c) == doctest::Approx(0.7 * std::log2(1.25)).epsilon(1e-14));
  const std::vector<UplinkCovariance> p{HermitianMatrix::identity(1) * 2.0};
  CHECK(sdma_sum_rate(p, tau0, inst.ch, c) == doctest::Approx(0.7 * std::log2(1.0 + 0.25 + 0.81 * 2.0)).epsilon(1e-12));
  c.p_i = 1e-300;  // validated configs need P_I > 0; this is numerically zero
  CHECK(sdma_sum_rate(zero, tau0, inst.ch, c) < 1e-200);
}

TEST_CASE("TDMA sum rate special cases") {
  const auto inst = testing::scalar_instance();
  const auto& c = inst.config;
  const double c_r = std::log2(1.25);
  TimeAllocation t;
  t.tau0 = 0.4;
  t.tau_e = {0.0};
  t.tau_ir = 0.6;
  const std::vector<UplinkCovariance> p{HermitianMatrix::identity(1) * 3.0};
  CHECK(tdma_sum_rate(p, t, inst.ch, c) == doctest::Approx(0.6 * c_r).epsilon(1e-14));
  t.tau_e = {0.2};
  t.tau_ir = 0.4;
  CHECK(tdma_sum_rate(p, t, inst.ch, c) ==
        doctest::Approx(0.2 * std::log2(1.0 + 0.81 * 3.0) + 0.4 * c_r).epsilon(1e-13));
}

TEST_CASE("two identical ERs contribute twice the single-ER term") {
  auto inst = testing::scalar_instance();
  SystemConfig c = inst.config;
  c.k = 2;
  c.eps = {1.0, 1.0};
  ChannelSet ch = inst.ch;
  ch.h_dl.push_back(ch.h_dl[0]);
  ch.g_ul.push_back(ch.g_ul[0]);
  const std::vector<UplinkCovariance> p{HermitianMatrix::identity(1) * 1.5, HermitianMatrix::identity(1) * 1.5};
  TimeAllocation t{0.2, {0.3, 0.3}, 0.2};
  const double single = 0.3 * std::log2(1.0 + 0.81 * 1.5);
  CHECK(tdma_sum_rate(p, t, ch, c) == doctest::Approx(2.0 * single + 0.2 * std::log2(1.25)).epsilon(1e-13));
}

TEST_CASE("rate upper bound") {
  auto inst = testing::scalar_instance(0.8, 1.0);
  const RateBound b = rate_upper_bound(inst.ch, inst.config);
  CHECK(b.r_up == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(linalg::relative_frobenius(b.w_up.matrix(), (inst.ch.h_ir * inst.ch.h_ir.adjoint())) < 1e-14);

  SystemConfig c;
  c.n_b = 2;
  c.p_b = 0.1;
  c.sigma2 = 1e-13;
  ChannelSet ch;
  ch.h_ir = CVector::Zero(2);
  ch.h_ir(1) = linalg::Complex(0.0, std::sqrt(1e-9));
  CHECK(rate_upper_bound(ch, c).r_up == doctest::Approx(std::log2(1001.0)).epsilon(1e-12));
  CHECK(rate_upper_bound(ch, c).r_up == doctest::Approx(9.9672).epsilon(1e-5));
  c.p_b = 0.0;
  CHECK(rate_upper_bound(ch, c).r_up == 0.0);
}

TEST_CASE("IR spectral efficiency") {
  auto inst = testing::scalar_instance(0.8, 0.6, 0.9, std::sqrt(3.0));
  CHECK(ir_spectral_efficiency(inst.ch, inst.config) == doctest::Approx(2.0).epsilon(1e-14));
  const SystemConfig c;
  const ChannelSet ch = generate_channels(c, 3);
  const std::vector<UplinkCovariance> zero(c.k, HermitianMatrix::zeros(c.n_u));
  CHECK(ir_spectral_efficiency(ch, c) == doctest::Approx(sdma_sum_rate(zero, 0.35, ch, c) / 0.65).epsilon(1e-12));
}

TEST_CASE("time allocation validity") {
  CHECK(TimeAllocation{0.5, {0.2, 0.1}, 0.2}.valid_tdma());
  CHECK_FALSE(TimeAllocation{0.5, {0.2, 0.1}, 0.3}.valid_tdma());
  CHECK_FALSE(TimeAllocation{0.5, {0.6, -0.1}, 0.0}.valid_tdma());
}
