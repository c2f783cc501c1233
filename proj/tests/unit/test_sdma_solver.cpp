#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "wpsn/errors.hpp"
#include "wpsn/oracle.hpp"
#include "wpsn/outer_search.hpp"
#include "wpsn/sdma_solver.hpp"

using namespace wpsn;

namespace {

double h_w_h(const HermitianMatrix& w, const CVector& h) { return (h.adjoint() * w.matrix() * h)(0, 0).real(); }

}  // namespace

TEST_CASE("composite matrix") {
  const SystemConfig c;
  const ChannelSet ch = generate_channels(c, 1);
  CHECK(composite_matrix({0.0, 0.0, 0.0}, 0.0, ch, c).matrix().norm() == 0.0);
  const CMatrix hh = ch.h_ir * ch.h_ir.adjoint();
  CHECK(linalg::relative_frobenius(composite_matrix({0.0, 0.0, 0.0}, 1.0, ch, c).matrix(), hh) < 1e-15);
  std::mt19937_64 eng(2);
  std::uniform_real_distribution<double> u(0.0, 1e9);
  for (int t = 0; t < 10; ++t) {
    const HermitianMatrix h = composite_matrix({u(eng), u(eng), u(eng)}, u(eng), ch, c);
    const linalg::RVector ev = linalg::hermitian_eigenvalues(h);
    CHECK(ev.minCoeff() >= -1e-10 * ev.maxCoeff());
  }
}

TEST_CASE("energy beamformer aligns with the strongest ER direction") {
  auto inst = testing::scalar_instance();
  SystemConfig c = inst.config;
  c.n_b = 3;
  c.p_b = 2.0;
  ChannelSet ch = inst.ch;
  CMatrix h = CMatrix::Zero(1, 3);
  h(0, 1) = 2.0;  // H^H H = diag(0, 4, 0)
  ch.h_dl = {h};
  ch.h_ir = CVector::Ones(3);
  const Beamformer b = optimal_downlink_beamforming({1.0}, 0.0, ch, c, 0.0, 0.5);
  CMatrix expected = CMatrix::Zero(3, 3);
  expected(1, 1) = 2.0;
  CHECK(linalg::relative_frobenius(b.w_b.matrix(), expected) < 1e-12);
  CHECK(b.lambda == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("threshold at the ceiling returns the matched filter") {
  const SystemConfig c;
  const ChannelSet ch = generate_channels(c, 4);
  const RateBound rb = rate_upper_bound(ch, c);
  const Beamformer b = optimal_downlink_beamforming({1.0, 1.0, 1.0}, 0.0, ch, c, 0.5 * rb.r_up, 0.5);
  CHECK(linalg::relative_frobenius(b.w_b.matrix(), rb.w_up.matrix()) < 1e-12);
  CHECK(b.lambda == 0.0);
  CHECK(linalg::relative_frobenius(rb.w_up.matrix(),
                                   (c.p_b / ch.h_ir.squaredNorm()) * ch.h_ir * ch.h_ir.adjoint()) < 1e-12);
}

TEST_CASE("beamformer rate agrees with a direct eigen-solve") {
  const SystemConfig c;
  const ChannelSet ch = generate_channels(c, 5);
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> mu{u(eng), u(eng), u(eng)};
    const double beta = u(eng);
    const Beamformer b = optimal_downlink_beamforming(mu, beta, ch, c, 0.0, 0.5);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(composite_matrix(mu, beta, ch, c).matrix());
    const CVector top = es.eigenvectors().col(es.eigenvalues().size() - 1);
    CHECK(h_w_h(b.w_b, ch.h_ir) == doctest::Approx(c.p_b * std::norm(top.dot(ch.h_ir))).epsilon(1e-9));
    CHECK(b.w_b.trace() == doctest::Approx(c.p_b).epsilon(1e-12));
  }
}

TEST_CASE("beta search") {
  const SystemConfig c;
  const ChannelSet ch = generate_channels(c, 6);
  const double tau0 = 0.5;
  const std::vector<double> mu{1.0, 2.0, 0.5};
  const double at_zero = downlink_rate(optimal_downlink_beamforming(mu, 0.0, ch, c, 0.0, tau0).w_b, tau0, ch.h_ir, c.sigma2);
  CHECK(beta_search(mu, tau0, 0.9 * at_zero, ch, c) == 0.0);
  const double ceiling = tau0 * rate_upper_bound(ch, c).r_up;
  const double target = 0.5 * (at_zero + ceiling);
  const double beta = beta_search(mu, tau0, target, ch, c);
  CHECK(beta > 0.0);
  const double got = downlink_rate(optimal_downlink_beamforming(mu, beta, ch, c, target, tau0).w_b, tau0, ch.h_ir, c.sigma2);
  CHECK(std::abs(got - target) <= 1e-9);
  CHECK_THROWS_AS(beta_search(mu, tau0, ceiling, ch, c), BracketNotFound);
}

TEST_CASE("interference whitener") {
  auto inst = testing::scalar_instance();
  SystemConfig c = inst.config;
  c.n_b = 2;
  ChannelSet ch = inst.ch;
  ch.g_ir = CVector::Zero(2);
  ch.g_ir(0) = 1.0;
  ch.g_ul = {CMatrix::Constant(2, 1, 0.5)};
  const std::vector<UplinkCovariance> none{HermitianMatrix::zeros(1)};
  const linalg::RVector ev = linalg::hermitian_eigenvalues(interference_whitener(none, -1, ch, c));
  CHECK(ev(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ev(1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  const SystemConfig d;
  const ChannelSet r = generate_channels(d, 7);
  std::vector<UplinkCovariance> p;
  for (int k = 0; k < d.k; ++k) p.push_back(HermitianMatrix::identity(d.n_u) * 1e-3 * (k + 1));
  const CMatrix m = interference_whitener(p, 1, r, d).matrix();
  CMatrix a = CMatrix::Identity(d.n_b, d.n_b) + (d.p_i / d.sigma2) * r.g_ir * r.g_ir.adjoint();
  for (int k : {0, 2}) a += r.g_ul[k] * p[k].matrix() * r.g_ul[k].adjoint() / d.sigma2;
  CHECK(linalg::relative_frobenius(m * m * a, CMatrix::Identity(d.n_b, d.n_b)) < 1e-8);
}

TEST_CASE("per-ER water-filling") {
  CMatrix g = CMatrix::Zero(2, 2);
  g(0, 0) = 2.0;
  g(1, 1) = 1.0;
  const double tau0 = 0.4;
  const ErAllocation zero = per_er_waterfill(g, 0.0, tau0, 1.0);
  CHECK(zero.p.matrix().norm() == 0.0);
  // gains {4, 1}, power 1
  const ErAllocation a = per_er_waterfill(g, 1.0 - tau0, tau0, 1.0);
  CHECK(a.powers[0] == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(a.powers[1] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK((1.0 - tau0) * a.p.trace() == doctest::Approx(1.0 - tau0).epsilon(1e-10));
  CHECK(a.mu > 0.0);
  CMatrix e = CMatrix::Identity(2, 2) * 3.0;
  const ErAllocation eq = per_er_waterfill(e, 5.0, tau0, 1.0);
  CHECK(eq.powers[0] == doctest::Approx(eq.powers[1]).epsilon(1e-12));
}

TEST_CASE("single ER: iterative water-filling is one water-fill") {
  SystemConfig c = testing::small_config();
  c.k = 1;
  c.eps = {1.0};
  const ChannelSet ch = generate_channels(c, 8);
  const double tau0 = 0.5;
  const HermitianMatrix w = HermitianMatrix::identity(c.n_b) * (c.p_b / c.n_b);
  const IwfResult r = iterative_waterfilling(w, tau0, ch, c);
  const double budget = harvested_energy(w, tau0, ch.h_dl[0], 1.0);
  const CMatrix whitened = interference_whitener({HermitianMatrix::zeros(c.n_u)}, 0, ch, c).matrix() * ch.g_ul[0];
  const ErAllocation a = per_er_waterfill(whitened, budget, tau0, c.sigma2);
  CHECK(linalg::relative_frobenius(r.p_set[0].matrix(), a.p.matrix()) < 1e-12);
  CHECK(r.mu[0] == doctest::Approx(a.mu).epsilon(1e-10));
}

TEST_CASE("no harvested energy leaves only the IR term") {
  SystemConfig c = testing::small_config();
  c.eps = {0.0, 0.0};
  const ChannelSet ch = generate_channels(c, 9);
  const IwfResult r = iterative_waterfilling(HermitianMatrix::identity(c.n_b) * (c.p_b / c.n_b), 0.3, ch, c);
  for (const auto& p : r.p_set) CHECK(p.matrix().norm() == 0.0);
  CHECK(r.rate == doctest::Approx(0.7 * ir_spectral_efficiency(ch, c)).epsilon(1e-10));
}

TEST_CASE("two-by-two SDMA subproblem agrees with the oracle") {
  SystemConfig c = testing::small_config();
  c.n_b = 2;
  c.n_u = 2;
  for (std::uint64_t seed : {11u, 12u}) {
    const ChannelSet ch = generate_channels(c, seed);
    const SdmaSolution s = solve_fixed_tau_sdma(0.5, 0.0, ch, c);
    const double o = oracle::oracle_solve(Scheme::Sdma, 0.5, 0.0, ch, c).objective;
    CHECK(std::abs(s.uplink_rate - o) <= 1e-4 * o);
  }
}

TEST_CASE("zero downlink time gives the IR-only rate") {
  const SystemConfig c;
  const ChannelSet ch = generate_channels(c, 10);
  const SdmaSolution s = solve_fixed_tau_sdma(0.0, 0.0, ch, c);
  CHECK(s.uplink_rate == doctest::Approx(ir_spectral_efficiency(ch, c)).epsilon(1e-12));
}

TEST_CASE("both initializations reach the same optimum") {
  const SystemConfig c;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const ChannelSet ch = generate_channels(c, seed);
    const Thresholds th = subproblem_thresholds(Scheme::Sdma, 0.5, ch, c);
    const double r_i = 0.5 * (th.r_mi + th.r_up);
    SolverOptions a;
    SolverOptions b;
    b.init = InitKind::RateMatched;
    const SdmaSolution x = solve_fixed_tau_sdma(0.5, r_i, ch, c, a);
    const SdmaSolution y = solve_fixed_tau_sdma(0.5, r_i, ch, c, b);
    CHECK(x.converged);
    CHECK(y.converged);
    CHECK(std::abs(x.uplink_rate - y.uplink_rate) <= 1e-6 * x.uplink_rate);
    CHECK(std::abs(x.downlink_rate - r_i) <= 1e-8);
  }
}

TEST_CASE("rate-matched beamformer meets the threshold with full power") {
  const SystemConfig c;
  const ChannelSet ch = generate_channels(c, 3);
  const double r_i = 0.3 * rate_upper_bound(ch, c).r_up;
  const HermitianMatrix w = rate_matched_beamformer(0.5, r_i, ch, c);
  CHECK(w.trace() == doctest::Approx(c.p_b).epsilon(1e-12));
  CHECK(downlink_rate(w, 0.5, ch.h_ir, c.sigma2) == doctest::Approx(r_i).epsilon(1e-10));
}

TEST_CASE("R_mi: zero when ER channels are orthogonal to the IR, below R_up otherwise") {
  SystemConfig c = testing::small_config();
  ChannelSet ch = generate_channels(c, 13);
  ch.h_ir.setZero();
  ch.h_ir(0) = 1e-4;
  for (auto& h : ch.h_dl) h.col(0).setZero();
  CHECK(compute_ri_mi(ch, c).r_mi < 1e-9);

  const SystemConfig d;
  for (std::uint64_t seed : {1u, 2u}) {
    const ChannelSet r = generate_channels(d, seed);
    const RiMi m = compute_ri_mi(r, d);
    CHECK(m.r_mi < rate_upper_bound(r, d).r_up);
    CHECK(m.tau0_star > 0.0);
    CHECK(m.tau0_star < 1.0);
  }
}
