#include "wpsn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "wpsn/errors.hpp"

// Deliberately self-contained: eigen-solves, log-dets and projections are redone here with Eigen
// directly so that a defect in the solver path cannot cancel out in the comparison.

namespace wpsn::oracle {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kLog2e = 1.4426950408889634074;  // 1 / ln 2

// Euclidean projection of v onto {x >= 0, sum x = z}.
VectorXd project_simplex(const VectorXd& v, double z) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - z) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

// Projection onto {x >= 0, sum x <= z}.
VectorXd project_capped(const VectorXd& v, double z) {
  VectorXd c = v.cwiseMax(0.0);
  if (c.sum() <= z) return c;
  return project_simplex(v, z);
}

MatrixXcd herm(const MatrixXcd& a) { return 0.5 * (a + a.adjoint()); }

// PSD matrices with trace at most `cap`.
MatrixXcd project_psd_trace(const MatrixXcd& a, double cap) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm(a));
  const VectorXd lam = project_capped(es.eigenvalues(), cap);
  return herm(es.eigenvectors() * lam.cast<std::complex<double>>().asDiagonal() * es.eigenvectors().adjoint());
}

double real_dot(const MatrixXcd& a, const MatrixXcd& b) { return (a.adjoint() * b).trace().real(); }

double lambda_max(const MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// log2 det of a Hermitian positive definite matrix; NaN when the Cholesky factorization fails.
double log2det(const Eigen::LLT<MatrixXcd>& llt) {
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  const MatrixXcd& l = llt.matrixLLT();
  for (Index i = 0; i < l.rows(); ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    s += std::log(d);
  }
  return 2.0 * s * kLog2e;
}

// Scaled variables: W_B = P_B * w (trace w <= 1), energy-form uplink covariance s_k * y_k,
// TDMA slots tau_k = (1 - tau0) * u_k with u on the unit simplex (last entry is the IR slot).
struct Point {
  MatrixXcd w;
  std::vector<MatrixXcd> y;
  VectorXd u;
};

struct Problem {
  Scheme scheme;
  double tau0;
  int k;
  double p_b;
  double sigma2;
  MatrixXcd a0;                // SDMA: I + P_I g g^H / sigma2
  std::vector<MatrixXcd> b;    // G_k sqrt(s_k / ((1 - tau0) sigma2))
  std::vector<MatrixXcd> hbar;  // H_k^H H_k / lambda_max
  std::vector<double> s;        // energy scale per ER
  VectorXcd hhat;
  double c_rate = 0.0;  // required hhat^H w hhat
  double c_r = 0.0;     // IR spectral efficiency
  double u_floor = 1e-12;
  int n_cons() const { return k + 1; }
};

struct Eval {
  double f = 0.0;  // objective in bits
  double l = 0.0;  // augmented Lagrangian
  Point grad;
  std::vector<double> cons;  // c_j(x) <= 0 form: energy per ER, then rate
  bool ok = true;
};

std::vector<double> constraints(const Problem& pr, const Point& x) {
  std::vector<double> c(pr.n_cons());
  for (int k = 0; k < pr.k; ++k) c[k] = x.y[k].trace().real() - real_dot(pr.hbar[k], x.w);
  c[pr.k] = pr.c_rate - (pr.hhat.adjoint() * x.w * pr.hhat)(0, 0).real();
  return c;
}

// Objective and its gradient. Returns ok = false outside the log-det domain.
Eval objective(const Problem& pr, const Point& x, bool want_grad) {
  Eval e;
  const double span = 1.0 - pr.tau0;
  if (want_grad) {
    e.grad.w = MatrixXcd::Zero(x.w.rows(), x.w.cols());
    e.grad.y.resize(pr.k);
  }
  if (pr.scheme == Scheme::Sdma) {
    MatrixXcd a = pr.a0;
    for (int k = 0; k < pr.k; ++k) a += pr.b[k] * x.y[k] * pr.b[k].adjoint();
    Eigen::LLT<MatrixXcd> llt(herm(a));
    const double ld = log2det(llt);
    if (!std::isfinite(ld)) {
      e.ok = false;
      return e;
    }
    e.f = span * ld;
    if (want_grad)
      for (int k = 0; k < pr.k; ++k)
        e.grad.y[k] = herm(span * kLog2e * pr.b[k].adjoint() * llt.solve(pr.b[k]));
    return e;
  }
  if (want_grad) e.grad.u = VectorXd::Zero(pr.k + 1);
  double f = x.u(pr.k) * pr.c_r;
  if (x.u.minCoeff() < 0.0) {
    e.ok = false;
    return e;
  }
  for (int k = 0; k < pr.k; ++k) {
    const double uk = x.u(k);
    const Index n = pr.b[k].rows();
    if (uk <= 0.0) {
      if (want_grad) e.grad.y[k] = MatrixXcd::Zero(x.y[k].rows(), x.y[k].cols());
      continue;
    }
    const MatrixXcd xk = pr.b[k] * x.y[k] * pr.b[k].adjoint() / uk;
    Eigen::LLT<MatrixXcd> llt(herm(MatrixXcd::Identity(n, n) + xk));
    const double ld = log2det(llt);
    if (!std::isfinite(ld)) {
      e.ok = false;
      return e;
    }
    f += uk * ld;
    if (want_grad) {
      e.grad.y[k] = herm(kLog2e * pr.b[k].adjoint() * llt.solve(pr.b[k]));
      e.grad.u(k) = ld - kLog2e * llt.solve(xk).trace().real();
    }
  }
  if (want_grad) {
    e.grad.u(pr.k) = pr.c_r;
    e.grad.u *= span;
    for (auto& g : e.grad.y) g *= span;
  }
  e.f = span * f;
  return e;
}

// Augmented Lagrangian value and gradient for maximization.
Eval lagrangian(const Problem& pr, const Point& x, const std::vector<double>& nu, double rho) {
  Eval e = objective(pr, x, true);
  if (!e.ok) return e;
  e.cons = constraints(pr, x);
  e.l = e.f;
  for (int j = 0; j < pr.n_cons(); ++j) {
    const double m = std::max(0.0, e.cons[j] + nu[j] / rho);
    e.l -= 0.5 * rho * m * m - nu[j] * nu[j] / (2.0 * rho);
    if (m == 0.0) continue;
    if (j < pr.k) {
      e.grad.y[j] -= rho * m * MatrixXcd::Identity(x.y[j].rows(), x.y[j].cols());
      e.grad.w += rho * m * pr.hbar[j];
    } else {
      e.grad.w += rho * m * pr.hhat * pr.hhat.adjoint();
    }
  }
  return e;
}

Point axpy(const Point& x, double t, const Point& d) {
  Point r = x;
  r.w += t * d.w;
  for (std::size_t k = 0; k < r.y.size(); ++k) r.y[k] += t * d.y[k];
  if (r.u.size()) r.u += t * d.u;
  return r;
}

Point diff(const Point& a, const Point& b) { return axpy(a, -1.0, b); }

double dot(const Point& a, const Point& b) {
  double s = real_dot(a.w, b.w);
  for (std::size_t k = 0; k < a.y.size(); ++k) s += real_dot(a.y[k], b.y[k]);
  if (a.u.size()) s += a.u.dot(b.u);
  return s;
}

double norm(const Point& a) { return std::sqrt(std::max(0.0, dot(a, a))); }

Point project(const Problem& pr, const Point& x) {
  Point r;
  r.w = project_psd_trace(x.w, 1.0);
  r.y.resize(pr.k);
  for (int k = 0; k < pr.k; ++k)
    r.y[k] = pr.s[k] > 0.0 ? project_psd_trace(x.y[k], 1.0) : MatrixXcd::Zero(x.y[k].rows(), x.y[k].cols());
  if (x.u.size()) {
    const double n = static_cast<double>(x.u.size());
    r.u = (project_simplex(x.u.array() - pr.u_floor, 1.0 - n * pr.u_floor).array() + pr.u_floor).matrix();
  }
  return r;
}

struct InnerResult {
  Point x;
  double grad_map = 0.0;
  int iterations = 0;
  bool stalled = false;
};

// FISTA with backtracking and function-value restart on the augmented Lagrangian.
// Stops at gradient-map norm <= tol, when the budget runs out, or when rounding stalls the line search.
InnerResult maximize(const Problem& pr, Point x, const std::vector<double>& nu, double rho, double tol, int budget,
                     double& step) {
  InnerResult out;
  Point y = x;
  Point x_prev = x;
  double theta = 1.0;
  double lx = lagrangian(pr, x, nu, rho).l;
  bool at_x = true;  // y coincides with x (no momentum)
  int idle = 0;       // iterations without a meaningful increase
  double l_window = lx;
  for (int it = 0; it < budget; ++it) {
    Eval ey = lagrangian(pr, y, nu, rho);
    if (!ey.ok) {
      y = x;
      theta = 1.0;
      at_x = true;
      ey = lagrangian(pr, y, nu, rho);
    }
    const double noise = 1e-10 * std::max(1.0, std::abs(ey.l));
    double t = step * 1.5;
    Point xn;
    Eval en;
    bool found = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = project(pr, axpy(y, t, ey.grad));
      en = lagrangian(pr, xn, nu, rho);
      const Point d = diff(xn, y);
      if (en.ok && en.l >= ey.l + dot(ey.grad, d) - dot(d, d) / (2.0 * t) - noise) {
        found = true;
        break;
      }
      t *= 0.5;
    }
    ++out.iterations;
    if (!found) {
      if (at_x) {
        out.stalled = true;
        break;
      }
      y = x;
      theta = 1.0;
      at_x = true;
      continue;
    }
    step = t;
    const double gm = norm(diff(xn, y)) / t;
    if (en.l < lx - noise) {
      if (at_x) {
        out.stalled = true;
        break;
      }
      // objective went down: drop momentum and retry from the last iterate
      y = x;
      theta = 1.0;
      at_x = true;
      continue;
    }
    // gradient restart: momentum no longer points uphill
    const bool restart = dot(ey.grad, diff(xn, x)) < 0.0;
    if (en.l > lx + 1e-13 * std::max(1.0, std::abs(lx)))
      idle = 0;
    else if (++idle > 300) {
      out.stalled = true;
      x = xn;
      break;
    }
    // slow drift: under 1e-11 relative gain over a window of 500 steps
    if (it > 0 && it % 500 == 0) {
      if (en.l - l_window <= 1e-11 * std::max(1.0, std::abs(en.l))) {
        out.stalled = true;
        x = xn;
        break;
      }
      l_window = std::max(lx, en.l);
    }
    const double theta_n = restart ? 1.0 : 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    x_prev = x;
    x = xn;
    lx = std::max(lx, en.l);
    y = restart ? x : axpy(x, (theta - 1.0) / theta_n, diff(x, x_prev));
    at_x = restart;
    theta = theta_n;
    if (gm <= tol) break;
  }
  const Eval e = lagrangian(pr, x, nu, rho);
  out.grad_map = norm(diff(project(pr, axpy(x, step, e.grad)), x)) / step;
  out.x = std::move(x);
  return out;
}

double violation(const std::vector<double>& c) {
  double v = 0.0;
  for (double ci : c) v = std::max(v, ci);
  return v;
}

}  // namespace

HermitianMatrix project_psd(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a.matrix());
  const VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return HermitianMatrix(herm(es.eigenvectors() * lam.cast<std::complex<double>>().asDiagonal() *
                              es.eigenvectors().adjoint()));
}

constexpr double kMaxPenalty = 1e4;

OracleSolution oracle_solve(Scheme scheme, double tau0, double r_i, const ChannelSet& ch, const SystemConfig& config,
                            const OracleOptions& opts) {
  config.validate();
  if (!(tau0 > 0.0 && tau0 < 1.0)) throw DomainError("oracle needs tau0 in (0, 1)");
  if (!(r_i >= 0.0)) throw DomainError("rate threshold must be nonnegative");
  const double h2 = ch.h_ir.squaredNorm();
  if (!(h2 > 0.0)) throw ZeroIrChannel();
  const double r_up = std::log2(1.0 + config.p_b * h2 / config.sigma2);
  if (r_i > r_up * (1.0 + 1e-12)) throw Infeasible(r_i, r_up);
  if (r_i > tau0 * r_up * (1.0 + 1e-12)) throw InfeasibleAtTau(tau0, r_i, tau0 * r_up);

  const int kk = config.k;
  const Index nb = config.n_b;
  const Index nu_ = config.n_u;
  Problem pr{scheme, tau0, kk, config.p_b, config.sigma2, {}, {}, {}, {}, {}, 0.0, 0.0, 1e-12};
  const double span = 1.0 - tau0;
  pr.a0 = MatrixXcd::Identity(nb, nb) + (config.p_i / config.sigma2) * ch.g_ir * ch.g_ir.adjoint();
  pr.c_r = std::log2(1.0 + config.p_i * ch.g_ir.squaredNorm() / config.sigma2);
  pr.hhat = ch.h_ir / std::sqrt(h2);
  pr.c_rate = std::min(1.0, config.sigma2 * std::expm1(std::log(2.0) * r_i / tau0) / (config.p_b * h2));
  for (int k = 0; k < kk; ++k) {
    const MatrixXcd hh = ch.h_dl[k].adjoint() * ch.h_dl[k];
    const double lm = lambda_max(hh);
    pr.hbar.push_back(lm > 0.0 ? MatrixXcd(hh / lm) : MatrixXcd::Zero(nb, nb));
    const double s = lm > 0.0 ? tau0 * config.p_b * config.eps[k] * lm : 0.0;
    pr.s.push_back(s);
    pr.b.push_back(ch.g_ul[k] * std::sqrt(s / (span * config.sigma2)));
  }

  Point x;
  x.w = MatrixXcd::Identity(nb, nb) / static_cast<double>(nb);
  x.y.assign(kk, MatrixXcd::Zero(nu_, nu_));
  if (scheme == Scheme::Tdma) x.u = VectorXd::Constant(kk + 1, 1.0 / (kk + 1));
  x = project(pr, x);

  std::vector<double> nu(pr.n_cons(), 0.0);
  double rho = opts.penalty;
  double step = 1e-6;
  int used = 0;
  int rounds = 0;
  double last_violation = std::numeric_limits<double>::infinity();
  double gm = std::numeric_limits<double>::infinity();
  double viol = 0.0;
  int stalls = 0;
  bool stalled = false;
  while (used < opts.max_iterations) {
    ++rounds;
    const double tol = std::max(opts.gradient_tol, std::min(1e-3, 0.1 * last_violation));
    step = std::max(step, 0.1 / rho);
    InnerResult in = maximize(pr, x, nu, rho, tol, opts.max_iterations - used, step);
    used += in.iterations;
    x = std::move(in.x);
    gm = in.grad_map;
    const std::vector<double> c = constraints(pr, x);
    viol = violation(c);
    for (int j = 0; j < pr.n_cons(); ++j) nu[j] = std::max(0.0, nu[j] + rho * c[j]);
    stalled = in.stalled;
    if (viol <= opts.feasibility_tol && (gm <= opts.gradient_tol || stalled)) break;
    // rounding-limited: further rounds cannot move the iterate
    const bool slow = viol > 0.25 * last_violation && viol > 10.0 * opts.feasibility_tol;
    stalls = in.stalled && viol >= 0.5 * last_violation && (!slow || rho >= kMaxPenalty) ? stalls + 1 : 0;
    if (stalls >= 3) break;
    if (slow && rho < kMaxPenalty) rho *= 10.0;
    last_violation = viol;
  }

  // feasibility restoration: move toward the matched filter for the rate, then shrink uplink energy
  Point r = x;
  const double got = (pr.hhat.adjoint() * r.w * pr.hhat)(0, 0).real();
  if (got < pr.c_rate) {
    const double th = std::min(1.0, (pr.c_rate - got) / std::max(1.0 - got, 1e-300) * (1.0 + 1e-12));
    r.w = (1.0 - th) * r.w + th * pr.hhat * pr.hhat.adjoint();
  }
  for (int k = 0; k < kk; ++k) {
    const double budget = std::max(0.0, real_dot(pr.hbar[k], r.w));
    const double tr = r.y[k].trace().real();
    if (tr > budget) r.y[k] *= tr > 0.0 ? budget / tr : 0.0;
  }

  OracleSolution out;
  out.objective = objective(pr, r, false).f;
  out.w_b = HermitianMatrix(config.p_b * r.w);
  out.iterations = used;
  out.rounds = rounds;
  out.gradient_norm = gm;
  out.violation = viol;
  // a stalled inner solve sits at the rounding floor of the objective, which counts as stationary
  out.converged = viol <= opts.feasibility_tol && (gm <= opts.gradient_tol || stalled);
  out.tau.tau0 = tau0;
  for (int k = 0; k < kk; ++k) {
    const MatrixXcd energy = pr.s[k] * r.y[k];
    double slot = span;
    if (scheme == Scheme::Tdma) {
      slot = span * r.u(k);
      out.tau.tau_e.push_back(slot);
    }
    out.p_set.emplace_back(slot > 0.0 ? MatrixXcd(energy / slot) : MatrixXcd::Zero(nu_, nu_));
  }
  if (scheme == Scheme::Tdma) out.tau.tau_ir = span * r.u(kk);
  if (!out.converged && (viol > 1e-4 || (gm > 1e-3 && !stalled))) throw NotConverged("oracle projected-gradient ascent", gm);
  return out;
}

// ---------------------------------------------------------------------------------------------
// KKT audit

namespace {

double min_eigenvalue(const MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct Common {
  MatrixXcd w_energy;  // tau0 W_B
  std::vector<double> q;
};

// Conditions shared by both schemes: power budget, rate threshold, rank, and beamformer stationarity.
Common audit_downlink(KktReport& rep, const HermitianMatrix& w_b, double tau0, double r_i, const DualVariables& d,
                      const ChannelSet& ch, const SystemConfig& config) {
  Common c;
  const MatrixXcd& w = w_b.matrix();
  const double pb = config.p_b;
  c.w_energy = tau0 * w;
  const double tr = w.trace().real();
  rep.primal.push_back({"power", std::max(0.0, tr - pb), pb});
  rep.primal.push_back({"w_psd", std::max(0.0, -min_eigenvalue(w)), pb});
  const double hwh = (ch.h_ir.adjoint() * w * ch.h_ir)(0, 0).real();
  const double rate = tau0 * std::log2(1.0 + std::max(0.0, hwh) / config.sigma2);
  rep.primal.push_back({"rate", std::max(0.0, r_i - rate), std::max(r_i, 1.0)});

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm(w));
  const VectorXd ev = es.eigenvalues();
  const double top = ev(ev.size() - 1);
  rep.rank_gap = (ev.size() > 1 && top > 0.0) ? std::max(0.0, ev(ev.size() - 2)) / top : 0.0;

  for (int k = 0; k < config.k; ++k)
    c.q.push_back(config.eps[k] * (ch.h_dl[k] * c.w_energy * ch.h_dl[k].adjoint()).trace().real());

  const double lambda = d.lambda;
  rep.slackness.push_back({"power", lambda * std::abs(tr - pb), std::max(lambda * pb, 1e-300)});
  if (d.beta_infinite()) {
    // threshold at the ceiling: W_B must be the matched filter
    const MatrixXcd wup = pb / ch.h_ir.squaredNorm() * ch.h_ir * ch.h_ir.adjoint();
    rep.stationarity.push_back({"w_matched_filter", (w - wup).norm(), pb});
    return c;
  }
  const double need = tau0 * config.sigma2 * std::expm1(std::log(2.0) * r_i / tau0);
  rep.slackness.push_back({"rate", d.beta * std::abs(tau0 * hwh - need),
                           std::max(d.beta * std::max(need, tau0 * hwh), 1e-300)});

  MatrixXcd hm = d.beta * ch.h_ir * ch.h_ir.adjoint();
  for (int k = 0; k < config.k; ++k) hm += d.mu[k] * config.eps[k] * ch.h_dl[k].adjoint() * ch.h_dl[k];
  const MatrixXcd z = lambda * MatrixXcd::Identity(w.rows(), w.cols()) - herm(hm);
  const double zscale = std::max(lambda, lambda_max(hm));
  rep.stationarity.push_back({"w_dual_psd", std::max(0.0, -min_eigenvalue(z)), std::max(zscale, 1e-300)});
  rep.stationarity.push_back({"w_complementarity", (z * w).norm(), std::max(zscale * pb, 1e-300)});
  return c;
}

void audit_uplink(KktReport& rep, int k, double mu, const MatrixXcd& grad, const MatrixXcd& p_energy, double q,
                  double used) {
  const std::string tag = "er" + std::to_string(k);
  rep.primal.push_back({"energy_" + tag, std::max(0.0, used - q), std::max(q, 1e-300)});
  rep.primal.push_back({"p_psd_" + tag, std::max(0.0, -min_eigenvalue(p_energy)), std::max(used, 1e-300)});
  rep.slackness.push_back({"energy_" + tag, mu * std::abs(q - used), std::max(mu * q, 1e-300)});
  const MatrixXcd z = mu * MatrixXcd::Identity(grad.rows(), grad.cols()) - grad;
  const double scale = std::max(mu, lambda_max(grad));
  rep.stationarity.push_back({"p_dual_psd_" + tag, std::max(0.0, -min_eigenvalue(z)), std::max(scale, 1e-300)});
  rep.stationarity.push_back(
      {"p_complementarity_" + tag, (z * p_energy).norm(), std::max(scale * std::max(used, 1e-300), 1e-300)});
}

}  // namespace

double KktReport::worst() const {
  double w = 0.0;
  for (const auto* g : {&primal, &slackness, &stationarity})
    for (const auto& e : *g) w = std::max(w, e.relative());
  return w;
}

std::string KktReport::worst_name() const {
  double w = -1.0;
  std::string n;
  for (const auto* g : {&primal, &slackness, &stationarity})
    for (const auto& e : *g)
      if (e.relative() > w) w = e.relative(), n = e.name;
  return n;
}

bool KktReport::pass(double tol, double rank_tol) const {
  for (const auto* g : {&primal, &slackness, &stationarity})
    for (const auto& e : *g)
      if (!std::isfinite(e.value) || e.relative() > tol) return false;
  return rank_gap <= rank_tol;
}

KktReport kkt_audit(const SdmaSolution& s, const ChannelSet& ch, const SystemConfig& config) {
  KktReport rep;
  const double tau0 = s.tau0;
  const Common c = audit_downlink(rep, s.w_b, tau0, s.r_i, s.duals, ch, config);
  const double span = 1.0 - tau0;
  if (span <= 0.0) return rep;
  const Index n = ch.g_ir.size();
  MatrixXcd a = MatrixXcd::Identity(n, n) + (config.p_i / config.sigma2) * ch.g_ir * ch.g_ir.adjoint();
  for (int k = 0; k < config.k; ++k) a += ch.g_ul[k] * s.p_set[k].matrix() * ch.g_ul[k].adjoint() / config.sigma2;
  Eigen::LLT<MatrixXcd> llt(herm(a));
  for (int k = 0; k < config.k; ++k) {
    const MatrixXcd grad = herm(kLog2e / config.sigma2 * ch.g_ul[k].adjoint() * llt.solve(ch.g_ul[k]));
    const MatrixXcd pe = span * s.p_set[k].matrix();
    audit_uplink(rep, k, s.duals.mu[k], grad, pe, c.q[k], pe.trace().real());
  }
  return rep;
}

KktReport kkt_audit(const TdmaSolution& s, const ChannelSet& ch, const SystemConfig& config) {
  KktReport rep;
  const double tau0 = s.tau.tau0;
  const Common c = audit_downlink(rep, s.w_b, tau0, s.r_i, s.duals, ch, config);
  const double c_r = std::log2(1.0 + config.p_i * ch.g_ir.squaredNorm() / config.sigma2);
  const double gamma = s.duals.gamma;
  double total = tau0 + s.tau.tau_ir;
  for (int k = 0; k < config.k; ++k) {
    const double tk = s.tau.tau_e[k];
    total += tk;
    rep.primal.push_back({"slot_er" + std::to_string(k), std::max(0.0, -tk), 1.0});
    const Index n = ch.g_ul[k].rows();
    const MatrixXcd x = ch.g_ul[k] * s.p_set[k].matrix() * ch.g_ul[k].adjoint() / config.sigma2;
    Eigen::LLT<MatrixXcd> llt(herm(MatrixXcd::Identity(n, n) + x));
    const MatrixXcd grad = herm(kLog2e / config.sigma2 * ch.g_ul[k].adjoint() * llt.solve(ch.g_ul[k]));
    const MatrixXcd pe = tk * s.p_set[k].matrix();
    audit_uplink(rep, k, s.duals.mu[k], grad, pe, c.q[k], pe.trace().real());
    if (tk > 0.0) {
      // marginal rate of the slot: log det(A) - tr(A^-1 X) / ln 2
      const double gt = log2det(llt) - kLog2e * llt.solve(x).trace().real();
      rep.stationarity.push_back({"slot_level_er" + std::to_string(k), std::abs(gt - gamma), std::max(gamma, 1.0)});
    }
  }
  rep.primal.push_back({"time_simplex", std::abs(total - 1.0), 1.0});
  rep.primal.push_back({"slot_ir", std::max(0.0, -s.tau.tau_ir), 1.0});
  rep.stationarity.push_back({"gamma_floor", std::max(0.0, c_r - gamma), std::max(c_r, 1.0)});
  rep.slackness.push_back({"ir_slot", s.tau.tau_ir * std::abs(gamma - c_r), std::max(gamma, 1.0)});
  return rep;
}

}  // namespace wpsn::oracle
