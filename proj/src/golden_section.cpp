#include "wpsn/golden_section.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "wpsn/errors.hpp"

namespace wpsn {

namespace {

// Interior points of successive brackets coincide up to rounding; reuse those evaluations.
class Memo {
 public:
  explicit Memo(const std::function<double(double)>& f) : f_(f) {}
  double operator()(double t) {
    for (const auto& [x, v] : seen_)
      if (std::abs(x - t) <= 1e-12) return v;
    const double v = f_(t);
    seen_.emplace_back(t, v);
    return v;
  }
  int evaluations() const { return static_cast<int>(seen_.size()); }

 private:
  const std::function<double(double)>& f_;
  std::vector<std::pair<double, double>> seen_;
};

}  // namespace

int golden_iteration_count(double width, double kappa) {
  if (width <= kappa) return 0;
  return static_cast<int>(std::ceil(std::log(kappa / width) / std::log(kGoldenPhi) - 1e-12));
}

GoldenResult golden_section(const std::function<double(double)>& objective, double lo, double hi,
                            double kappa) {
  if (!(hi > lo)) throw DomainError("golden section needs lo < hi");
  if (!(kappa > 0.0)) throw DomainError("golden section needs kappa > 0");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  Memo f(objective);
  GoldenResult res;
  double best = kNegInf;
  double best_t = 0.5 * (lo + hi);
  while (hi - lo > kappa) {
    const double t1 = hi - (hi - lo) * kGoldenPhi;
    const double t2 = lo + (hi - lo) * kGoldenPhi;
    const double f1 = f(t1);
    const double f2 = f(t2);
    if (f1 > best) best = f1, best_t = t1;
    if (f2 > best) best = f2, best_t = t2;
    // ties (both infeasible included) move right: infeasibility only occurs below the minimum duration
    if (f1 > f2)
      hi = t2;
    else
      lo = t1;
    res.steps.push_back({lo, hi, best});
  }
  res.iterations = static_cast<int>(res.steps.size());
  res.tau = 0.5 * (lo + hi);
  res.value = f(res.tau);
  if (!std::isfinite(res.value)) {
    if (!std::isfinite(best)) throw AllInfeasible();
    // midpoint fell into the infeasible prefix of a very narrow feasible interval
    res.tau = best_t;
    res.value = best;
  }
  res.evaluations = f.evaluations();
  return res;
}

}  // namespace wpsn
