#pragma once

#include <functional>
#include <vector>

namespace wpsn {

inline constexpr double kGoldenPhi = 0.6180339887498948482;  // (sqrt 5 - 1) / 2

struct GoldenStep {
  double lo = 0.0;
  double hi = 0.0;
  double best = 0.0;  // best objective seen so far, -inf while nothing feasible was probed
};

struct GoldenResult {
  double tau = 0.0;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  std::vector<GoldenStep> steps;  // one entry per bracket reduction
};

// Maximizes a unimodal objective on [lo, hi]. Infeasible points report -inf.
// The returned point is the bracket midpoint once the width is <= kappa.
// Throws AllInfeasible when no probed point (midpoint included) is finite.
GoldenResult golden_section(const std::function<double(double)>& objective, double lo = 0.0,
                            double hi = 1.0, double kappa = 1e-4);

// ceil(log(kappa / width) / log(phi))
int golden_iteration_count(double width, double kappa);

}  // namespace wpsn
