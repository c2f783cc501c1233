#pragma once

#include <vector>

namespace wpsn {

inline constexpr double kLn2 = 0.69314718055994530942;

// Powers p_i = [level - 1/g_i]^+ summing to `total`.
struct Waterfill {
  std::vector<double> powers;
  double level = 0.0;  // +inf when every gain is zero
  int active = 0;
};

// Active-set search: sort gains, grow the active set until the level clears the next inverse gain.
Waterfill waterfill(const std::vector<double>& gains, double total);

// Marginal rate per unit power (in bits) consistent with the level.
// Zero budget gives g_max / ln2, all-zero gains give 0.
double waterfill_dual(const Waterfill& wf, const std::vector<double>& gains);

}  // namespace wpsn
