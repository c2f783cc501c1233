#include "wpsn/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wpsn {

Waterfill waterfill(const std::vector<double>& gains, double total) {
  Waterfill wf;
  const std::size_t n = gains.size();
  wf.powers.assign(n, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return gains[a] > gains[b]; });
  std::size_t usable = 0;
  while (usable < n && gains[order[usable]] > 0.0) ++usable;
  if (usable == 0) {
    wf.level = std::numeric_limits<double>::infinity();
    return wf;
  }
  if (!(total > 0.0)) {
    wf.level = 1.0 / gains[order[0]];
    return wf;
  }
  double inv_sum = 0.0;
  std::size_t m = 0;
  double level = 0.0;
  for (std::size_t i = 0; i < usable; ++i) {
    const double inv = 1.0 / gains[order[i]];
    const double trial = (total + inv_sum + inv) / static_cast<double>(i + 1);
    if (i > 0 && trial <= inv) break;
    inv_sum += inv;
    m = i + 1;
    level = trial;
  }
  wf.level = level;
  wf.active = static_cast<int>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = order[i];
    wf.powers[j] = std::max(0.0, level - 1.0 / gains[j]);
  }
  return wf;
}

double waterfill_dual(const Waterfill& wf, const std::vector<double>& gains) {
  if (std::isinf(wf.level)) return 0.0;
  if (wf.active == 0) {
    double g = 0.0;
    for (double x : gains) g = std::max(g, x);
    return g / kLn2;
  }
  return 1.0 / (kLn2 * wf.level);
}

}  // namespace wpsn
