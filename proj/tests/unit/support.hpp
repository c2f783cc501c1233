#pragma once

#include <cstdint>

#include "wpsn/network_model.hpp"

namespace wpsn::testing {

// Desk-scale geometry used by the oracle comparisons.
inline SystemConfig small_config() {
  SystemConfig c;
  c.n_b = 4;
  c.n_u = 2;
  c.k = 2;
  c.eps = {1.0, 1.0};
  return c;
}

// One ER, one antenna everywhere, unit noise: every quantity has a closed form.
struct ScalarInstance {
  SystemConfig config;
  ChannelSet ch;
};

inline ScalarInstance scalar_instance(double h_dl = 0.8, double h_ir = 0.6, double g_ul = 0.9, double g_ir = 0.5) {
  ScalarInstance s;
  s.config.n_b = 1;
  s.config.n_u = 1;
  s.config.k = 1;
  s.config.eps = {1.0};
  s.config.p_b = 1.0;
  s.config.p_i = 1.0;
  s.config.sigma2 = 1.0;
  s.ch.h_dl = {CMatrix::Constant(1, 1, h_dl)};
  s.ch.h_ir = CVector::Constant(1, h_ir);
  s.ch.g_ul = {CMatrix::Constant(1, 1, g_ul)};
  s.ch.g_ir = CVector::Constant(1, g_ir);
  s.ch.distances = {1.0, 1.0};
  return s;
}

}  // namespace wpsn::testing
