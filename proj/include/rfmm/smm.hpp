#pragma once

// Mapped rough Bergomi forward swap model under the annuity measure:
//   dS/S = sqrt(V) dW*,  V_t = v(t) exp(Y_t - Var(Y_t)/2),
//   W* = rho W^0 + sqrt(1 - rho^2) W^perp,
// and the map from forward-market-model parameters to (v, rho).

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rfmm/curve.hpp"
#include "rfmm/fmm.hpp"
#include "rfmm/kernel.hpp"
#include "rfmm/mc.hpp"

namespace rfmm {

struct SmmParams {
  double s0 = 0.0;
  RoughKernel kernel;
  std::function<double(double)> v_curve;
  double rho = 0.0;

  void validate() const;
  double v(double t) const { return v_curve(t); }
};

// pi_j = Pi^j_0 eta(R^j_0) / S_0 for j = I+1..J (element j-I-1).
std::vector<double> mapping_weights(const FmmParams& fmm, const DiscountCurve& curve, const SwapDefinition& swap);

// v(t) = sum_{i,j} rho_ij pi_i pi_j sqrt(xi_i(t) xi_j(t)) and
// rho = sum_j rho_0j pi_j sqrt(xi_j(0)) / sqrt(v(0)). The returned v_curve
// evaluates the xi_j directly (it owns a copy of the parameters). The
// weights come from `curve`, the xi_j from the rates stored in `fmm`.
// The short-maturity equivalence is only proven for H < 1/2; H = 1/2 is
// accepted as the lognormal SABR analogue.
SmmParams map_fmm_to_smm(const FmmParams& fmm, const DiscountCurve& curve, const SwapDefinition& swap);

// Simulated log(S_t/S_0) and W*_t at the observation times, stored
// [path][observation]. The draws per step are ordered (z_0, z_aux, z_perp).
struct SmmPaths {
  std::size_t n_paths = 0;
  bool antithetic = false;
  std::vector<double> times;
  std::vector<double> log_s;
  std::vector<double> w_star;

  std::size_t observation_index(double t) const;
  double log_ratio(std::size_t path, std::size_t obs) const { return log_s[path * times.size() + obs]; }
  double driver(std::size_t path, std::size_t obs) const { return w_star[path * times.size() + obs]; }
};

SmmPaths simulate_smm(const SmmParams& params, const SimGrid& grid, const McConfig& mc,
                      std::span<const double> observation_times = {});

}  // namespace rfmm
