#pragma once

// Common-random-number engine for calibration. The unit-kappa Volterra
// process and both Brownian drivers are simulated once; for a variance curve
// v and an expiry t_m every path then reduces to
//   X_par  = sum_k sqrt(V_k) dW0_k,   X_perp = sum_k sqrt(V_k) dWperp_k,
//   Q      = sum_k V_k dt,
// with V_k = v(t_k) exp(kappa Y_k - kappa^2 Var(Y_k)/2), so that
//   log S_t/S_0 = s (rho X_par + sqrt(1-rho^2) X_perp) - s^2 Q / 2
// for any scale s of sqrt(v) and any rho, at O(paths) cost.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rfmm/kernel.hpp"
#include "rfmm/pricing.hpp"

namespace rfmm {

struct PathFunctionals {
  double t = 0.0;
  double vbar = 0.0;  // time average of the input curve v over [0, t]
  bool antithetic = false;
  std::vector<double> x_par, x_perp, quad, w_par, w_perp;
};

class SmmPathCache {
 public:
  SmmPathCache(double hurst, double horizon, int steps_per_year, std::size_t n_paths, std::uint64_t seed,
               unsigned threads = 1, bool antithetic = false);

  const SimGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }
  double hurst() const { return hurst_; }
  double kappa() const { return kappa_; }

  // Recomputes exp(kappa Y_k / 2 - kappa^2 Var_k / 4) for every path and step.
  void set_kappa(double kappa);

  // sqrt_v[k] = sqrt(v(t_k)) for k < m where t_m = expiry; `vbar` is the
  // continuous average of v used for the control variate volatility.
  PathFunctionals functionals(std::span<const double> sqrt_v, double expiry, double vbar) const;
  PathFunctionals functionals(const std::function<double(double)>& v_curve, double expiry) const;

 private:
  double hurst_;
  SimGrid grid_;
  std::size_t n_paths_;
  unsigned threads_;
  bool antithetic_;
  double kappa_ = -1.0;
  std::vector<double> y_;      // n_paths x steps, unit-kappa Y at left points
  std::vector<double> dw0_;    // n_paths x steps
  std::vector<double> dwp_;    // n_paths x steps
  std::vector<double> root_e_; // n_paths x steps, depends on kappa
  std::vector<double> var_;    // per step
};

// Normalized prices (S_0 = 1) and implied vols at log-moneyness ks for the
// curve scale s (sqrt(v) multiplied by s) and correlation rho.
std::vector<PricingResult> price_functionals(const PathFunctionals& f, double scale, double rho,
                                             std::span<const double> ks, bool control_variate = true);

// Normalized ATM price only.
double atm_price_functionals(const PathFunctionals& f, double scale, double rho, bool control_variate = true);

}  // namespace rfmm
