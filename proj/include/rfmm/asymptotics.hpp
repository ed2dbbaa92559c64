#pragma once

// Short-maturity implied volatility of the mapped swap model,
//   sigma(k, t) ~ sqrt(vbar(t)) (1 + psi k t^{H-1/2}),
// and the lognormal (beta = 1) Hagan SABR formula used as a benchmark.

#include <functional>

#include "rfmm/curve.hpp"
#include "rfmm/fmm.hpp"
#include "rfmm/kernel.hpp"
#include "rfmm/smm.hpp"

namespace rfmm {

// int_0^1 v(t s) ds by 64-point Gauss-Legendre.
double v_bar(const std::function<double(double)>& v_curve, double t);

// kappa / ((2H+1)(H+3/2) v(0)) sum_j rho_0j pi_j sqrt(xi_j(0)).
double psi(const FmmParams& fmm, const DiscountCurve& curve, const SwapDefinition& swap);
// Same coefficient written with the mapped correlation:
// kappa rho / ((2H+1)(H+3/2) sqrt(v(0))).
double psi(const SmmParams& smm);

struct AsymptoticInputs {
  std::function<double(double)> v_curve;
  double psi = 0.0;
  RoughKernel kernel;

  static AsymptoticInputs from_smm(const SmmParams& smm);
};

double asymptotic_iv(const AsymptoticInputs& inputs, double k, double t);

// Hagan et al. lognormal SABR implied vol with beta = 1, initial vol
// `alpha`, vol-of-vol `nu`, correlation `rho`, log-moneyness k = log(K/F).
double hagan_lognormal_iv(double alpha, double nu, double rho, double t, double k);

}  // namespace rfmm
