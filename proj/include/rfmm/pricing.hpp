#pragma once

// Black prices in normalized form (forward = 1, strike = e^k), implied
// volatility inversion and Monte Carlo swaption pricers for both models.

#include <cstddef>
#include <span>
#include <vector>

#include "rfmm/curve.hpp"
#include "rfmm/fmm.hpp"
#include "rfmm/kernel.hpp"
#include "rfmm/mc.hpp"
#include "rfmm/smm.hpp"

namespace rfmm {

enum class OptionSide { put, call, out_of_the_money };

double norm_cdf(double x);
double norm_pdf(double x);

// e^k Phi(-d_-) - Phi(-d_+), d_pm = -k/v pm v/2, with v = sigma sqrt(t).
double black_put(double k, double v);
double black_call(double k, double v);
double black_price(double k, double v, OptionSide side);
// d price / d sigma for unit maturity scaling: sqrt(t) phi(d_+).
double black_vega(double k, double sigma, double t);

// Annualized volatility sigma with black_price(k, sigma sqrt(t), side) =
// price. Throws ArbitrageError when the price is outside the no-arbitrage
// band or too small to be represented away from it in double precision.
double implied_vol(double price, double k, double t, OptionSide side = OptionSide::put);

struct PricingResult {
  double price = 0.0;
  double std_error = 0.0;
  double implied_vol = 0.0;     // NaN when the price admits no implied vol
  double iv_std_error = 0.0;    // delta method through the Black vega
};

// Price of the given side from simulated paths; strike e^k in units of S_0.
// The control is the Black-Scholes path driven by the same W* at volatility
// sqrt(vbar(t)), priced analytically.
PricingResult price_smm_paths(const SmmPaths& paths, const SmmParams& params, double k, double t,
                              OptionSide side = OptionSide::out_of_the_money, bool control_variate = true,
                              bool regression_beta = false);

PricingResult mc_price_swaption_smm(const SmmParams& params, double k, double t, const SimGrid& grid,
                                    const McConfig& mc, OptionSide side = OptionSide::out_of_the_money);

// One simulation, many strikes.
std::vector<PricingResult> mc_price_smile_smm(const SmmParams& params, std::span<const double> ks, double t,
                                              const SimGrid& grid, const McConfig& mc,
                                              OptionSide side = OptionSide::out_of_the_money);

// Swaption value P_0(T_N) E^{T_N}[payoff(S_t, K) A_t / P_t(T_N)] from
// terminal-measure paths. `price` is in currency units per unit notional;
// the implied vol is that of price / (A_0 S_0) at k = log(K/S_0). The
// control is the forward-swap payoff (S_t - K) A_t / P_t(T_N), whose
// expectation is known, with a regression coefficient.
PricingResult mc_price_swaption_fmm(const FmmPaths& paths, const DiscountCurve& curve, const SwapDefinition& swap,
                                    double strike, double t, OptionSide side = OptionSide::out_of_the_money,
                                    bool control_variate = true);

}  // namespace rfmm
