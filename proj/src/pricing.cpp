#include "rfmm/pricing.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>

#include "rfmm/asymptotics.hpp"
#include "rfmm/errors.hpp"

namespace rfmm {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) { return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2); }

double black_put(double k, double v) {
  const double ek = std::exp(k);
  if (!(v > 0.0)) return std::max(ek - 1.0, 0.0);
  const double dp = -k / v + 0.5 * v;
  const double dm = dp - v;
  return ek * norm_cdf(-dm) - norm_cdf(-dp);
}

double black_call(double k, double v) {
  const double ek = std::exp(k);
  if (!(v > 0.0)) return std::max(1.0 - ek, 0.0);
  const double dp = -k / v + 0.5 * v;
  const double dm = dp - v;
  return norm_cdf(dp) - ek * norm_cdf(dm);
}

namespace {

OptionSide resolve_side(OptionSide side, double k) {
  if (side != OptionSide::out_of_the_money) return side;
  return k > 0.0 ? OptionSide::call : OptionSide::put;
}

}  // namespace

double black_price(double k, double v, OptionSide side) {
  return resolve_side(side, k) == OptionSide::call ? black_call(k, v) : black_put(k, v);
}

double black_vega(double k, double sigma, double t) {
  const double v = sigma * std::sqrt(t);
  if (!(v > 0.0)) return 0.0;
  return std::sqrt(t) * norm_pdf(-k / v + 0.5 * v);
}

double implied_vol(double price, double k, double t, OptionSide side) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InputError("implied_vol: maturity must be positive");
  if (!std::isfinite(price) || !std::isfinite(k)) throw InputError("implied_vol: non-finite input");
  const double ek = std::exp(k);
  const OptionSide otm_side = k > 0.0 ? OptionSide::call : OptionSide::put;

  // Move to the out-of-the-money side through parity C - P = 1 - e^k.
  double lower = 0.0, upper = 0.0, otm = price;
  switch (side) {
    case OptionSide::put:
      lower = std::max(ek - 1.0, 0.0);
      upper = ek;
      if (k > 0.0) otm = price - (ek - 1.0);
      break;
    case OptionSide::call:
      lower = std::max(1.0 - ek, 0.0);
      upper = 1.0;
      if (k <= 0.0) otm = price - (1.0 - ek);
      break;
    case OptionSide::out_of_the_money:
      lower = 0.0;
      upper = k > 0.0 ? 1.0 : ek;
      break;
  }
  if (!(price > lower) || !(price < upper)) throw ArbitrageError("implied_vol: price outside the no-arbitrage band");
  if (!(otm >= DBL_MIN)) throw ArbitrageError("implied_vol: time value too small to invert in double precision");
  if (otm >= (k > 0.0 ? 1.0 : ek)) throw ArbitrageError("implied_vol: price at the upper arbitrage bound");

  const double sqrt_t = std::sqrt(t);
  const double log_target = std::log(otm);
  auto f = [&](double s) {
    const double p = black_price(k, s * sqrt_t, otm_side);
    return p > 0.0 ? std::log(p) - log_target : -std::numeric_limits<double>::infinity();
  };

  double lo = 1e-8, hi = 5.0;
  double f_hi = f(hi);
  while (f_hi < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) throw NumericalError("implied_vol: could not bracket the volatility");
    f_hi = f(hi);
  }
  double f_lo = f(lo);
  if (f_lo > 0.0) throw ArbitrageError("implied_vol: price below the minimum volatility");
  // Black underflows at tiny sigma; shrink the bracket until f(lo) is finite.
  while (!std::isfinite(f_lo)) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid > 0.0) {
      hi = mid;
      f_hi = f_mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
    if (hi - lo < 1e-15 * hi) break;
  }
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;

  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                        boost::math::tools::eps_tolerance<double>(50), max_iter);
  double s = 0.5 * (a + b);
  for (int i = 0; i < 2; ++i) {
    const double p = black_price(k, s * sqrt_t, otm_side);
    const double vega = black_vega(k, s, t);
    if (!(p > 0.0) || !(vega > 0.0)) break;
    const double step = (std::log(p) - log_target) * p / vega;
    const double next = s - step;
    if (!std::isfinite(next) || next <= 0.0 || std::abs(f(next)) > std::abs(f(s))) break;
    s = next;
  }
  return s;
}

namespace {

PricingResult finish(double mean, double se, double normalized_scale, double k, double t, OptionSide side) {
  PricingResult r;
  r.price = mean;
  r.std_error = se;
  try {
    r.implied_vol = implied_vol(mean / normalized_scale, k, t, side);
    const double vega = black_vega(k, r.implied_vol, t);
    r.iv_std_error = vega > 0.0 ? se / normalized_scale / vega : std::numeric_limits<double>::infinity();
  } catch (const ArbitrageError&) {
    r.implied_vol = std::numeric_limits<double>::quiet_NaN();
    r.iv_std_error = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

// In-sample regression coefficient Cov(y, c) / Var(c).
double regression_coefficient(std::span<const double> y, std::span<const double> c) {
  const double my = pairwise_sum(y) / static_cast<double>(y.size());
  const double mc = pairwise_sum(c) / static_cast<double>(c.size());
  std::vector<double> cov(y.size()), var(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    cov[i] = (y[i] - my) * (c[i] - mc);
    var[i] = (c[i] - mc) * (c[i] - mc);
  }
  const double v = pairwise_sum(var);
  return v > 0.0 ? pairwise_sum(cov) / v : 0.0;
}

}  // namespace

PricingResult price_smm_paths(const SmmPaths& paths, const SmmParams& params, double k, double t, OptionSide side,
                              bool control_variate, bool regression_beta) {
  const std::size_t o = paths.observation_index(t);
  const OptionSide eff = resolve_side(side, k);
  const double ek = std::exp(k);
  const double sigma = std::sqrt(v_bar(params.v_curve, t));
  const double cv_mean = black_price(k, sigma * std::sqrt(t), eff);
  const std::size_t n = paths.n_paths;
  std::vector<double> pay(n), ctl(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double s = std::exp(paths.log_ratio(p, o));
    const double sb = std::exp(sigma * paths.driver(p, o) - 0.5 * sigma * sigma * t);
    pay[p] = eff == OptionSide::call ? std::max(s - ek, 0.0) : std::max(ek - s, 0.0);
    ctl[p] = (eff == OptionSide::call ? std::max(sb - ek, 0.0) : std::max(ek - sb, 0.0)) - cv_mean;
  }
  if (control_variate) {
    const double beta = regression_beta ? regression_coefficient(pay, ctl) : 1.0;
    for (std::size_t p = 0; p < n; ++p) pay[p] -= beta * ctl[p];
  }
  const auto st = sample_stats(pay, paths.antithetic);
  return finish(st.mean, st.std_error, 1.0, k, t, eff);
}

PricingResult mc_price_swaption_smm(const SmmParams& params, double k, double t, const SimGrid& grid,
                                    const McConfig& mc, OptionSide side) {
  const double obs[] = {t};
  const auto paths = simulate_smm(params, grid, mc, obs);
  return price_smm_paths(paths, params, k, t, side, mc.control_variate, mc.regression_beta);
}

std::vector<PricingResult> mc_price_smile_smm(const SmmParams& params, std::span<const double> ks, double t,
                                              const SimGrid& grid, const McConfig& mc, OptionSide side) {
  const double obs[] = {t};
  const auto paths = simulate_smm(params, grid, mc, obs);
  std::vector<PricingResult> out;
  out.reserve(ks.size());
  for (double k : ks) out.push_back(price_smm_paths(paths, params, k, t, side, mc.control_variate, mc.regression_beta));
  return out;
}

PricingResult mc_price_swaption_fmm(const FmmPaths& paths, const DiscountCurve& curve, const SwapDefinition& swap,
                                    double strike, double t, OptionSide side, bool control_variate) {
  const std::size_t n = curve.size();
  swap.validate(n);
  if (paths.n_tenors != n) throw InputError("mc_price_swaption_fmm: swap indices outside the simulated tenors");
  const auto& tenor = curve.tenor();
  if (t > tenor.date(swap.start) + 1e-12) throw InputError("mc_price_swaption_fmm: expiry must not exceed T_I");
  const std::size_t o = paths.observation_index(t);

  const double a0 = annuity(curve, swap);
  const double s0 = forward_swap_rate(curve, swap);
  const double pn = curve.discount(n);
  if (!(strike > 0.0)) throw InputError("mc_price_swaption_fmm: strike must be positive");
  const double k = std::log(strike / s0);
  const OptionSide eff = resolve_side(side, k);

  std::vector<double> pay(paths.n_paths), ctl(paths.n_paths);
  std::vector<double> x(n + 2);
  for (std::size_t p = 0; p < paths.n_paths; ++p) {
    // x[m] = P_t(T_{m-1}) / P_t(T_N) for m = 1..N+1, indices shifted by one.
    x[n + 1] = 1.0;
    for (std::size_t j = n; j >= 1; --j) x[j] = x[j + 1] * (1.0 + tenor.theta(j) * paths.rate(p, o, j));
    double ann = 0.0;
    for (std::size_t j = swap.start + 1; j <= swap.end; ++j) ann += tenor.theta(j) * x[j + 1];
    const double fwd = x[swap.start + 1] - x[swap.end + 1];
    const double s = fwd / ann;
    pay[p] = (eff == OptionSide::call ? std::max(s - strike, 0.0) : std::max(strike - s, 0.0)) * ann;
    ctl[p] = fwd - strike * ann;
  }
  if (control_variate) {
    const double expected = (curve.discount(swap.start) - curve.discount(swap.end) - strike * a0) / pn;
    for (double& c : ctl) c -= expected;
    const double beta = regression_coefficient(pay, ctl);
    for (std::size_t p = 0; p < paths.n_paths; ++p) pay[p] -= beta * ctl[p];
  }
  const auto st = sample_stats(pay, paths.antithetic);
  return finish(pn * st.mean, pn * st.std_error, a0 * s0, k, t, eff);
}

}  // namespace rfmm
