#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rfmm/curve.hpp"
#include "rfmm/errors.hpp"
#include "rfmm/fmm.hpp"
#include "rfmm/pricing.hpp"
#include "rfmm/smm.hpp"

using namespace rfmm;

namespace {

double phi_oracle(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

double black_put_oracle(double k, double v) {
  const double dp = -k / v + 0.5 * v, dm = dp - v;
  return std::exp(k) * phi_oracle(-dm) - phi_oracle(-dp);
}

SmmParams constant_smm(double kappa, double hurst, double v, double rho) {
  SmmParams p;
  p.s0 = 0.03;
  p.kernel = RoughKernel(kappa, hurst);
  p.v_curve = [v](double) { return v; };
  p.rho = rho;
  return p;
}

Eigen::MatrixXd corr_with(std::size_t n, double rho0, double rate_rho) {
  const auto d = static_cast<Eigen::Index>(n + 1);
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index i = 1; i < d; ++i) {
    c(0, i) = c(i, 0) = rho0;
    for (Eigen::Index j = 1; j < d; ++j)
      if (i != j) c(i, j) = std::pow(rate_rho, std::abs(static_cast<double>(i - j)));
  }
  return c;
}

}  // namespace

TEST(Black, ReferenceValues) {
  EXPECT_NEAR(black_put(0.0, 0.2), 2.0 * phi_oracle(0.1) - 1.0, 1e-15);
  EXPECT_NEAR(black_put(0.0, 0.2), 0.0796557, 5e-8);
  EXPECT_NEAR(black_put(0.0, 1e-12), 0.0, 1e-12);
  EXPECT_NEAR(black_put(8.0, 0.3), std::exp(8.0) - 1.0, 1e-9);
  EXPECT_EQ(black_put(-1.0, 0.0), 0.0);
  for (double k : {-0.7, -0.1, 0.0, 0.2, 0.9})
    for (double v : {0.05, 0.3, 1.2}) {
      EXPECT_NEAR(black_put(k, v), black_put_oracle(k, v), 1e-14);
      EXPECT_NEAR(black_call(k, v) - black_put(k, v), 1.0 - std::exp(k), 1e-14);
      EXPECT_EQ(black_price(k, v, OptionSide::out_of_the_money),
                k > 0.0 ? black_call(k, v) : black_put(k, v));
    }
}

TEST(Black, NormalCdfTails) {
  EXPECT_NEAR(norm_cdf(-10.0), 7.61985302416047e-24, 1e-36);
  EXPECT_NEAR(norm_cdf(0.3) + norm_cdf(-0.3), 1.0, 1e-16);
  EXPECT_NEAR(norm_pdf(0.0), 1.0 / std::sqrt(2.0 * M_PI), 1e-16);
}

TEST(Black, VegaMatchesFiniteDifference) {
  for (double k : {-0.3, 0.0, 0.25})
    for (double t : {0.1, 1.0, 5.0}) {
      const double s = 0.3, h = 1e-6;
      const double fd = (black_put(k, (s + h) * std::sqrt(t)) - black_put(k, (s - h) * std::sqrt(t))) / (2.0 * h);
      EXPECT_NEAR(black_vega(k, s, t), fd, 1e-7);
    }
}

TEST(ImpliedVol, RoundTrip) {
  EXPECT_NEAR(implied_vol(black_put(0.0, 0.2), 0.0, 1.0), 0.2, 1e-12);
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> us(0.05, 1.0), uk(-0.5, 0.5), ut(0.05, 5.0);
  for (int i = 0; i < 500; ++i) {
    const double s = us(gen), k = uk(gen), t = ut(gen), v = s * std::sqrt(t);
    const double otm = black_price(k, v, OptionSide::out_of_the_money);
    for (OptionSide side : {OptionSide::put, OptionSide::call, OptionSide::out_of_the_money}) {
      const double price = black_price(k, v, side);
      // An in-the-money quote only carries the time value to double precision.
      if (otm < 1e-6 * price) continue;
      const double iv = implied_vol(price, k, t, side);
      EXPECT_NEAR(iv, s, 1e-10) << "k=" << k << " t=" << t;
    }
  }
}

TEST(ImpliedVol, ArbitrageBounds) {
  EXPECT_THROW(implied_vol(std::exp(0.1) - 1.0, 0.1, 1.0), ArbitrageError);
  EXPECT_THROW(implied_vol(0.0, -0.1, 1.0), ArbitrageError);
  EXPECT_THROW(implied_vol(std::exp(-0.1), -0.1, 1.0), ArbitrageError);
  EXPECT_THROW(implied_vol(1.0, 0.1, 1.0, OptionSide::call), ArbitrageError);
  EXPECT_THROW(implied_vol(0.01, 0.0, 0.0), InputError);
  // Time value 2e-22 on a 0.39 call is lost in the parity conversion.
  const double k = -0.496697, v = 0.0710365 * std::sqrt(0.590849);
  EXPECT_THROW(implied_vol(black_call(k, v), k, 0.590849, OptionSide::call), ArbitrageError);
  EXPECT_NEAR(implied_vol(black_put(k, v), k, 0.590849, OptionSide::put), 0.0710365, 1e-10);
}

TEST(SmmPricing, DegenerateBlackScholesWithExactControl) {
  const auto p = constant_smm(0.0, 0.3, 0.04, -0.5);
  const SimGrid g(0.5, 48);
  McConfig mc;
  mc.n_paths = 20000;
  for (double k : {-0.2, 0.0, 0.15}) {
    const auto r = mc_price_swaption_smm(p, k, 0.5, g, mc);
    EXPECT_NEAR(r.price, black_price(k, 0.2 * std::sqrt(0.5), OptionSide::out_of_the_money), 1e-12);
    EXPECT_LT(r.std_error, 1e-12);
    EXPECT_NEAR(r.implied_vol, 0.2, 1e-9);
  }
  mc.control_variate = false;
  const auto plain = mc_price_swaption_smm(p, 0.0, 0.5, g, mc);
  EXPECT_GT(plain.std_error, 0.0);
  EXPECT_NEAR(plain.price, black_put(0.0, 0.2 * std::sqrt(0.5)), 3.0 * plain.std_error);

  const auto paths = simulate_smm(p, g, mc);
  std::vector<double> s(paths.n_paths);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(paths.log_ratio(i, 0));
  const auto st = sample_stats(s);
  EXPECT_NEAR(st.mean, 1.0, 3.0 * st.std_error);
}

TEST(SmmPricing, PutCallParity) {
  const auto p = constant_smm(1.0, 0.2, 0.09, -0.5);
  const SimGrid g(0.25, 96);
  McConfig mc;
  mc.n_paths = 20000;
  mc.control_variate = false;
  const auto paths = simulate_smm(p, g, mc);
  for (double k : {-0.1, 0.05}) {
    const auto put = price_smm_paths(paths, p, k, 0.25, OptionSide::put, false);
    const auto call = price_smm_paths(paths, p, k, 0.25, OptionSide::call, false);
    EXPECT_NEAR(call.price - put.price, 1.0 - std::exp(k), 3.0 * (put.std_error + call.std_error));
  }
}

TEST(SmmPricing, ControlVariateShrinksErrorAndAgrees) {
  const auto p = constant_smm(1.0, 0.2, 0.09, -0.5);
  const SimGrid g(0.1, 240);
  McConfig mc;
  mc.n_paths = 20000;
  const auto paths = simulate_smm(p, g, mc);
  const auto a = price_smm_paths(paths, p, 0.0, 0.1, OptionSide::out_of_the_money, true);
  const auto b = price_smm_paths(paths, p, 0.0, 0.1, OptionSide::out_of_the_money, false);
  const auto c = price_smm_paths(paths, p, 0.0, 0.1, OptionSide::out_of_the_money, true, true);
  EXPECT_LT(a.std_error, 0.5 * b.std_error);
  EXPECT_LE(c.std_error, a.std_error * 1.0001);
  EXPECT_NEAR(a.price, b.price, 3.0 * b.std_error);
}

TEST(FmmPricing, DegenerateCapletIsBlack) {
  // kappa = 0, lognormal eta: R^2 is lognormal under Q^{T_2} with vol alpha_2.
  const auto curve = DiscountCurve::flat(TenorStructure::uniform(2), 0.03);
  const auto fmm = FmmParams::from_curve(curve, RoughKernel(0.0, 0.3), {0.2, 0.2}, corr_with(2, -0.3, 0.9));
  const SimGrid g(1.0, 48);
  McConfig mc;
  mc.n_paths = 20000;
  const auto paths = simulate_fmm(fmm, g, mc);
  const SwapDefinition swap{1, 2};
  const double s0 = forward_swap_rate(curve, swap);
  for (double m : {0.8, 1.0, 1.25}) {
    const auto r = mc_price_swaption_fmm(paths, curve, swap, m * s0, 1.0);
    EXPECT_NEAR(r.implied_vol, 0.2, 3.0 * r.iv_std_error + 1e-12) << "moneyness " << m;
    const double k = std::log(m);
    const double want = annuity(curve, swap) * s0 * black_price(k, 0.2, OptionSide::out_of_the_money);
    EXPECT_NEAR(r.price, want, 3.0 * r.std_error + 1e-14);
  }
}

TEST(FmmPricing, DeepInTheMoneyPutIsForward) {
  const auto curve = DiscountCurve::flat(TenorStructure::uniform(4), 0.03);
  const auto fmm = FmmParams::from_curve(curve, RoughKernel(1.0, 0.2), {0.2, 0.2, 0.2, 0.2}, corr_with(4, -0.4, 0.9));
  const SimGrid g(1.0, 48);
  McConfig mc;
  mc.n_paths = 10000;
  const auto paths = simulate_fmm(fmm, g, mc);
  const SwapDefinition swap{1, 4};
  const double strike = 0.5;
  const auto r = mc_price_swaption_fmm(paths, curve, swap, strike, 1.0, OptionSide::put);
  const double fwd = annuity(curve, swap) * (strike - forward_swap_rate(curve, swap));
  EXPECT_NEAR(r.price, fwd, 3.0 * r.std_error + 1e-12 * fwd);
  EXPECT_THROW(mc_price_swaption_fmm(paths, curve, {0, 4}, 0.03, 1.0), InputError);
  EXPECT_THROW(mc_price_swaption_fmm(paths, curve, {1, 4}, 0.03, 1.5), InputError);
}

TEST(FmmPricing, CloseToMappedSmmAtShortExpiry) {
  const auto curve = DiscountCurve::flat(TenorStructure::uniform(4, 0.25), 0.03);
  const auto fmm =
      FmmParams::from_curve(curve, RoughKernel(1.0, 0.2), {0.3, 0.3, 0.28, 0.26}, corr_with(4, -0.5, 0.9));
  const double t = 0.25;
  const SwapDefinition swap{1, 4};
  const SimGrid g(t, 384);
  McConfig mc;
  mc.n_paths = 40000;
  const auto fp = simulate_fmm(fmm, g, mc);
  const auto f = mc_price_swaption_fmm(fp, curve, swap, forward_swap_rate(curve, swap), t);
  const auto smm = map_fmm_to_smm(fmm, curve, swap);
  const auto s = mc_price_swaption_smm(smm, 0.0, t, g, mc);
  const double joint = std::hypot(f.iv_std_error, s.iv_std_error);
  EXPECT_LT(std::abs(f.implied_vol - s.implied_vol), std::max(3.0 * joint, 0.003));
}
