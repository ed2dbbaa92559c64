#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rfmm/curve.hpp"
#include "rfmm/errors.hpp"

using namespace rfmm;

namespace {

DiscountCurve sample_curve() {
  return DiscountCurve(TenorStructure::uniform(3), {1.0, 0.99, 0.97, 0.94});
}

DiscountCurve random_curve(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> rate(0.0, 0.08), step(0.25, 2.0);
  std::vector<double> dates{0.0}, p{1.0};
  for (std::size_t j = 1; j <= n; ++j) {
    const double th = step(gen);
    dates.push_back(dates.back() + th);
    p.push_back(p.back() / (1.0 + th * rate(gen)));
  }
  return DiscountCurve(TenorStructure(dates), p);
}

}  // namespace

TEST(Curve, TenorValidation) {
  EXPECT_THROW(TenorStructure({0.0, 1.0}), InputError);
  EXPECT_THROW(TenorStructure({0.5, 1.0, 2.0}), InputError);
  EXPECT_THROW(TenorStructure({0.0, 1.0, 1.0}), InputError);
  const auto t = TenorStructure::uniform(4, 0.5);
  EXPECT_EQ(t.size(), 4u);
  EXPECT_DOUBLE_EQ(t.theta(3), 0.5);
  EXPECT_THROW(t.theta(0), InputError);
}

TEST(Curve, ForwardTermRate) {
  const auto c = sample_curve();
  EXPECT_NEAR(forward_term_rate(c, 2), 0.99 / 0.97 - 1.0, 1e-15);
  EXPECT_NEAR(forward_term_rate(c, 2), 0.0206186, 5e-8);
  EXPECT_THROW(forward_term_rate(c, 0), InputError);
  EXPECT_THROW(forward_term_rate(c, 4), InputError);

  const auto flat = DiscountCurve::flat(TenorStructure::uniform(5), 0.03);
  for (std::size_t j = 1; j <= 5; ++j) EXPECT_NEAR(forward_term_rate(flat, j), 0.03, 1e-14);

  const DiscountCurve zero(TenorStructure::uniform(2), {1.0, 0.98, 0.98});
  EXPECT_EQ(forward_term_rate(zero, 2), 0.0);
}

TEST(Curve, AnnuityAndSwapRate) {
  const auto c = sample_curve();
  const SwapDefinition s{1, 3};
  EXPECT_NEAR(annuity(c, s), 1.91, 1e-14);
  EXPECT_NEAR(forward_swap_rate(c, s), 0.05 / 1.91, 1e-15);
  EXPECT_NEAR(forward_swap_rate(c, s), 0.0261780, 5e-8);
  EXPECT_NEAR(annuity(c, {2, 3}), 0.94, 1e-15);
  EXPECT_NEAR(forward_swap_rate(c, {2, 3}), forward_term_rate(c, 3), 1e-15);

  const DiscountCurve ones(TenorStructure::uniform(6), std::vector<double>(7, 1.0));
  EXPECT_DOUBLE_EQ(annuity(ones, {1, 6}), 5.0);

  const auto flat = DiscountCurve::flat(TenorStructure::uniform(6), 0.03);
  for (std::size_t i = 1; i < 6; ++i)
    for (std::size_t j = i + 1; j <= 6; ++j) EXPECT_NEAR(forward_swap_rate(flat, {i, j}), 0.03, 1e-14);
  EXPECT_THROW(annuity(c, {2, 2}), InputError);
  EXPECT_THROW(annuity(c, {0, 2}), InputError);
}

TEST(Curve, PiWeightsReferenceValues) {
  const auto c = sample_curve();
  const auto pi = pi_weights(c, {1, 3});
  ASSERT_EQ(pi.size(), 2u);
  // Direct evaluation of Pi^j = theta_j P_j / (A P_{j-1}) (P_J + S sum_{k>=j} theta_k P_k).
  const double a = 1.91, s = 0.05 / 1.91;
  const double pi2 = 0.97 / (a * 0.99) * (0.94 + s * (0.97 + 0.94));
  const double pi3 = 0.94 / (a * 0.97) * (0.94 + s * 0.94);
  EXPECT_NEAR(pi[0], pi2, 1e-15);
  EXPECT_NEAR(pi[1], pi3, 1e-15);
  EXPECT_NEAR(pi[0], 0.507853, 5e-7);
  EXPECT_NEAR(pi[1], 0.489411, 5e-7);

  const auto c_rec = c_recursion(c, {1, 3});
  EXPECT_DOUBLE_EQ(c_rec[0], 1.0);
  EXPECT_NEAR(c_rec[1], 1.0 + (0.99 / 0.97 - 1.0) - s, 1e-15);
  EXPECT_NEAR(c_rec[1], 0.994441, 5e-7);
  EXPECT_NEAR(0.94 * c_rec[1] / a, 0.489411, 5e-7);
}

TEST(Curve, SinglePeriodPiIsOne) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_curve(gen, 5);
    for (std::size_t i = 1; i < 5; ++i) EXPECT_NEAR(pi_weights(c, {i, i + 1})[0], 1.0, 1e-13);
  }
}

TEST(Curve, FlatCurveGivesFreezingWeights) {
  const auto flat = DiscountCurve::flat(TenorStructure::uniform(8), 0.04);
  const SwapDefinition s{2, 8};
  const auto pi = pi_weights(flat, s);
  const auto w = freezing_weights(flat, s);
  const auto c = c_recursion(flat, s);
  for (std::size_t m = 0; m < pi.size(); ++m) {
    EXPECT_NEAR(pi[m], w[m], 1e-15);
    EXPECT_NEAR(c[m], 1.0, 1e-14);
  }
}

TEST(Curve, DecreasingRatesBreakUnitC) {
  const DiscountCurve c(TenorStructure::uniform(3), {1.0, 0.95, 0.92, 0.90});
  const auto rec = c_recursion(c, {1, 3});
  EXPECT_GT(std::abs(rec[1] - 1.0), 1e-4);
}

TEST(Curve, TelescopingAndBasketWeightBounds) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_curve(gen, 7);
    const auto& t = c.tenor();
    for (std::size_t i = 1; i < 7; ++i) {
      const SwapDefinition s{i, 7};
      double lhs = 0.0;
      for (std::size_t j = i + 1; j <= 7; ++j) lhs += t.theta(j) * c.discount(j) * forward_term_rate(c, j);
      EXPECT_NEAR(lhs, c.discount(i) - c.discount(7), 1e-14);

      const auto pi = pi_weights(c, s);
      const auto rec = c_recursion(c, s);
      const double a = annuity(c, s), sr = forward_swap_rate(c, s);
      for (std::size_t m = 0; m < pi.size(); ++m) {
        const std::size_t j = i + 1 + m;
        EXPECT_NEAR(pi[m], t.theta(j) * c.discount(j) * rec[m] / a, 1e-12 * std::abs(pi[m]));
        // Equality holds for j = J when J = I + 1, so allow rounding.
        EXPECT_LE(pi[m] * forward_term_rate(c, j), sr * (1.0 + 1e-12));
      }
    }
  }
}
