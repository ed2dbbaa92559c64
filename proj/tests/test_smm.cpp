#include <gtest/gtest.h>

#include <cmath>

#include "rfmm/curve.hpp"
#include "rfmm/errors.hpp"
#include "rfmm/fmm.hpp"
#include "rfmm/smm.hpp"

using namespace rfmm;

namespace {

Eigen::MatrixXd corr3(double rho0, double r12, double r13, double r23) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(4, 4);
  for (int i = 1; i <= 3; ++i) c(0, i) = c(i, 0) = rho0;
  c(1, 2) = c(2, 1) = r12;
  c(1, 3) = c(3, 1) = r13;
  c(2, 3) = c(3, 2) = r23;
  return c;
}

DiscountCurve reference_curve() { return DiscountCurve(TenorStructure::uniform(3), {1.0, 0.99, 0.97, 0.94}); }

}  // namespace

TEST(Mapping, CapletCase) {
  const auto curve = reference_curve();
  const auto fmm = FmmParams::from_curve(curve, RoughKernel(1.2, 0.2), {0.2, 0.3, 0.25}, corr3(-0.6, 0.9, 0.8, 0.9));
  const SwapDefinition swap{2, 3};
  const auto pi = mapping_weights(fmm, curve, swap);
  ASSERT_EQ(pi.size(), 1u);
  EXPECT_NEAR(pi[0], 1.0, 1e-13);
  const auto smm = map_fmm_to_smm(fmm, curve, swap);
  EXPECT_NEAR(smm.rho, -0.6, 1e-13);
  EXPECT_NEAR(smm.s0, forward_term_rate(curve, 3), 1e-15);
  for (double t : {0.0, 0.3, 1.7}) EXPECT_NEAR(smm.v(t), xi_curve(fmm, 3, t), 1e-13 * smm.v(t));
}

TEST(Mapping, PerfectRateCorrelation) {
  const auto curve = reference_curve();
  const auto fmm = FmmParams::from_curve(curve, RoughKernel(1.0, 0.3), {0.2, 0.3, 0.25}, corr3(-0.4, 1.0, 1.0, 1.0));
  const SwapDefinition swap{1, 3};
  const auto pi = mapping_weights(fmm, curve, swap);
  const auto smm = map_fmm_to_smm(fmm, curve, swap);
  for (double t : {0.0, 0.5, 1.0}) {
    const double s = pi[0] * std::sqrt(xi_curve(fmm, 2, t)) + pi[1] * std::sqrt(xi_curve(fmm, 3, t));
    EXPECT_NEAR(smm.v(t), s * s, 1e-14);
  }
}

TEST(Mapping, ReferenceCurveHandValue) {
  const auto curve = reference_curve();
  const auto fmm = FmmParams::from_curve(curve, RoughKernel(0.0, 0.3), {0.3, 0.3, 0.3}, corr3(-0.5, 0.9, 0.8, 0.7));
  const SwapDefinition swap{1, 3};
  const double s = 0.05 / 1.91;
  const double r2 = 0.99 / 0.97 - 1.0, r3 = 0.97 / 0.94 - 1.0;
  const double p2 = 0.507853 * r2 / s, p3 = 0.489411 * r3 / s;
  const auto pi = mapping_weights(fmm, curve, swap);
  EXPECT_NEAR(pi[0], p2, 1e-5);
  EXPECT_NEAR(pi[1], p3, 1e-5);
  const double v0 = 0.09 * (p2 * p2 + p3 * p3 + 2.0 * 0.7 * p2 * p3);
  const auto smm = map_fmm_to_smm(fmm, curve, swap);
  EXPECT_NEAR(smm.v(0.0), v0, 1e-5 * v0);
  EXPECT_NEAR(smm.rho, -0.5 * 0.3 * (p2 + p3) / std::sqrt(v0), 1e-5);
}

TEST(SmmParams, Validation) {
  SmmParams p;
  p.s0 = 0.03;
  p.kernel = RoughKernel(1.0, 0.2);
  p.v_curve = [](double) { return 0.04; };
  p.rho = -1.2;
  EXPECT_THROW(p.validate(), InputError);
  p.rho = -0.5;
  EXPECT_NO_THROW(p.validate());
  p.s0 = 0.0;
  EXPECT_THROW(p.validate(), InputError);
}

TEST(SmmSimulation, MarkovianLimitMatchesDirectScheme) {
  // At H = 1/2 the hybrid scheme is exact, so V_k = v exp(kappa W0_k - kappa^2 t_k / 2)
  // and the log-Euler step can be replayed from the same draws.
  SmmParams p;
  p.s0 = 0.03;
  p.kernel = RoughKernel(0.8, 0.5);
  p.v_curve = [](double t) { return 0.04 * (1.0 + 0.5 * t); };
  p.rho = -0.7;
  const SimGrid g(1.0, 32);
  McConfig mc;
  mc.n_paths = 64;
  mc.seed = 99;
  mc.antithetic = true;
  const auto paths = simulate_smm(p, g, mc);
  const double dt = g.dt(), rp = std::sqrt(1.0 - 0.49);
  for (std::size_t path = 0; path < mc.n_paths; ++path) {
    PathRng rng(mc.seed, stream_of(path, true));
    std::vector<double> z(3 * 32);
    fill_normals(rng, z);
    const double sign = is_mirror(path, true) ? -1.0 : 1.0;
    double w0 = 0.0, x = 0.0, ws = 0.0;
    for (std::size_t k = 0; k < 32; ++k) {
      const double t = dt * static_cast<double>(k);
      const double v = p.v(t) * std::exp(0.8 * w0 - 0.32 * t);
      const double d0 = sign * std::sqrt(dt) * z[3 * k], dp = sign * std::sqrt(dt) * z[3 * k + 2];
      const double ds = -0.7 * d0 + rp * dp;
      x += std::sqrt(v) * ds - 0.5 * v * dt;
      ws += ds;
      w0 += d0;
    }
    EXPECT_NEAR(paths.log_ratio(path, 0), x, 1e-12);
    EXPECT_NEAR(paths.driver(path, 0), ws, 1e-12);
  }
}

TEST(SmmSimulation, ObservationTimes) {
  SmmParams p;
  p.s0 = 0.03;
  p.kernel = RoughKernel(1.0, 0.2);
  p.v_curve = [](double) { return 0.04; };
  p.rho = -0.5;
  const SimGrid g(1.0, 8);
  McConfig mc;
  mc.n_paths = 4;
  const std::vector<double> obs{0.0, 0.5, 1.0};
  const auto paths = simulate_smm(p, g, mc, obs);
  EXPECT_EQ(paths.observation_index(0.5), 1u);
  EXPECT_EQ(paths.log_ratio(2, 0), 0.0);
  EXPECT_THROW(paths.observation_index(0.3), InputError);
  EXPECT_THROW(simulate_smm(p, g, mc, std::vector<double>{0.3}), InputError);
}
