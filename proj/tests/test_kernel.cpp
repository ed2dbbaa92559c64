#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <vector>

#include "rfmm/errors.hpp"
#include "rfmm/kernel.hpp"
#include "rfmm/mc.hpp"

using namespace rfmm;

namespace {

// 2F1(-a, 1; a + 2; z) by direct series, |z| < 1.
double hyp2f1_oracle(double a, double z) {
  double term = 1.0, sum = 1.0;
  for (int n = 0; n < 20000; ++n) {
    term *= (-a + n) * (1.0 + n) / ((a + 2.0 + n) * (1.0 + n)) * z;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// kappa^2 s^{a+1} t^a / (a+1) 2F1(-a, 1; a+2; s/t) for s < t.
double covariance_oracle(double kappa, double h, double s, double t) {
  const double a = h - 0.5;
  return kappa * kappa * std::pow(s, a + 1.0) * std::pow(t, a) / (a + 1.0) * hyp2f1_oracle(a, s / t);
}

}  // namespace

TEST(Kernel, Validation) {
  EXPECT_THROW(RoughKernel(1.0, 0.0), InputError);
  EXPECT_THROW(RoughKernel(1.0, 0.6), InputError);
  EXPECT_THROW(RoughKernel(-0.1, 0.3), InputError);
  EXPECT_NO_THROW(RoughKernel(0.0, 0.3));
  const RoughKernel k(1.5, 0.2);
  EXPECT_NEAR(k(0.25), 1.5 * std::pow(0.25, -0.3), 1e-14);
  EXPECT_NEAR(k.variance(0.7), 2.25 * std::pow(0.7, 0.4) / 0.4, 1e-13);
}

TEST(Kernel, CovarianceDiagonalAndMarkovian) {
  const RoughKernel k(0.8, 0.5);
  EXPECT_DOUBLE_EQ(volterra_covariance(k, 0.3, 0.9), 0.64 * 0.3);
  EXPECT_DOUBLE_EQ(volterra_covariance(k, 0.0, 0.9), 0.0);
  const RoughKernel r(1.3, 0.1);
  EXPECT_NEAR(volterra_covariance(r, 0.4, 0.4), 1.69 * std::pow(0.4, 0.2) / 0.2, 1e-12);
}

TEST(Kernel, CovarianceMatchesHypergeometricOracle) {
  for (double h : {0.05, 0.1, 0.2, 0.35, 0.45}) {
    for (auto [s, t] : {std::pair{0.1, 1.0}, {0.5, 1.0}, {0.9, 1.0}, {0.25, 0.3}, {1.2, 2.0}}) {
      const RoughKernel k(1.1, h);
      const double want = covariance_oracle(1.1, h, s, t);
      EXPECT_NEAR(volterra_covariance(k, s, t), want, 1e-9 * want) << "H=" << h << " s=" << s << " t=" << t;
      EXPECT_DOUBLE_EQ(volterra_covariance(k, s, t), volterra_covariance(k, t, s));
    }
  }
}

TEST(Kernel, GammaRamp) {
  const auto t = TenorStructure::uniform(4);
  EXPECT_DOUBLE_EQ(gamma_ramp(t, 3, 1.5), 1.0);
  EXPECT_DOUBLE_EQ(gamma_ramp(t, 3, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(gamma_ramp(t, 3, 2.25), 0.75);
  EXPECT_DOUBLE_EQ(gamma_ramp(t, 3, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(gamma_ramp(t, 3, 3.5), 0.0);
  EXPECT_THROW(gamma_ramp(t, 5, 1.0), InputError);
}

TEST(Kernel, GammaIntegralMatchesQuadrature) {
  const TenorStructure tenor({0.0, 0.5, 1.0, 2.0, 3.5});
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double h : {0.1, 0.3, 0.5}) {
    const RoughKernel k(1.0, h);
    for (std::size_t i = 1; i <= 4; ++i) {
      for (double t : {0.2, 0.75, 1.6, 3.0, 4.0}) {
        auto f = [&](double s) { return std::pow(t - s, h - 0.5) * gamma_ramp(tenor, i, s); };
        // Split at the ramp kinks so the quadrature sees smooth pieces.
        std::vector<double> cuts{0.0};
        for (double c : {tenor.date(i - 1), tenor.date(i)})
          if (c > 0.0 && c < t) cuts.push_back(c);
        cuts.push_back(t);
        double want = 0.0;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) want += ts.integrate(f, cuts[c], cuts[c + 1]);
        EXPECT_NEAR(kernel_gamma_integral(k, tenor, i, t), want, 1e-9) << "H=" << h << " i=" << i << " t=" << t;
      }
    }
  }
}

TEST(Kernel, SimGridIndex) {
  const SimGrid g(1.0, 96);
  EXPECT_EQ(g.steps(), 96u);
  EXPECT_EQ(g.index_of(0.25), 24u);
  EXPECT_EQ(g.index_of(1.0), 96u);
  EXPECT_THROW(g.index_of(0.2501), InputError);
  EXPECT_THROW(g.index_of(1.5), InputError);
  EXPECT_THROW(SimGrid(0.0, 10), InputError);
  EXPECT_EQ(SimGrid::with_steps(0.05, 7).steps(), 7u);
}

TEST(Kernel, HybridSchemeIsBrownianAtHalf) {
  const HybridScheme hs(0.5, 20, 0.05);
  std::vector<double> zw(20), za(20), dw(20), y(21);
  PathRng rng(3, 0);
  fill_normals(rng, zw);
  fill_normals(rng, za);
  hs.generate(zw, za, dw, y);
  double w = 0.0;
  for (std::size_t k = 0; k < 20; ++k) {
    EXPECT_NEAR(dw[k], std::sqrt(0.05) * zw[k], 1e-15);
    w += dw[k];
    EXPECT_NEAR(y[k + 1], w, 1e-13);
  }
  for (std::size_t k = 0; k <= 20; ++k) EXPECT_NEAR(hs.variance(k), 0.05 * static_cast<double>(k), 1e-13);
}

TEST(Kernel, HybridSchemeMatchesDirectConstruction) {
  // Oracle: optimal abscissae b_k = ((k^{a+1} - (k-1)^{a+1}) / (a+1))^{1/a},
  // exact near cell from the joint Gaussian law of (dW, int (t-s)^a dW).
  const double h = 0.15, a = h - 0.5, dt = 1.0 / 48.0;
  const std::size_t n = 30;
  const HybridScheme hs(h, n, dt);
  std::vector<double> zw(n), za(n), dw(n), y(n + 1);
  PathRng rng(9, 4);
  fill_normals(rng, zw);
  fill_normals(rng, za);
  hs.generate(zw, za, dw, y);

  const double c = std::pow(dt, a + 1.0) / (a + 1.0);
  const double v = std::pow(dt, 2.0 * a + 1.0) / (2.0 * a + 1.0);
  const double lw = c / std::sqrt(dt);
  const double la = std::sqrt(v - lw * lw);
  double var = v;
  for (std::size_t i = 1; i <= n; ++i) {
    double want = lw * zw[i - 1] + la * za[i - 1];
    for (std::size_t k = 2; k <= i; ++k) {
      const double kk = static_cast<double>(k);
      const double b = std::pow((std::pow(kk, a + 1.0) - std::pow(kk - 1.0, a + 1.0)) / (a + 1.0), 1.0 / a);
      want += std::pow(b * dt, a) * std::sqrt(dt) * zw[i - k];
    }
    if (i >= 2) {
      const double kk = static_cast<double>(i);
      const double b = std::pow((std::pow(kk, a + 1.0) - std::pow(kk - 1.0, a + 1.0)) / (a + 1.0), 1.0 / a);
      var += std::pow(b * dt, 2.0 * a) * dt;
    }
    EXPECT_NEAR(y[i], want, 1e-10 * (1.0 + std::abs(want)));
    EXPECT_NEAR(hs.variance(i), var, 1e-12 * var);
  }
}

TEST(Kernel, HybridVarianceApproachesContinuousLaw) {
  // The discrete variance at t = 1 converges to t^{2H}/(2H) as dt shrinks.
  const double h = 0.1;
  double prev = 1e9;
  for (std::size_t n : {24u, 96u, 384u}) {
    const HybridScheme hs(h, n, 1.0 / static_cast<double>(n));
    const double err = std::abs(hs.variance(n) - 1.0 / (2.0 * h));
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev / (1.0 / (2.0 * h)), 0.02);
}

TEST(Kernel, HybridPathsScaleWithKappa) {
  const SimGrid g(1.0, 12);
  const auto d = make_gaussian_drivers(g, 4, 5);
  const auto p1 = hybrid_scheme_paths(RoughKernel(1.0, 0.2), g, d);
  const auto p2 = hybrid_scheme_paths(RoughKernel(2.5, 0.2), g, d);
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t k = 0; k <= 12; ++k) EXPECT_NEAR(p2.value(p, k), 2.5 * p1.value(p, k), 1e-14);
}

TEST(Kernel, AntitheticDriversMirror) {
  const SimGrid g(1.0, 6);
  const auto d = make_gaussian_drivers(g, 4, 11, true);
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_EQ(d.z_w[6 + k], -d.z_w[k]);
    EXPECT_EQ(d.z_aux[18 + k], -d.z_aux[12 + k]);
  }
}
