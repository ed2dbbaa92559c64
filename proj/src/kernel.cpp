#include "rfmm/kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "rfmm/errors.hpp"
#include "rfmm/mc.hpp"

namespace rfmm {

RoughKernel::RoughKernel(double kappa_, double hurst_) : kappa(kappa_), hurst(hurst_) { validate(); }

void RoughKernel::validate() const {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InputError("RoughKernel: kappa must be nonnegative");
  if (!(hurst > 0.0 && hurst <= 0.5)) throw InputError("RoughKernel: H must lie in (0, 1/2]");
}

double RoughKernel::operator()(double t) const { return kappa * std::pow(t, hurst - 0.5); }

double RoughKernel::variance(double t) const {
  if (t <= 0.0) return 0.0;
  return kappa * kappa * std::pow(t, 2.0 * hurst) / (2.0 * hurst);
}

SimGrid::SimGrid(double horizon, int steps_per_year)
    : SimGrid(horizon,
              static_cast<std::size_t>(std::max<long long>(1, std::llround(horizon * static_cast<double>(steps_per_year)))),
              true) {
  if (steps_per_year < 1) throw InputError("SimGrid: steps_per_year must be positive");
}

SimGrid::SimGrid(double horizon, std::size_t n_steps, bool) : horizon_(horizon), n_steps_(n_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("SimGrid: horizon must be positive");
  if (n_steps < 1) throw InputError("SimGrid: need at least one step");
}

SimGrid SimGrid::with_steps(double horizon, std::size_t n_steps) { return SimGrid(horizon, n_steps, true); }

std::size_t SimGrid::index_of(double t) const {
  const double x = t / dt();
  const long long k = std::llround(x);
  if (k < 0 || static_cast<std::size_t>(k) > n_steps_ || std::abs(x - static_cast<double>(k)) > 1e-8)
    throw InputError("SimGrid: time " + std::to_string(t) + " is not a grid point");
  return static_cast<std::size_t>(k);
}

double gamma_ramp(const TenorStructure& tenor, std::size_t j, double t) {
  if (j < 1 || j > tenor.size()) throw InputError("gamma_ramp: index out of range");
  const double lo = tenor.date(j - 1);
  const double hi = tenor.date(j);
  if (t <= lo) return 1.0;
  if (t <= hi) return (hi - t) / (hi - lo);
  return 0.0;
}

double volterra_covariance(const RoughKernel& kernel, double s, double t) {
  if (s < 0.0 || t < 0.0) throw InputError("volterra_covariance: times must be nonnegative");
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  if (lo == 0.0) return 0.0;
  const double k2 = kernel.kappa * kernel.kappa;
  if (kernel.markovian()) return k2 * lo;
  if (lo == hi) return kernel.variance(lo);

  // int_0^lo x^a (d + x)^a dx with x = y^{1/(a+1)} becomes
  // (a+1)^{-1} int_0^{lo^{a+1}} (d + y^{1/(a+1)})^a dy, which is bounded.
  const double a = kernel.hurst - 0.5;
  const double d = hi - lo;
  const double p = 1.0 / (a + 1.0);
  auto integrand = [a, d, p](double y) { return std::pow(d + std::pow(y, p), a); };
  double error = 0.0;
  const double upper = std::pow(lo, a + 1.0);
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, upper, 15, 1e-11, &error);
  if (!(error <= 1e-9 * std::abs(value) + 1e-300))
    throw NumericalError("volterra_covariance: quadrature did not converge");
  return k2 * p * value;
}

double kernel_gamma_integral(const RoughKernel& kernel, const TenorStructure& tenor, std::size_t i, double t) {
  if (i < 1 || i > tenor.size()) throw InputError("kernel_gamma_integral: index out of range");
  if (t <= 0.0) return 0.0;
  const double h = kernel.hurst;
  const double lo = tenor.date(i - 1);
  const double hi = tenor.date(i);
  const double pos_lo = std::max(t - lo, 0.0);
  const double pos_hi = std::max(t - hi, 0.0);
  return std::pow(t, h + 0.5) / (h + 0.5) -
         (std::pow(pos_lo, h + 1.5) - std::pow(pos_hi, h + 1.5)) / ((h + 0.5) * (h + 1.5) * (hi - lo));
}

HybridScheme::HybridScheme(double hurst, std::size_t n_steps, double dt)
    : hurst_(hurst), n_steps_(n_steps), dt_(dt), sqrt_dt_(std::sqrt(dt)) {
  if (!(hurst > 0.0 && hurst <= 0.5)) throw InputError("HybridScheme: H must lie in (0, 1/2]");
  if (n_steps < 1 || !(dt > 0.0)) throw InputError("HybridScheme: invalid grid");
  const double a = hurst - 0.5;
  // Joint law of (dW, W~) on one cell: Var dW = dt, Cov = dt^{a+1}/(a+1),
  // Var W~ = dt^{2a+1}/(2a+1).
  const double cov = std::pow(dt, a + 1.0) / (a + 1.0);
  const double var_near = std::pow(dt, 2.0 * a + 1.0) / (2.0 * a + 1.0);
  near_w_ = cov / sqrt_dt_;
  // var_near - cov^2/dt in factored form, exactly zero at H = 1/2.
  near_aux_ = std::sqrt(std::pow(dt, 2.0 * a + 1.0) * a * a / ((2.0 * a + 1.0) * (a + 1.0) * (a + 1.0)));

  // (b_k dt)^a = dt^a (k^{a+1} - (k-1)^{a+1}) / (a+1); no 1/a power needed.
  tail_.assign(n_steps + 1, 0.0);
  const double dta = std::pow(dt, a);
  for (std::size_t k = 2; k <= n_steps; ++k) {
    const double kk = static_cast<double>(k);
    tail_[k] = dta * (std::pow(kk, a + 1.0) - std::pow(kk - 1.0, a + 1.0)) / (a + 1.0);
  }
  variance_.assign(n_steps + 1, 0.0);
  double acc = var_near;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    if (k >= 2) acc += tail_[k] * tail_[k] * dt;
    variance_[k] = acc;
  }
}

void HybridScheme::generate(std::span<const double> z_w, std::span<const double> z_aux, std::span<double> dw,
                            std::span<double> y) const {
  const std::size_t n = n_steps_;
  if (z_w.size() < n || z_aux.size() < n || dw.size() < n || y.size() < n + 1)
    throw InputError("HybridScheme: driver/grid shape mismatch");
  for (std::size_t k = 0; k < n; ++k) dw[k] = sqrt_dt_ * z_w[k];
  y[0] = 0.0;
  const double* tail = tail_.data();
  for (std::size_t i = 1; i <= n; ++i) {
    double acc = near_w_ * z_w[i - 1] + near_aux_ * z_aux[i - 1];
    // sum_{k=2}^{i} tail_k dW_{i-k}
    const double* w = dw.data();
    for (std::size_t k = 2; k <= i; ++k) acc += tail[k] * w[i - k];
    y[i] = acc;
  }
}

GaussianDrivers make_gaussian_drivers(const SimGrid& grid, std::size_t n_paths, std::uint64_t seed, bool antithetic) {
  GaussianDrivers d;
  d.n_paths = n_paths;
  d.n_steps = grid.steps();
  d.z_w.resize(n_paths * d.n_steps);
  d.z_aux.resize(n_paths * d.n_steps);
  std::vector<double> buf(2 * d.n_steps);
  for (std::size_t p = 0; p < n_paths; ++p) {
    PathRng rng(seed, stream_of(p, antithetic));
    fill_normals(rng, buf);
    const double sign = is_mirror(p, antithetic) ? -1.0 : 1.0;
    for (std::size_t k = 0; k < d.n_steps; ++k) {
      d.z_w[p * d.n_steps + k] = sign * buf[2 * k];
      d.z_aux[p * d.n_steps + k] = sign * buf[2 * k + 1];
    }
  }
  return d;
}

VolterraPaths hybrid_scheme_paths(const RoughKernel& kernel, const SimGrid& grid, const GaussianDrivers& drivers) {
  kernel.validate();
  const std::size_t n = grid.steps();
  if (drivers.n_steps != n || drivers.z_w.size() != drivers.n_paths * n || drivers.z_aux.size() != drivers.n_paths * n)
    throw InputError("hybrid_scheme_paths: driver/grid shape mismatch");
  const HybridScheme scheme(kernel.hurst, n, grid.dt());
  VolterraPaths out;
  out.n_paths = drivers.n_paths;
  out.n_steps = n;
  out.values.resize(out.n_paths * (n + 1));
  out.increments.resize(out.n_paths * n);
  for (std::size_t p = 0; p < out.n_paths; ++p) {
    std::span<const double> zw(drivers.z_w.data() + p * n, n);
    std::span<const double> za(drivers.z_aux.data() + p * n, n);
    std::span<double> y(out.values.data() + p * (n + 1), n + 1);
    std::span<double> dw(out.increments.data() + p * n, n);
    scheme.generate(zw, za, dw, y);
    for (double& v : y) v *= kernel.kappa;
  }
  return out;
}

}  // namespace rfmm
