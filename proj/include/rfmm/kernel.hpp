#pragma once

// Power-law Volterra kernel zeta(t) = kappa t^{H-1/2}, the tenor ramps
// gamma_j, and hybrid-scheme simulation of Y_t = int_0^t zeta(t-s) dW_s.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rfmm/curve.hpp"

namespace rfmm {

struct RoughKernel {
  double kappa = 1.0;  // vol-of-vol, yr^{-H}
  double hurst = 0.5;  // H in (0, 1/2]; 1/2 is the Markovian (SABR) limit

  RoughKernel() = default;
  RoughKernel(double kappa_, double hurst_);

  void validate() const;
  double operator()(double t) const;
  // int_0^t zeta(s)^2 ds = kappa^2 t^{2H} / (2H).
  double variance(double t) const;
  bool markovian() const { return hurst == 0.5; }
};

// Uniform grid 0 = t_0 < ... < t_n = horizon.
class SimGrid {
 public:
  SimGrid(double horizon, int steps_per_year);
  static SimGrid with_steps(double horizon, std::size_t n_steps);

  double horizon() const { return horizon_; }
  std::size_t steps() const { return n_steps_; }
  double dt() const { return horizon_ / static_cast<double>(n_steps_); }
  double time(std::size_t k) const { return dt() * static_cast<double>(k); }
  // Grid index of t; throws InputError when t is not (numerically) a grid point.
  std::size_t index_of(double t) const;

 private:
  SimGrid(double horizon, std::size_t n_steps, bool);
  double horizon_;
  std::size_t n_steps_;
};

// 1 before T_{j-1}, linear down to 0 on (T_{j-1}, T_j], 0 afterwards.
double gamma_ramp(const TenorStructure& tenor, std::size_t j, double t);

// Cov(Y_s, Y_t) = kappa^2 int_0^{s^t} (s-u)^{H-1/2} (t-u)^{H-1/2} du.
// Diagonal and H = 1/2 are closed form; off-diagonal uses adaptive
// Gauss-Kronrod after removing the endpoint singularity.
double volterra_covariance(const RoughKernel& kernel, double s, double t);

// int_0^t (t-s)^{H-1/2} gamma_i(s) ds in closed form.
double kernel_gamma_integral(const RoughKernel& kernel, const TenorStructure& tenor, std::size_t i, double t);

// Hybrid scheme with one exactly simulated nearest cell and a Riemann tail
// evaluated at the optimal abscissae b_k. Works in unit-kappa form; callers
// scale by kappa.
class HybridScheme {
 public:
  HybridScheme(double hurst, std::size_t n_steps, double dt);

  std::size_t steps() const { return n_steps_; }
  double dt() const { return dt_; }

  // z_w, z_aux: n_steps iid standard normals each. Writes the Brownian
  // increments dw[k] = W(t_{k+1}) - W(t_k) and y[k] = Y(t_k), k = 0..n
  // (y has n_steps + 1 entries, y[0] = 0).
  void generate(std::span<const double> z_w, std::span<const double> z_aux, std::span<double> dw,
                std::span<double> y) const;

  // Exact variance of the discretised Y(t_k) (unit kappa).
  double variance(std::size_t k) const { return variance_[k]; }

 private:
  double hurst_;
  std::size_t n_steps_;
  double dt_;
  double sqrt_dt_;
  double near_w_;    // loading of W~ on z_w
  double near_aux_;  // loading of W~ on z_aux
  std::vector<double> tail_;  // tail_[k] = (b_k dt)^{H-1/2}, k >= 2
  std::vector<double> variance_;
};

// Standard normal driver pairs (Brownian, nearest-cell auxiliary) per step,
// stored path-major.
struct GaussianDrivers {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::vector<double> z_w;
  std::vector<double> z_aux;
};

GaussianDrivers make_gaussian_drivers(const SimGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                      bool antithetic = false);

struct VolterraPaths {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::vector<double> values;      // n_paths x (n_steps + 1), Y(t_k)
  std::vector<double> increments;  // n_paths x n_steps, Brownian increments

  double value(std::size_t path, std::size_t k) const { return values[path * (n_steps + 1) + k]; }
  double increment(std::size_t path, std::size_t k) const { return increments[path * n_steps + k]; }
};

// The same drivers can be reused to build correlated rate shocks.
VolterraPaths hybrid_scheme_paths(const RoughKernel& kernel, const SimGrid& grid, const GaussianDrivers& drivers);

}  // namespace rfmm
