#pragma once

// Rough SABR forward market model. Each forward term rate R^j follows
//   dR^j = eta(R^j) gamma_j(t) sqrt(V^j) dW^j,
//   V^j_t = xi_j(t) exp(Y_t - Var(Y_t)/2),  Y_t = int_0^t zeta(t-s) dW^0_s,
// and all tenors are simulated jointly under the terminal measure Q^{T_N}.

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "rfmm/curve.hpp"
#include "rfmm/kernel.hpp"
#include "rfmm/mc.hpp"

namespace rfmm {

struct EtaSpec {
  enum class Kind { lognormal, shifted_power };
  Kind kind = Kind::lognormal;
  double shift = 0.0;  // delta > 0 for shifted_power
  double beta = 1.0;   // in (0, 1] for shifted_power

  static EtaSpec lognormal() { return {}; }
  static EtaSpec shifted_power(double delta, double beta);

  void validate() const;
  double operator()(double r) const;
  // sup eta(r)/r < infinity; fails for shifted_power with beta < 1. Such
  // specifications are still simulated, the short-maturity expansion simply
  // carries no guarantee for them.
  bool satisfies_regularity() const;
};

class FmmParams {
 public:
  // corr is (N+1) x (N+1) with index 0 the volatility factor.
  FmmParams(TenorStructure tenor, std::vector<double> initial_rates, RoughKernel kernel, std::vector<double> alphas,
            Eigen::MatrixXd corr, EtaSpec eta = EtaSpec::lognormal());

  static FmmParams from_curve(const DiscountCurve& curve, RoughKernel kernel, std::vector<double> alphas,
                              Eigen::MatrixXd corr, EtaSpec eta = EtaSpec::lognormal());

  const TenorStructure& tenor() const { return tenor_; }
  std::size_t size() const { return tenor_.size(); }
  const RoughKernel& kernel() const { return kernel_; }
  const EtaSpec& eta() const { return eta_; }
  const Eigen::MatrixXd& corr() const { return corr_; }
  std::span<const double> initial_rates() const { return initial_rates_; }
  std::span<const double> alphas() const { return alphas_; }

  // 1-based tenor accessors.
  double initial_rate(std::size_t j) const { return initial_rates_.at(j - 1); }
  double alpha(std::size_t j) const { return alphas_.at(j - 1); }
  double rho0(std::size_t j) const { return corr_(0, static_cast<Eigen::Index>(j)); }

  // Lower-triangular factor L with L L^T = corr and L(0, :) = e_0, so the
  // volatility driver is the first Gaussian coordinate.
  const Eigen::MatrixXd& factor() const { return factor_; }

 private:
  void validate() const;

  TenorStructure tenor_;
  std::vector<double> initial_rates_;
  RoughKernel kernel_;
  std::vector<double> alphas_;
  Eigen::MatrixXd corr_;
  EtaSpec eta_;
  Eigen::MatrixXd factor_;
};

// Cholesky factor of a correlation matrix that tolerates singular PSD input
// (zero pivots give zero columns). An indefinite matrix is repaired by
// clipping eigenvalues at 1e-10 and rescaling to unit diagonal, with a
// warning. Throws InputError when the input is not a symmetric matrix with
// unit diagonal.
Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& corr);

// Forward variance xi_j(t), chosen so that E^{T_j}[sqrt(V^j_t)] ~ alpha_j.
double xi_curve(const FmmParams& params, std::size_t j, double t);

// Rates and variances at the requested observation times, stored
// [path][observation][tenor j-1], plus the log of prod_j (1 + theta_j R^j_t)
// / (1 + theta_j R^j_0) per path and observation.
struct FmmPaths {
  std::size_t n_paths = 0;
  std::size_t n_tenors = 0;
  bool antithetic = false;
  std::vector<double> times;
  std::vector<double> rates;
  std::vector<double> variances;
  std::vector<double> log_weights;

  std::size_t observation_index(double t) const;
  double rate(std::size_t path, std::size_t obs, std::size_t j) const {
    return rates[(path * times.size() + obs) * n_tenors + (j - 1)];
  }
  double variance(std::size_t path, std::size_t obs, std::size_t j) const {
    return variances[(path * times.size() + obs) * n_tenors + (j - 1)];
  }
  double log_weight(std::size_t path, std::size_t obs) const { return log_weights[path * times.size() + obs]; }
};

// Log-Euler for the rates, exact exponential for V^j from hybrid-scheme
// Volterra draws, left-point drift and gamma. Per step the Gaussian draws are
// ordered (z_0, z_aux, z_1, ..., z_N). Observation times must be grid points;
// an empty list observes the horizon only.
FmmPaths simulate_fmm(const FmmParams& params, const SimGrid& grid, const McConfig& mc,
                      std::span<const double> observation_times = {});

// Coefficients multiplying d<R^i, X> in the Q* drift of a process X, for
// i = 1..J (element i-1): theta_i/(1+theta_i R^i) for i <= I+1 and
// (sum_{k=i}^J theta_k P(T_k)/A) theta_i/(1+theta_i R^i) for I+2 <= i <= J.
// Bond ratios are rebuilt from the supplied rates.
std::vector<double> drift_qstar_coefficients(const TenorStructure& tenor, std::span<const double> rates,
                                             const SwapDefinition& swap);

}  // namespace rfmm
