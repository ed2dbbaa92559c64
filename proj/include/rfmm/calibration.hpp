#pragma once

// Two-step calibration of the rough SABR forward market model to a swaption
// surface. Step one fits (kappa, alpha_j, rho_0 knots) to 1Y-tenor smiles
// through the caplet-case mapped swap model; step two fits the rate
// correlations row by row from co-terminal ATM quotes.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rfmm/curve.hpp"
#include "rfmm/fmm.hpp"
#include "rfmm/mc.hpp"
#include "rfmm/optimize.hpp"
#include "rfmm/path_cache.hpp"

namespace rfmm {

// strike = ATM forward swap rate + strike_offset (absolute rate units).
struct SwaptionQuote {
  double expiry = 0.0;
  double tenor = 0.0;
  double strike_offset = 0.0;
  double market_iv = 0.0;
};

class SwaptionSurface {
 public:
  SwaptionSurface() = default;
  explicit SwaptionSurface(std::vector<SwaptionQuote> quotes);

  const std::vector<SwaptionQuote>& quotes() const { return quotes_; }
  bool empty() const { return quotes_.empty(); }
  // Quotes at (expiry, tenor) sorted by strike offset.
  std::vector<SwaptionQuote> smile(double expiry, double tenor) const;
  std::optional<double> atm_iv(double expiry, double tenor) const;
  // Distinct expiries carrying at least `min_strikes` quotes for the tenor.
  std::vector<double> expiries(double tenor, std::size_t min_strikes = 1) const;

 private:
  std::vector<SwaptionQuote> quotes_;
};

// Maps (expiry, tenor) in years to tenor indices (I, J) on the curve's
// dates; throws InputError when either end is not a tenor date.
SwapDefinition swap_for(const TenorStructure& tenor, double expiry, double length);

// Lower-triangular angle matrix over indices 0..N with index 0 the
// volatility factor. Row i has angles omega(i, 0..i-1).
struct CorrelationAngles {
  Eigen::MatrixXd omega;

  // omega(i, 0) = acos(rho0_i), omega(2, 1) = 0, omega(i, 2) = pi/2 for
  // i >= 3, every other angle pi/2. rho0 has N entries (element j-1 = rho_0j).
  static CorrelationAngles constrained(std::span<const double> rho0);
  std::size_t size() const { return static_cast<std::size_t>(omega.rows()) - 1; }
  // Angles of row i that step two may move: omega(i, 1) and omega(i, 3..i-1).
  static std::vector<std::size_t> free_columns(std::size_t row);
};

// Sigma = B B^T with b_ij = cos(omega_ij) prod_{k<j} sin(omega_ik) and
// b_ii = prod_{k<i} sin(omega_ik); row 0 of B is e_0.
Eigen::MatrixXd hypersphere_to_corr(const CorrelationAngles& angles);

// Linear interpolation in the tenor index between knots, flat outside.
// knot_index is 1-based and strictly increasing; values must lie in [-1, 0].
std::vector<double> interpolate_rho0(std::span<const std::size_t> knot_index, std::span<const double> knot_value,
                                     std::size_t n_tenors);

struct CalibrationSettings {
  double hurst = 0.5;
  int steps_per_year = 24;
  McConfig mc;
  std::vector<std::size_t> rho_knots{2, 4, 6, 11};
  EtaSpec eta = EtaSpec::lognormal();
  int restarts = 3;
  double jitter = 0.1;
  NelderMeadOptions nelder_mead{600, 1e-14, 1e-6, 0.1};
  double kappa_lower = 0.01, kappa_upper = 5.0;
  double rho_lower = -0.999, rho_upper = 0.0;
  double angle_lower = 0.01, angle_upper = 3.141592653589793 - 0.01;
};

struct SeparateTenorResult {
  double kappa = 0.0;
  double v0 = 0.0;
  double rho = 0.0;
  double rmse = 0.0;
  // False when kappa ends at its lower bound: the smile carries no
  // information on rho.
  bool rho_identified = true;
};

// Standalone rough Bergomi fit v(t) = v0 exp(kappa^2 t^{2H} / (8H)) to a
// single-expiry smile quoted in log-moneyness. The cache fixes H and the
// random numbers; its kappa is overwritten.
SeparateTenorResult separate_tenor_calibrate(SmmPathCache& cache, double expiry, std::span<const double> ks,
                                             std::span<const double> ivs, const CalibrationSettings& settings);

struct FirstStepResult {
  double kappa = 0.0;
  std::vector<double> alphas;       // N entries, alpha_1 = alpha_2
  std::vector<double> knot_values;  // rho_0 at settings.rho_knots (clipped to N)
  std::vector<double> rho0;         // N interpolated entries
  double rmse = 0.0;                // smile IV root mean square error
  int evaluations = 0;
};

// Optional starting point for the outer search.
struct FirstStepStart {
  double kappa = 1.0;
  std::vector<double> knot_values;
};

FirstStepResult calibrate_first_step(const DiscountCurve& curve, const SwaptionSurface& surface,
                                     const CalibrationSettings& settings,
                                     const std::optional<FirstStepStart>& start = std::nullopt);

// Same as above on a caller-owned cache (random numbers and H taken from it).
FirstStepResult calibrate_first_step(const DiscountCurve& curve, const SwaptionSurface& surface,
                                     const CalibrationSettings& settings, SmmPathCache& cache,
                                     const std::optional<FirstStepStart>& start = std::nullopt);

struct SecondStepResult {
  CorrelationAngles angles;
  Eigen::MatrixXd corr;
  double rmse = 0.0;  // over the co-terminal ATM quotes used
  std::vector<std::size_t> skipped_rows;
};

SecondStepResult calibrate_second_step(const DiscountCurve& curve, const SwaptionSurface& surface,
                                       const FirstStepResult& first, const CalibrationSettings& settings);
SecondStepResult calibrate_second_step(const DiscountCurve& curve, const SwaptionSurface& surface,
                                       const FirstStepResult& first, const CalibrationSettings& settings,
                                       SmmPathCache& cache);

FmmParams assemble_fmm(const DiscountCurve& curve, const FirstStepResult& first, const Eigen::MatrixXd& corr,
                       const CalibrationSettings& settings);

// Mapped swap model implied vols for each quote's (expiry, tenor, offset),
// priced on the cache. Quotes whose price admits no implied vol get NaN.
std::vector<PricingResult> mapped_smm_quotes(const FmmParams& fmm, const DiscountCurve& curve,
                                             std::span<const SwaptionQuote> layout, SmmPathCache& cache);

// Longest expiry needed to price the surface.
double surface_horizon(const SwaptionSurface& surface);

}  // namespace rfmm
