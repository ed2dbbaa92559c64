#pragma once

// File formats used by the command-line tool.
//
// Curve CSV, header `maturity_years,discount_factor`; the maturities become
// the tenor dates and a (0, 1) row is added when absent.
//
// Surface CSV, header `expiry_years,tenor_years,strike_offset,market_iv`;
// strike_offset is an absolute rate added to the ATM forward swap rate.
//
// Params file: `key = value` lines, `#` comments, arrays comma separated:
//   kappa, hurst         scalars
//   alpha, rho0          one entry per tenor
//   rate_corr            N x N rate correlation block, row major
//   eta                  lognormal | shifted_power
//   eta_delta, eta_beta  shifted_power parameters

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rfmm/calibration.hpp"
#include "rfmm/curve.hpp"
#include "rfmm/fmm.hpp"

namespace rfmm {

// "%.6g" formatting, with -0 printed as 0.
std::string format_number(double x);

DiscountCurve read_curve_csv(const std::filesystem::path& path);
void write_curve_csv(const std::filesystem::path& path, const DiscountCurve& curve);

SwaptionSurface read_surface_csv(const std::filesystem::path& path);
void write_surface_csv(const std::filesystem::path& path, const SwaptionSurface& surface);

struct ModelParams {
  double kappa = 1.0;
  double hurst = 0.5;
  std::vector<double> alpha;
  std::vector<double> rho0;
  std::vector<double> rate_corr;  // row major N x N
  EtaSpec eta = EtaSpec::lognormal();

  static ModelParams from_fmm(const FmmParams& fmm);
  FmmParams to_fmm(const DiscountCurve& curve) const;
};

ModelParams read_params(const std::filesystem::path& path);
void write_params(const std::filesystem::path& path, const ModelParams& params);

// Writes rows of preformatted cells as comma-separated lines.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

struct SwaptionSpec {
  double expiry = 1.0;
  double tenor = 1.0;
};

// JSON run configuration. Relative file paths resolve against the config
// file's directory.
struct RunConfig {
  std::filesystem::path curve;
  std::filesystem::path params;
  std::filesystem::path surface;
  std::filesystem::path out_dir = ".";

  McConfig mc;
  int steps_per_year = 96;

  // price / smile-report
  std::vector<SwaptionSpec> swaptions;
  std::vector<double> strike_offsets{0.0};

  // simulate
  double horizon = 1.0;
  std::vector<double> observation_times;

  // map-smm
  SwaptionSpec map_swaption;

  // calibrate
  std::vector<double> hurst_sweep;
  std::vector<std::size_t> rho_knots{2, 4, 6, 11};
  int calibration_steps_per_year = 24;
  int restarts = 3;

  static RunConfig load(const std::filesystem::path& path);
};

}  // namespace rfmm
