// rfmm: command-line front end for the rough SABR forward market model.
//
//   rfmm price        --config run.json   FMM / mapped SMM / asymptotic IVs
//   rfmm calibrate    --config run.json   two-step calibration, one run per H
//   rfmm simulate     --config run.json   FMM path summary statistics
//   rfmm map-smm      --config run.json   mapped variance curve of one swaption
//   rfmm smile-report --config run.json   model vs market smiles, one CSV each
//
// Seed and thread count resolve as flag > RFMM_SEED / RFMM_THREADS > config.
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rfmm/asymptotics.hpp"
#include "rfmm/calibration.hpp"
#include "rfmm/errors.hpp"
#include "rfmm/io.hpp"
#include "rfmm/path_cache.hpp"
#include "rfmm/pricing.hpp"
#include "rfmm/smm.hpp"

namespace fs = std::filesystem;
using namespace rfmm;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
};

template <class T>
std::optional<T> env_number(const char* name) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument(raw);
    return static_cast<T>(v);
  } catch (const std::exception&) {
    throw InputError(std::string(name) + ": not a nonnegative integer: '" + raw + "'");
  }
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig cfg = RunConfig::load(flags.config);
  if (auto s = env_number<std::uint64_t>("RFMM_SEED")) cfg.mc.seed = *s;
  if (auto t = env_number<unsigned>("RFMM_THREADS")) cfg.mc.threads = *t;
  if (flags.seed) cfg.mc.seed = *flags.seed;
  if (flags.threads) cfg.mc.threads = *flags.threads;
  if (flags.out) cfg.out_dir = *flags.out;
  cfg.mc.validate();
  return cfg;
}

void require(const fs::path& p, const char* what) {
  if (p.empty()) throw InputError(std::string("config: '") + what + "' is required for this command");
}

fs::path prepare_out(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  return cfg.out_dir;
}

std::string fmt(double x) { return std::isnan(x) ? "nan" : format_number(x); }

void print_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) std::cout << (i ? "\t" : "") << header[i];
  std::cout << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) std::cout << (i ? "\t" : "") << r[i];
    std::cout << '\n';
  }
}

struct ModelQuote {
  PricingResult fmm, smm;
  double asymptotic = 0.0;
  double strike = 0.0;
};

// Prices one (expiry, tenor) smile in both models from a single simulation each.
std::vector<ModelQuote> price_smile(const FmmParams& fmm, const DiscountCurve& curve, const RunConfig& cfg,
                                    double expiry, double length, const std::vector<double>& offsets) {
  const SwapDefinition swap = swap_for(curve.tenor(), expiry, length);
  const double s0 = forward_swap_rate(curve, swap);
  const SimGrid grid(expiry, cfg.steps_per_year);
  const std::vector<double> obs{expiry};
  const FmmPaths fpaths = simulate_fmm(fmm, grid, cfg.mc, obs);
  const SmmParams smm = map_fmm_to_smm(fmm, curve, swap);
  const auto asym = AsymptoticInputs::from_smm(smm);

  std::vector<double> ks;
  for (double off : offsets) {
    const double strike = s0 + off;
    if (!(strike > 0.0)) throw InputError("strike offset " + format_number(off) + " gives a nonpositive strike");
    ks.push_back(std::log(strike / s0));
  }
  const auto smm_res = mc_price_smile_smm(smm, ks, expiry, grid, cfg.mc);

  std::vector<ModelQuote> out;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    ModelQuote q;
    q.strike = s0 + offsets[i];
    q.fmm = mc_price_swaption_fmm(fpaths, curve, swap, q.strike, expiry, OptionSide::out_of_the_money,
                                  cfg.mc.control_variate);
    q.smm = smm_res[i];
    q.asymptotic = asymptotic_iv(asym, ks[i], expiry);
    out.push_back(q);
  }
  return out;
}

int cmd_price(const RunConfig& cfg) {
  require(cfg.curve, "curve");
  require(cfg.params, "params");
  if (cfg.swaptions.empty()) throw InputError("config: price.swaptions is empty");
  const DiscountCurve curve = read_curve_csv(cfg.curve);
  const FmmParams fmm = read_params(cfg.params).to_fmm(curve);

  std::vector<std::vector<std::string>> rows;
  for (const auto& sw : cfg.swaptions) {
    for (const auto& q : price_smile(fmm, curve, cfg, sw.expiry, sw.tenor, cfg.strike_offsets))
      rows.push_back({fmt(sw.expiry), fmt(sw.tenor), fmt(q.strike), fmt(q.fmm.implied_vol), fmt(q.fmm.iv_std_error),
                      fmt(q.smm.implied_vol), fmt(q.smm.iv_std_error), fmt(q.asymptotic)});
  }
  const std::vector<std::string> header{"expiry", "tenor", "strike", "fmm_iv", "fmm_se", "smm_iv", "smm_se",
                                        "asymptotic_iv"};
  write_csv(prepare_out(cfg) / "price.csv", header, rows);
  print_table(header, rows);
  return 0;
}

int cmd_smile_report(const RunConfig& cfg) {
  require(cfg.curve, "curve");
  require(cfg.params, "params");
  require(cfg.surface, "surface");
  const DiscountCurve curve = read_curve_csv(cfg.curve);
  const FmmParams fmm = read_params(cfg.params).to_fmm(curve);
  const SwaptionSurface surface = read_surface_csv(cfg.surface);
  if (surface.empty()) throw InputError(cfg.surface.string() + ": surface has no quotes");

  std::map<std::pair<double, double>, bool> pairs;
  for (const auto& q : surface.quotes()) pairs[{q.expiry, q.tenor}] = true;

  const fs::path out = prepare_out(cfg);
  const std::vector<std::string> header{"strike", "market_iv", "fmm_iv", "fmm_se", "smm_iv", "smm_se"};
  for (const auto& [key, _] : pairs) {
    const auto [expiry, tenor] = key;
    const auto smile = surface.smile(expiry, tenor);
    std::vector<double> offsets;
    for (const auto& q : smile) offsets.push_back(q.strike_offset);
    const auto priced = price_smile(fmm, curve, cfg, expiry, tenor, offsets);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < smile.size(); ++i)
      rows.push_back({fmt(priced[i].strike), fmt(smile[i].market_iv), fmt(priced[i].fmm.implied_vol),
                      fmt(priced[i].fmm.iv_std_error), fmt(priced[i].smm.implied_vol), fmt(priced[i].smm.iv_std_error)});
    const std::string name = "smile_E" + format_number(expiry) + "_T" + format_number(tenor) + ".csv";
    write_csv(out / name, header, rows);
    std::cout << name << '\n';
    print_table(header, rows);
  }
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  require(cfg.curve, "curve");
  require(cfg.params, "params");
  const DiscountCurve curve = read_curve_csv(cfg.curve);
  const FmmParams fmm = read_params(cfg.params).to_fmm(curve);
  const SimGrid grid(cfg.horizon, cfg.steps_per_year);
  const FmmPaths paths = simulate_fmm(fmm, grid, cfg.mc, cfg.observation_times);

  // Means under Q^{T_N} and under Q^{T_j}, the latter through the
  // Radon-Nikodym weight prod_{i>j} (1 + theta_i R^i_t) / (1 + theta_i R^i_0).
  std::vector<std::vector<std::string>> rows;
  const std::size_t n = fmm.size();
  const auto& tenor = fmm.tenor();
  std::vector<double> r(paths.n_paths), v(paths.n_paths), wr(paths.n_paths), w(paths.n_paths);
  for (std::size_t o = 0; o < paths.times.size(); ++o) {
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t p = 0; p < paths.n_paths; ++p) {
        double lw = 0.0;
        for (std::size_t i = j + 1; i <= n; ++i)
          lw += std::log((1.0 + tenor.theta(i) * paths.rate(p, o, i)) / (1.0 + tenor.theta(i) * fmm.initial_rate(i)));
        r[p] = paths.rate(p, o, j);
        v[p] = paths.variance(p, o, j);
        w[p] = std::exp(lw);
        wr[p] = w[p] * r[p];
      }
      const auto rs = sample_stats(r, paths.antithetic), vs = sample_stats(v, paths.antithetic);
      const auto ws = sample_stats(w, paths.antithetic), wrs = sample_stats(wr, paths.antithetic);
      rows.push_back({fmt(paths.times[o]), std::to_string(j), fmt(fmm.initial_rate(j)), fmt(rs.mean),
                      fmt(rs.std_error), fmt(wrs.mean), fmt(wrs.std_error), fmt(ws.mean), fmt(ws.std_error),
                      fmt(vs.mean), fmt(vs.std_error)});
    }
  }
  const std::vector<std::string> header{"time",         "tenor",         "initial_rate", "rate_mean_terminal",
                                        "rate_se_terminal", "rate_mean_forward", "rate_se_forward", "weight_mean",
                                        "weight_se",    "variance_mean", "variance_se"};
  write_csv(prepare_out(cfg) / "simulate.csv", header, rows);
  print_table(header, rows);
  return 0;
}

int cmd_map_smm(const RunConfig& cfg) {
  require(cfg.curve, "curve");
  require(cfg.params, "params");
  const DiscountCurve curve = read_curve_csv(cfg.curve);
  const FmmParams fmm = read_params(cfg.params).to_fmm(curve);
  const SwapDefinition swap = swap_for(curve.tenor(), cfg.map_swaption.expiry, cfg.map_swaption.tenor);
  const SmmParams smm = map_fmm_to_smm(fmm, curve, swap);

  const double expiry = cfg.map_swaption.expiry;
  const std::size_t points = static_cast<std::size_t>(std::llround(256.0 * expiry));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k <= points; ++k) {
    const double t = expiry * static_cast<double>(k) / static_cast<double>(points);
    rows.push_back({fmt(t), fmt(smm.v(t)), fmt(v_bar(smm.v_curve, t))});
  }
  const fs::path out = prepare_out(cfg);
  write_csv(out / "map_smm.csv", {"t", "v", "vbar"}, rows);

  const std::vector<std::string> sh{"expiry", "tenor", "s0", "rho", "psi", "kappa", "hurst"};
  const std::vector<std::vector<std::string>> srow{{fmt(expiry), fmt(cfg.map_swaption.tenor), fmt(smm.s0),
                                                    fmt(smm.rho), fmt(psi(smm)), fmt(smm.kernel.kappa),
                                                    fmt(smm.kernel.hurst)}};
  write_csv(out / "map_smm_summary.csv", sh, srow);
  print_table(sh, srow);
  return 0;
}

int cmd_calibrate(const RunConfig& cfg) {
  require(cfg.curve, "curve");
  require(cfg.surface, "surface");
  const DiscountCurve curve = read_curve_csv(cfg.curve);
  const SwaptionSurface surface = read_surface_csv(cfg.surface);
  if (surface.empty()) throw InputError(cfg.surface.string() + ": surface has no quotes");

  std::vector<double> hursts = cfg.hurst_sweep;
  if (hursts.empty()) hursts.push_back(0.5);

  CalibrationSettings settings;
  settings.steps_per_year = cfg.calibration_steps_per_year;
  settings.mc = cfg.mc;
  settings.rho_knots = cfg.rho_knots;
  settings.restarts = cfg.restarts;
  const double horizon = surface_horizon(surface);

  struct Run {
    double hurst;
    FirstStepResult first;
    SecondStepResult second;
    ModelParams params;
  };
  std::vector<Run> runs;
  for (double h : hursts) {
    settings.hurst = h;
    SmmPathCache cache(h, horizon, settings.steps_per_year, cfg.mc.n_paths, cfg.mc.seed, cfg.mc.threads,
                       cfg.mc.antithetic);
    auto first = calibrate_first_step(curve, surface, settings, cache);
    auto second = calibrate_second_step(curve, surface, first, settings, cache);
    for (std::size_t row : second.skipped_rows)
      warn("H=" + format_number(h) + ": correlation row " + std::to_string(row) + " has no quotes, left at its start");
    const FmmParams fmm = assemble_fmm(curve, first, second.corr, settings);
    runs.push_back({h, std::move(first), std::move(second), ModelParams::from_fmm(fmm)});
  }

  // Everything is written only after every run succeeded.
  const fs::path out = prepare_out(cfg);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : runs) {
    const std::string name =
        runs.size() == 1 ? std::string("fmm_params.txt") : "fmm_params_H" + format_number(r.hurst) + ".txt";
    write_params(out / name, r.params);
    rows.push_back({fmt(r.hurst), fmt(r.first.kappa), fmt(r.first.rmse), fmt(r.second.rmse),
                    std::to_string(r.first.evaluations), std::to_string(r.second.skipped_rows.size()), name});
  }
  const std::vector<std::string> header{"hurst", "kappa", "rmse_step1", "rmse_step2", "step1_evaluations",
                                        "step2_skipped_rows", "params_file"};
  write_csv(out / "calibration_report.csv", header, rows);
  print_table(header, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rough SABR forward market model: pricing, simulation and calibration"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const Command commands[] = {
      {"price", "Swaption implied vols from the FMM, the mapped SMM and the short-maturity formula", cmd_price},
      {"calibrate", "Two-step calibration to a swaption surface", cmd_calibrate},
      {"simulate", "Simulate the FMM and summarize rates, weights and variances", cmd_simulate},
      {"map-smm", "Mapped SMM variance curve and correlation for one swaption", cmd_map_smm},
      {"smile-report", "Model and market smiles for every surface slice", cmd_smile_report},
  };

  CommonFlags flags;
  int (*selected)(const RunConfig&) = nullptr;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", flags.config, "JSON run configuration")->required();
    sub->add_option("--seed", flags.seed, "Master seed (overrides RFMM_SEED and the config)");
    sub->add_option("--threads", flags.threads, "Worker threads, 0 = all cores (overrides RFMM_THREADS)");
    sub->add_option("--out", flags.out, "Output directory");
    sub->callback([&selected, run = c.run] { selected = run; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return selected(resolve_config(flags));
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const ArbitrageError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}
