#include "rfmm/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rfmm/errors.hpp"

namespace rfmm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, sep)) out.push_back(trim(cell));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

double parse_double(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw InputError(where(path, line) + "not a number: '" + cell + "'");
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

// Reads a CSV with the exact header, returning numeric rows and their line numbers.
std::vector<std::pair<std::size_t, std::vector<double>>> read_numeric_csv(const std::filesystem::path& path,
                                                                          const std::vector<std::string>& header) {
  auto in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = split(t, ',');
    if (!have_header) {
      if (cells != header) {
        std::string expected;
        for (std::size_t i = 0; i < header.size(); ++i) expected += (i ? "," : "") + header[i];
        throw InputError(where(path, lineno) + "expected header '" + expected + "'");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != header.size())
      throw InputError(where(path, lineno) + "expected " + std::to_string(header.size()) + " columns");
    std::vector<double> vals;
    for (const auto& c : cells) vals.push_back(parse_double(c, path, lineno));
    rows.emplace_back(lineno, std::move(vals));
  }
  if (!have_header) throw InputError(path.string() + ": empty file");
  return rows;
}

std::vector<double> parse_array(const std::string& v, const std::filesystem::path& path, std::size_t line) {
  std::vector<double> out;
  for (const auto& c : split(v, ',')) out.push_back(parse_double(c, path, line));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
  return s;
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

DiscountCurve read_curve_csv(const std::filesystem::path& path) {
  const auto rows = read_numeric_csv(path, {"maturity_years", "discount_factor"});
  std::vector<double> dates, dfs;
  for (const auto& [line, r] : rows) {
    if (!dates.empty() && !(r[0] > dates.back()))
      throw InputError(where(path, line) + "maturities must be strictly increasing");
    if (!(r[1] > 0.0)) throw InputError(where(path, line) + "discount factors must be positive");
    if (dates.empty() && r[0] != 0.0) {
      if (!(r[0] > 0.0)) throw InputError(where(path, line) + "maturities must be nonnegative");
      dates.push_back(0.0);
      dfs.push_back(1.0);
    }
    if (r[0] == 0.0 && std::abs(r[1] - 1.0) > 1e-14)
      throw InputError(where(path, line) + "discount factor at maturity 0 must be 1");
    dates.push_back(r[0]);
    dfs.push_back(r[1]);
  }
  try {
    return DiscountCurve(TenorStructure(std::move(dates)), std::move(dfs));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_curve_csv(const std::filesystem::path& path, const DiscountCurve& curve) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j <= curve.size(); ++j)
    rows.push_back({format_number(curve.tenor().date(j)), format_number(curve.discount(j))});
  write_csv(path, {"maturity_years", "discount_factor"}, rows);
}

SwaptionSurface read_surface_csv(const std::filesystem::path& path) {
  const auto rows = read_numeric_csv(path, {"expiry_years", "tenor_years", "strike_offset", "market_iv"});
  std::vector<SwaptionQuote> quotes;
  for (const auto& [line, r] : rows) {
    if (!(r[0] > 0.0) || !(r[1] > 0.0)) throw InputError(where(path, line) + "expiry and tenor must be positive");
    if (!(r[3] > 0.0)) throw InputError(where(path, line) + "market_iv must be positive");
    quotes.push_back({r[0], r[1], r[2], r[3]});
  }
  return SwaptionSurface(std::move(quotes));
}

void write_surface_csv(const std::filesystem::path& path, const SwaptionSurface& surface) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& q : surface.quotes())
    rows.push_back({format_number(q.expiry), format_number(q.tenor), format_number(q.strike_offset),
                    format_number(q.market_iv)});
  write_csv(path, {"expiry_years", "tenor_years", "strike_offset", "market_iv"}, rows);
}

ModelParams ModelParams::from_fmm(const FmmParams& fmm) {
  ModelParams p;
  p.kappa = fmm.kernel().kappa;
  p.hurst = fmm.kernel().hurst;
  p.alpha.assign(fmm.alphas().begin(), fmm.alphas().end());
  const std::size_t n = fmm.size();
  for (std::size_t j = 1; j <= n; ++j) p.rho0.push_back(fmm.rho0(j));
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      p.rate_corr.push_back(fmm.corr()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  p.eta = fmm.eta();
  return p;
}

FmmParams ModelParams::to_fmm(const DiscountCurve& curve) const {
  const std::size_t n = curve.size();
  if (alpha.size() != n) throw InputError("params: alpha needs " + std::to_string(n) + " entries");
  if (rho0.size() != n) throw InputError("params: rho0 needs " + std::to_string(n) + " entries");
  if (rate_corr.size() != n * n) throw InputError("params: rate_corr needs " + std::to_string(n * n) + " entries");
  const auto dim = static_cast<Eigen::Index>(n + 1);
  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(dim, dim);
  for (std::size_t i = 1; i <= n; ++i) {
    corr(0, static_cast<Eigen::Index>(i)) = corr(static_cast<Eigen::Index>(i), 0) = rho0[i - 1];
    for (std::size_t j = 1; j <= n; ++j)
      corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rate_corr[(i - 1) * n + (j - 1)];
  }
  return FmmParams::from_curve(curve, RoughKernel(kappa, hurst), alpha, corr, eta);
}

ModelParams read_params(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::map<std::string, std::pair<std::size_t, std::string>> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InputError(where(path, lineno) + "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    if (kv.count(key)) throw InputError(where(path, lineno) + "duplicate key '" + key + "'");
    kv[key] = {lineno, trim(t.substr(eq + 1))};
  }
  static const std::vector<std::string> known{"kappa", "hurst", "alpha", "rho0", "rate_corr", "eta", "eta_delta", "eta_beta"};
  for (const auto& [key, v] : kv)
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw InputError(where(path, v.first) + "unknown key '" + key + "'");
  for (const char* required : {"kappa", "hurst", "alpha", "rho0", "rate_corr"})
    if (!kv.count(required)) throw InputError(path.string() + ": missing key '" + required + "'");

  auto scalar = [&](const std::string& key) { return parse_double(kv[key].second, path, kv[key].first); };
  ModelParams p;
  p.kappa = scalar("kappa");
  p.hurst = scalar("hurst");
  p.alpha = parse_array(kv["alpha"].second, path, kv["alpha"].first);
  p.rho0 = parse_array(kv["rho0"].second, path, kv["rho0"].first);
  p.rate_corr = parse_array(kv["rate_corr"].second, path, kv["rate_corr"].first);
  if (kv.count("eta")) {
    const auto& [line_no, value] = kv["eta"];
    if (value == "shifted_power") {
      if (!kv.count("eta_delta") || !kv.count("eta_beta"))
        throw InputError(where(path, line_no) + "shifted_power needs eta_delta and eta_beta");
      try {
        p.eta = EtaSpec::shifted_power(scalar("eta_delta"), scalar("eta_beta"));
      } catch (const InputError& e) {
        throw InputError(where(path, line_no) + e.what());
      }
    } else if (value != "lognormal") {
      throw InputError(where(path, line_no) + "eta must be 'lognormal' or 'shifted_power'");
    }
  }
  return p;
}

void write_params(const std::filesystem::path& path, const ModelParams& p) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "kappa = " << format_number(p.kappa) << "\n";
  out << "hurst = " << format_number(p.hurst) << "\n";
  out << "alpha = " << join(p.alpha) << "\n";
  out << "rho0 = " << join(p.rho0) << "\n";
  out << "rate_corr = " << join(p.rate_corr) << "\n";
  if (p.eta.kind == EtaSpec::Kind::lognormal) {
    out << "eta = lognormal\n";
  } else {
    out << "eta = shifted_power\n";
    out << "eta_delta = " << format_number(p.eta.shift) << "\n";
    out << "eta_beta = " << format_number(p.eta.beta) << "\n";
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  auto put = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << "\n";
  };
  put(header);
  for (const auto& r : rows) put(r);
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  static const std::vector<std::string> top{"curve", "params", "surface", "out_dir", "mc", "price", "simulate",
                                            "map_smm", "calibrate"};
  RunConfig c;
  try {
    if (!j.is_object()) throw InputError("top level must be an object");
    for (const auto& [key, _] : j.items())
      if (std::find(top.begin(), top.end(), key) == top.end()) throw InputError("unknown key '" + key + "'");
    if (j.contains("curve")) c.curve = resolve(j.at("curve").get<std::string>());
    if (j.contains("params")) c.params = resolve(j.at("params").get<std::string>());
    if (j.contains("surface")) c.surface = resolve(j.at("surface").get<std::string>());
    if (j.contains("out_dir")) c.out_dir = resolve(j.at("out_dir").get<std::string>());
    if (j.contains("mc")) {
      const auto& m = j.at("mc");
      c.mc.n_paths = m.value("n_paths", c.mc.n_paths);
      c.mc.seed = m.value("seed", c.mc.seed);
      c.mc.antithetic = m.value("antithetic", c.mc.antithetic);
      c.mc.control_variate = m.value("control_variate", c.mc.control_variate);
      c.mc.regression_beta = m.value("regression_beta", c.mc.regression_beta);
      c.mc.threads = m.value("threads", c.mc.threads);
      c.steps_per_year = m.value("steps_per_year", c.steps_per_year);
    }
    if (j.contains("price")) {
      const auto& p = j.at("price");
      if (p.contains("swaptions")) {
        c.swaptions.clear();
        for (const auto& s : p.at("swaptions")) c.swaptions.push_back({s.at("expiry").get<double>(), s.at("tenor").get<double>()});
      }
      c.strike_offsets = p.value("strike_offsets", c.strike_offsets);
    }
    if (j.contains("simulate")) {
      const auto& s = j.at("simulate");
      c.horizon = s.value("horizon", c.horizon);
      c.observation_times = s.value("observation_times", c.observation_times);
    }
    if (j.contains("map_smm")) {
      const auto& s = j.at("map_smm");
      c.map_swaption = {s.at("expiry").get<double>(), s.at("tenor").get<double>()};
    }
    if (j.contains("calibrate")) {
      const auto& s = j.at("calibrate");
      if (s.contains("hurst")) {
        const auto& h = s.at("hurst");
        c.hurst_sweep = h.is_number() ? std::vector<double>{h.get<double>()} : h.get<std::vector<double>>();
      }
      c.rho_knots = s.value("rho_knots", c.rho_knots);
      c.calibration_steps_per_year = s.value("steps_per_year", c.calibration_steps_per_year);
      c.restarts = s.value("restarts", c.restarts);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  if (c.steps_per_year < 1 || c.calibration_steps_per_year < 1)
    throw InputError(path.string() + ": steps_per_year must be positive");
  if (c.restarts < 0) throw InputError(path.string() + ": restarts must be nonnegative");
  return c;
}

}  // namespace rfmm
