#include "rfmm/calibration.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "rfmm/asymptotics.hpp"
#include "rfmm/errors.hpp"
#include "rfmm/smm.hpp"

namespace rfmm {

namespace {

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

constexpr double kMissingIvPenalty = 1.0;

}  // namespace

SwaptionSurface::SwaptionSurface(std::vector<SwaptionQuote> quotes) : quotes_(std::move(quotes)) {
  for (std::size_t i = 0; i < quotes_.size(); ++i) {
    const auto& q = quotes_[i];
    if (!(q.expiry > 0.0) || !(q.tenor > 0.0))
      throw InputError("SwaptionSurface: quote " + std::to_string(i) + " needs positive expiry and tenor");
    if (!(q.market_iv > 0.0) || !std::isfinite(q.market_iv))
      throw InputError("SwaptionSurface: quote " + std::to_string(i) + " needs a positive implied vol");
  }
}

std::vector<SwaptionQuote> SwaptionSurface::smile(double expiry, double tenor) const {
  std::vector<SwaptionQuote> out;
  for (const auto& q : quotes_)
    if (same_time(q.expiry, expiry) && same_time(q.tenor, tenor)) out.push_back(q);
  std::stable_sort(out.begin(), out.end(),
                   [](const SwaptionQuote& a, const SwaptionQuote& b) { return a.strike_offset < b.strike_offset; });
  return out;
}

std::optional<double> SwaptionSurface::atm_iv(double expiry, double tenor) const {
  for (const auto& q : quotes_)
    if (same_time(q.expiry, expiry) && same_time(q.tenor, tenor) && q.strike_offset == 0.0) return q.market_iv;
  return std::nullopt;
}

std::vector<double> SwaptionSurface::expiries(double tenor, std::size_t min_strikes) const {
  std::vector<double> all;
  for (const auto& q : quotes_)
    if (same_time(q.tenor, tenor)) all.push_back(q.expiry);
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && same_time(all[j], all[i])) ++j;
    if (j - i >= min_strikes) out.push_back(all[i]);
    i = j;
  }
  return out;
}

SwapDefinition swap_for(const TenorStructure& tenor, double expiry, double length) {
  auto find = [&](double t) -> std::size_t {
    for (std::size_t j = 0; j <= tenor.size(); ++j)
      if (same_time(tenor.date(j), t)) return j;
    throw InputError("no tenor date at " + std::to_string(t) + " years");
  };
  SwapDefinition s{find(expiry), find(expiry + length)};
  s.validate(tenor.size());
  return s;
}

CorrelationAngles CorrelationAngles::constrained(std::span<const double> rho0) {
  const std::size_t n = rho0.size();
  CorrelationAngles a;
  a.omega = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1),
                                      std::numbers::pi / 2.0);
  for (std::size_t i = 1; i <= n; ++i) a.omega(static_cast<Eigen::Index>(i), 0) = std::acos(std::clamp(rho0[i - 1], -1.0, 1.0));
  if (n >= 2) a.omega(2, 1) = 0.0;
  return a;
}

std::vector<std::size_t> CorrelationAngles::free_columns(std::size_t row) {
  std::vector<std::size_t> cols;
  if (row < 3) return cols;
  cols.push_back(1);
  for (std::size_t c = 3; c < row; ++c) cols.push_back(c);
  return cols;
}

Eigen::MatrixXd hypersphere_to_corr(const CorrelationAngles& angles) {
  const Eigen::Index n = angles.omega.rows();
  if (n == 0 || angles.omega.cols() != n) throw InputError("hypersphere_to_corr: angle matrix must be square");
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  b(0, 0) = 1.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    double prod = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      b(i, j) = std::cos(angles.omega(i, j)) * prod;
      prod *= std::sin(angles.omega(i, j));
    }
    b(i, i) = prod;
  }
  Eigen::MatrixXd sigma = b * b.transpose();
  for (Eigen::Index i = 0; i < n; ++i) sigma(i, i) = 1.0;
  return sigma;
}

std::vector<double> interpolate_rho0(std::span<const std::size_t> knot_index, std::span<const double> knot_value,
                                     std::size_t n_tenors) {
  if (knot_index.empty() || knot_index.size() != knot_value.size())
    throw InputError("interpolate_rho0: need matching, nonempty knot lists");
  for (std::size_t m = 0; m < knot_index.size(); ++m) {
    if (knot_index[m] < 1) throw InputError("interpolate_rho0: knot indices are 1-based");
    if (m > 0 && knot_index[m] <= knot_index[m - 1]) throw InputError("interpolate_rho0: knots must be increasing");
    if (!(knot_value[m] >= -1.0 && knot_value[m] <= 0.0))
      throw InputError("interpolate_rho0: knot values must lie in [-1, 0]");
  }
  std::vector<double> out(n_tenors);
  for (std::size_t i = 1; i <= n_tenors; ++i) {
    double v;
    if (i <= knot_index.front()) {
      v = knot_value.front();
    } else if (i >= knot_index.back()) {
      v = knot_value.back();
    } else {
      std::size_t m = 1;
      while (knot_index[m] < i) ++m;
      const double w = static_cast<double>(i - knot_index[m - 1]) / static_cast<double>(knot_index[m] - knot_index[m - 1]);
      v = (1.0 - w) * knot_value[m - 1] + w * knot_value[m];
    }
    out[i - 1] = v;
  }
  return out;
}

double surface_horizon(const SwaptionSurface& surface) {
  double h = 0.0;
  for (const auto& q : surface.quotes()) h = std::max(h, q.expiry);
  return h;
}

FmmParams assemble_fmm(const DiscountCurve& curve, const FirstStepResult& first, const Eigen::MatrixXd& corr,
                       const CalibrationSettings& settings) {
  return FmmParams::from_curve(curve, RoughKernel(first.kappa, settings.hurst), first.alphas, corr, settings.eta);
}

std::vector<PricingResult> mapped_smm_quotes(const FmmParams& fmm, const DiscountCurve& curve,
                                             std::span<const SwaptionQuote> layout, SmmPathCache& cache) {
  if (std::abs(cache.hurst() - fmm.kernel().hurst) > 1e-14)
    throw InputError("mapped_smm_quotes: cache and model Hurst exponents differ");
  cache.set_kappa(fmm.kernel().kappa);
  std::vector<PricingResult> out(layout.size());
  std::vector<bool> done(layout.size(), false);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (done[i]) continue;
    const auto swap = swap_for(curve.tenor(), layout[i].expiry, layout[i].tenor);
    const auto smm = map_fmm_to_smm(fmm, curve, swap);
    std::vector<std::size_t> members;
    std::vector<double> ks;
    for (std::size_t m = i; m < layout.size(); ++m) {
      if (done[m] || !same_time(layout[m].expiry, layout[i].expiry) || !same_time(layout[m].tenor, layout[i].tenor))
        continue;
      const double strike = smm.s0 + layout[m].strike_offset;
      if (!(strike > 0.0)) throw InputError("mapped_smm_quotes: strike offset below minus the forward");
      members.push_back(m);
      ks.push_back(std::log(strike / smm.s0));
      done[m] = true;
    }
    const auto f = cache.functionals(smm.v_curve, layout[i].expiry);
    const auto res = price_functionals(f, 1.0, smm.rho, ks);
    for (std::size_t m = 0; m < members.size(); ++m) out[members[m]] = res[m];
  }
  return out;
}

SeparateTenorResult separate_tenor_calibrate(SmmPathCache& cache, double expiry, std::span<const double> ks,
                                             std::span<const double> ivs, const CalibrationSettings& settings) {
  if (ks.size() < 3 || ks.size() != ivs.size()) throw InputError("separate_tenor_calibrate: need >= 3 strikes");
  for (double v : ivs)
    if (!(v > 0.0)) throw InputError("separate_tenor_calibrate: implied vols must be positive");
  const double h = cache.hurst();
  const std::size_t m = cache.grid().index_of(expiry);
  double atm = ivs[0];
  double best_k = std::abs(ks[0]);
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (std::abs(ks[i]) < best_k) {
      best_k = std::abs(ks[i]);
      atm = ivs[i];
    }

  SeparateTenorResult best;
  best.rmse = std::numeric_limits<double>::infinity();
  auto inner = [&](double kappa) {
    cache.set_kappa(kappa);
    auto shape = [&](double t) { return t > 0.0 ? std::exp(kappa * kappa * std::pow(t, 2.0 * h) / (8.0 * h)) : 1.0; };
    std::vector<double> root(m);
    for (std::size_t k = 0; k < m; ++k) root[k] = std::sqrt(shape(cache.grid().time(k)));
    const double vbar = v_bar(shape, expiry);
    const auto f = cache.functionals(root, expiry, vbar);
    auto sse = [&](std::span<const double> x) {
      const auto res = price_functionals(f, x[0], x[1], ks);
      double acc = 0.0;
      for (std::size_t i = 0; i < ks.size(); ++i) {
        const double e = std::isfinite(res[i].implied_vol) ? res[i].implied_vol - ivs[i] : kMissingIvPenalty;
        acc += e * e;
      }
      return acc;
    };
    const Box box{{1e-3, settings.rho_lower}, {3.0, settings.rho_upper}};
    const double s0 = std::clamp(atm / std::sqrt(vbar), 1e-3, 3.0);
    const auto r = nelder_mead(sse, {s0, std::clamp(-0.3, settings.rho_lower, settings.rho_upper)}, box,
                               settings.nelder_mead);
    return std::pair{r.value, r.x};
  };
  auto outer = [&](std::span<const double> x) {
    const auto [value, params] = inner(x[0]);
    if (value < best.rmse * best.rmse * static_cast<double>(ks.size()) || !std::isfinite(best.rmse)) {
      best.kappa = x[0];
      best.v0 = params[0] * params[0];
      best.rho = params[1];
      best.rmse = std::sqrt(value / static_cast<double>(ks.size()));
    }
    return value;
  };
  const Box kbox{{settings.kappa_lower}, {settings.kappa_upper}};
  NelderMeadOptions opts = settings.nelder_mead;
  opts.max_evaluations = std::min(opts.max_evaluations, 120);
  const auto r = nelder_mead(outer, {1.0}, kbox, opts);
  if (!r.converged) throw NumericalError("separate_tenor_calibrate: optimizer did not converge");
  best.rho_identified = best.kappa > settings.kappa_lower + 1e-3 * (settings.kappa_upper - settings.kappa_lower);
  return best;
}

namespace {

struct CapletData {
  std::size_t j = 0;  // tenor index of the single-period rate
  double expiry = 0.0;
  std::optional<double> atm;
  std::vector<double> ks;
  std::vector<double> ivs;
};

std::vector<double> clipped_knots(const CalibrationSettings& settings, std::size_t n) {
  std::vector<double> out;
  for (std::size_t k : settings.rho_knots)
    if (k >= 1 && k <= n) out.push_back(static_cast<double>(k));
  if (out.empty()) out.push_back(static_cast<double>(n));
  return out;
}

// Solves for the scale of sqrt(v) that reproduces the ATM price.
double solve_alpha(const PathFunctionals& f, double rho, double target_iv) {
  const double target = black_call(0.0, target_iv * std::sqrt(f.t));
  auto g = [&](double a) { return atm_price_functionals(f, a, rho) - target; };
  double lo = 0.5 * target_iv / std::sqrt(f.vbar), hi = 2.0 * target_iv / std::sqrt(f.vbar);
  double g_lo = g(lo), g_hi = g(hi);
  for (int i = 0; i < 40 && g_lo > 0.0; ++i) {
    hi = lo;
    g_hi = g_lo;
    lo *= 0.5;
    g_lo = g(lo);
  }
  for (int i = 0; i < 40 && g_hi < 0.0; ++i) {
    lo = hi;
    g_lo = g_hi;
    hi *= 2.0;
    g_hi = g(hi);
  }
  if (g_lo > 0.0 || g_hi < 0.0) throw NumericalError("ATM price cannot be matched");
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  std::uintmax_t iters = 100;
  const auto [a, b] =
      boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi, boost::math::tools::eps_tolerance<double>(40), iters);
  return 0.5 * (a + b);
}

struct FirstStepModel {
  const DiscountCurve& curve;
  const CalibrationSettings& settings;
  SmmPathCache& cache;
  std::vector<CapletData> caplets;  // sorted by decreasing j
  std::vector<std::size_t> knots;
  std::size_t n = 0;

  struct Evaluation {
    std::vector<double> alphas;
    std::vector<double> rho0;
    double sse = 0.0;
    std::size_t count = 0;
  };

  // Functionals of sqrt(xi_j / alpha_j^2), which depends only on later tenors.
  PathFunctionals shape_functionals(double kappa, const Eigen::MatrixXd& corr, std::vector<double> alphas,
                                    std::size_t j, double expiry) const {
    alphas[j - 1] = 1.0;
    const FmmParams model =
        FmmParams::from_curve(curve, RoughKernel(kappa, cache.hurst()), std::move(alphas), corr, settings.eta);
    auto shape = [&](double t) { return xi_curve(model, j, t); };
    const std::size_t m = cache.grid().index_of(expiry);
    std::vector<double> root(m);
    for (std::size_t k = 0; k < m; ++k) root[k] = std::sqrt(shape(cache.grid().time(k)));
    return cache.functionals(root, expiry, v_bar(shape, expiry));
  }

  Evaluation evaluate(double kappa, std::span<const double> knot_values) const {
    Evaluation ev;
    ev.rho0 = interpolate_rho0(knots, knot_values, n);
    cache.set_kappa(kappa);
    const auto corr = hypersphere_to_corr(CorrelationAngles::constrained(ev.rho0));
    ev.alphas.assign(n, 0.2);
    for (const auto& c : caplets)
      if (c.atm) ev.alphas[c.j - 1] = *c.atm;

    std::map<std::size_t, PathFunctionals> smile_f;
    const bool complete = std::all_of(caplets.begin(), caplets.end(), [](const CapletData& c) { return c.atm.has_value(); }) &&
                          caplets.size() == n - 1;
    for (int sweep = 0; sweep < 50; ++sweep) {
      const std::vector<double> previous = ev.alphas;
      for (std::size_t j = n; j >= 2; --j) {
        const auto it = std::find_if(caplets.begin(), caplets.end(), [j](const CapletData& c) { return c.j == j; });
        if (it == caplets.end() || !it->atm) {
          if (j < n) ev.alphas[j - 1] = ev.alphas[j];
          continue;
        }
        auto f = shape_functionals(kappa, corr, ev.alphas, j, it->expiry);
        ev.alphas[j - 1] = solve_alpha(f, ev.rho0[j - 1], *it->atm);
        if (!it->ks.empty()) smile_f[j] = std::move(f);
      }
      if (n >= 2 && std::none_of(caplets.begin(), caplets.end(), [](const CapletData& c) { return c.j == 2 && c.atm; }))
        ev.alphas[1] = ev.alphas[std::min<std::size_t>(2, n - 1)];
      ev.alphas[0] = ev.alphas[1];
      if (complete) break;
      double delta = 0.0;
      for (std::size_t j = 0; j < n; ++j) delta = std::max(delta, std::abs(ev.alphas[j] - previous[j]));
      if (delta < 1e-6) break;
      if (sweep == 49) throw NumericalError("first step: alpha fixed point did not converge in 50 sweeps");
    }

    for (const auto& c : caplets) {
      if (c.ks.empty()) continue;
      if (!smile_f.count(c.j)) smile_f[c.j] = shape_functionals(kappa, corr, ev.alphas, c.j, c.expiry);
      const auto res = price_functionals(smile_f.at(c.j), ev.alphas[c.j - 1], ev.rho0[c.j - 1], c.ks);
      for (std::size_t i = 0; i < c.ks.size(); ++i) {
        const double e = std::isfinite(res[i].implied_vol) ? res[i].implied_vol - c.ivs[i] : kMissingIvPenalty;
        ev.sse += e * e;
        ++ev.count;
      }
    }
    return ev;
  }
};

}  // namespace

FirstStepResult calibrate_first_step(const DiscountCurve& curve, const SwaptionSurface& surface,
                                     const CalibrationSettings& settings, const std::optional<FirstStepStart>& start) {
  if (surface.empty()) throw InputError("calibrate_first_step: empty surface");
  SmmPathCache cache(settings.hurst, surface_horizon(surface), settings.steps_per_year, settings.mc.n_paths,
                     settings.mc.seed, settings.mc.threads, settings.mc.antithetic);
  return calibrate_first_step(curve, surface, settings, cache, start);
}

FirstStepResult calibrate_first_step(const DiscountCurve& curve, const SwaptionSurface& surface,
                                     const CalibrationSettings& settings, SmmPathCache& cache,
                                     const std::optional<FirstStepStart>& start) {
  if (surface.empty()) throw InputError("calibrate_first_step: empty surface");
  const std::size_t n = curve.size();
  const auto& tenor = curve.tenor();

  FirstStepModel model{curve, settings, cache, {}, {}, n};
  for (double k : clipped_knots(settings, n)) model.knots.push_back(static_cast<std::size_t>(k));
  for (std::size_t j = n; j >= 2; --j) {
    CapletData c;
    c.j = j;
    c.expiry = tenor.date(j - 1);
    const double len = tenor.theta(j);
    const double s0 = forward_term_rate(curve, j);
    for (const auto& q : surface.smile(c.expiry, len)) {
      if (q.strike_offset == 0.0) c.atm = q.market_iv;
      if (!(s0 + q.strike_offset > 0.0)) throw InputError("calibrate_first_step: strike below zero");
      c.ks.push_back(std::log((s0 + q.strike_offset) / s0));
      c.ivs.push_back(q.market_iv);
    }
    if (c.ks.size() < 2) {
      // An ATM quote alone pins alpha but does not enter the smile objective.
      c.ks.clear();
      c.ivs.clear();
    }
    if (c.atm || !c.ks.empty()) model.caplets.push_back(std::move(c));
  }
  if (std::none_of(model.caplets.begin(), model.caplets.end(), [](const CapletData& c) { return c.atm.has_value(); }))
    throw InputError("calibrate_first_step: no single-period ATM quotes");
  if (std::none_of(model.caplets.begin(), model.caplets.end(), [](const CapletData& c) { return !c.ks.empty(); }))
    throw InputError("calibrate_first_step: no single-period smiles");

  const std::size_t nk = model.knots.size();
  std::vector<double> x0(1 + nk, -0.3);
  x0[0] = 1.0;
  if (start) {
    x0[0] = start->kappa;
    for (std::size_t i = 0; i < nk && i < start->knot_values.size(); ++i) x0[1 + i] = start->knot_values[i];
  }
  Box box;
  box.lower.assign(1 + nk, settings.rho_lower);
  box.upper.assign(1 + nk, settings.rho_upper);
  box.lower[0] = settings.kappa_lower;
  box.upper[0] = settings.kappa_upper;

  auto objective = [&](std::span<const double> x) {
    try {
      return model.evaluate(x[0], x.subspan(1)).sse;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::max();
    }
  };
  const auto best = nelder_mead_restarts(objective, x0, box, settings.restarts, settings.jitter, settings.mc.seed,
                                         settings.nelder_mead);
  const auto ev = model.evaluate(best.x[0], std::span<const double>(best.x).subspan(1));

  FirstStepResult out;
  out.kappa = best.x[0];
  out.alphas = ev.alphas;
  out.knot_values.assign(best.x.begin() + 1, best.x.end());
  out.rho0 = ev.rho0;
  out.rmse = ev.count > 0 ? std::sqrt(ev.sse / static_cast<double>(ev.count)) : 0.0;
  out.evaluations = best.evaluations;
  return out;
}

SecondStepResult calibrate_second_step(const DiscountCurve& curve, const SwaptionSurface& surface,
                                       const FirstStepResult& first, const CalibrationSettings& settings) {
  SmmPathCache cache(settings.hurst, surface_horizon(surface), settings.steps_per_year, settings.mc.n_paths,
                     settings.mc.seed, settings.mc.threads, settings.mc.antithetic);
  return calibrate_second_step(curve, surface, first, settings, cache);
}

SecondStepResult calibrate_second_step(const DiscountCurve& curve, const SwaptionSurface& surface,
                                       const FirstStepResult& first, const CalibrationSettings& settings,
                                       SmmPathCache& cache) {
  const std::size_t n = curve.size();
  if (first.alphas.size() != n || first.rho0.size() != n)
    throw InputError("calibrate_second_step: first-step output does not match the curve");
  const auto& tenor = curve.tenor();

  SecondStepResult out;
  out.angles = CorrelationAngles::constrained(first.rho0);
  double sse = 0.0;
  std::size_t count = 0;

  for (std::size_t c = 3; c <= n; ++c) {
    std::vector<SwaptionQuote> quotes;
    for (std::size_t i = 1; i + 2 <= c; ++i) {
      const double expiry = tenor.date(i);
      const double length = tenor.date(c) - expiry;
      if (const auto iv = surface.atm_iv(expiry, length)) quotes.push_back({expiry, length, 0.0, *iv});
    }
    if (quotes.empty()) {
      warn("second step: no co-terminal ATM quotes for row " + std::to_string(c) + "; keeping default angles");
      out.skipped_rows.push_back(c);
      continue;
    }
    const auto cols = CorrelationAngles::free_columns(c);
    const auto row = static_cast<Eigen::Index>(c);
    auto sse_row = [&](std::span<const double> x, CorrelationAngles& angles) {
      for (std::size_t m = 0; m < cols.size(); ++m) angles.omega(row, static_cast<Eigen::Index>(cols[m])) = x[m];
      const auto fmm = assemble_fmm(curve, first, hypersphere_to_corr(angles), settings);
      const auto res = mapped_smm_quotes(fmm, curve, quotes, cache);
      double acc = 0.0;
      for (std::size_t q = 0; q < quotes.size(); ++q) {
        const double e =
            std::isfinite(res[q].implied_vol) ? res[q].implied_vol - quotes[q].market_iv : kMissingIvPenalty;
        acc += e * e;
      }
      return acc;
    };
    auto objective = [&](std::span<const double> x) {
      CorrelationAngles trial = out.angles;
      try {
        return sse_row(x, trial);
      } catch (const InputError&) {
        return std::numeric_limits<double>::max();
      }
    };
    std::vector<double> x0(cols.size(), std::numbers::pi / 2.0);
    const Box box{std::vector<double>(cols.size(), settings.angle_lower),
                  std::vector<double>(cols.size(), settings.angle_upper)};
    auto best = nelder_mead_restarts(objective, x0, box, settings.restarts, settings.jitter, settings.mc.seed + c,
                                     settings.nelder_mead);
    // Second start from the previous row's angles, which usually sit close
    // to this row's solution when correlations vary smoothly along the curve.
    if (c > 3) {
      std::vector<double> warm(cols.size());
      for (std::size_t m = 0; m < cols.size(); ++m) {
        const auto col = static_cast<Eigen::Index>(cols[m]);
        warm[m] = col < row - 1 ? out.angles.omega(row - 1, col) : std::numbers::pi / 2.0;
      }
      auto cand = nelder_mead(objective, box.project(std::move(warm)), box, settings.nelder_mead);
      if (cand.value < best.value) best = std::move(cand);
    }
    // A fresh simplex around the incumbent frees vertices collapsed on the box.
    if (auto polish = nelder_mead(objective, best.x, box, settings.nelder_mead); polish.value < best.value)
      best = std::move(polish);
    sse += sse_row(best.x, out.angles);
    count += quotes.size();
  }
  out.corr = hypersphere_to_corr(out.angles);
  out.rmse = count > 0 ? std::sqrt(sse / static_cast<double>(count)) : 0.0;
  return out;
}

}  // namespace rfmm
