#include "rfmm/path_cache.hpp"

#include <algorithm>
#include <limits>
#include <cmath>

#include "rfmm/asymptotics.hpp"
#include "rfmm/errors.hpp"
#include "rfmm/mc.hpp"

namespace rfmm {

SmmPathCache::SmmPathCache(double hurst, double horizon, int steps_per_year, std::size_t n_paths,
                           std::uint64_t seed, unsigned threads, bool antithetic)
    : hurst_(hurst), grid_(horizon, steps_per_year), n_paths_(n_paths), threads_(threads), antithetic_(antithetic) {
  McConfig mc;
  mc.n_paths = n_paths;
  mc.antithetic = antithetic;
  mc.validate();
  const std::size_t n = grid_.steps();
  const HybridScheme scheme(hurst, n, grid_.dt());
  const double sqrt_dt = std::sqrt(grid_.dt());
  y_.resize(n_paths * n);
  dw0_.resize(n_paths * n);
  dwp_.resize(n_paths * n);
  var_.resize(n);
  for (std::size_t k = 0; k < n; ++k) var_[k] = scheme.variance(k);

  // Same draw layout as simulate_smm, so both see identical paths.
  parallel_for(n_paths, resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
    std::vector<double> z(3 * n), zw(n), za(n), dw(n), y(n + 1);
    for (std::size_t p = begin; p < end; ++p) {
      PathRng rng(seed, stream_of(p, antithetic));
      fill_normals(rng, z);
      if (is_mirror(p, antithetic))
        for (double& x : z) x = -x;
      for (std::size_t k = 0; k < n; ++k) {
        zw[k] = z[3 * k];
        za[k] = z[3 * k + 1];
      }
      scheme.generate(zw, za, dw, y);
      for (std::size_t k = 0; k < n; ++k) {
        y_[p * n + k] = y[k];
        dw0_[p * n + k] = dw[k];
        dwp_[p * n + k] = sqrt_dt * z[3 * k + 2];
      }
    }
  });
}

void SmmPathCache::set_kappa(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InputError("SmmPathCache: kappa must be nonnegative");
  if (kappa == kappa_) return;
  kappa_ = kappa;
  const std::size_t n = grid_.steps();
  root_e_.resize(n_paths_ * n);
  std::vector<double> comp(n);
  for (std::size_t k = 0; k < n; ++k) comp[k] = 0.25 * kappa * kappa * var_[k];
  parallel_for(n_paths_, resolve_threads(threads_), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin * n; i < end * n; ++i) root_e_[i] = std::exp(0.5 * kappa * y_[i] - comp[i % n]);
  });
}

PathFunctionals SmmPathCache::functionals(std::span<const double> sqrt_v, double expiry, double vbar) const {
  if (kappa_ < 0.0) throw InputError("SmmPathCache: kappa not set");
  const std::size_t m = grid_.index_of(expiry);
  if (m == 0) throw InputError("SmmPathCache: expiry must be positive");
  if (sqrt_v.size() < m) throw InputError("SmmPathCache: variance curve shorter than the expiry");
  const std::size_t n = grid_.steps();
  const double dt = grid_.dt();
  PathFunctionals f;
  f.t = expiry;
  f.vbar = vbar;
  f.antithetic = antithetic_;
  f.x_par.resize(n_paths_);
  f.x_perp.resize(n_paths_);
  f.quad.resize(n_paths_);
  f.w_par.resize(n_paths_);
  f.w_perp.resize(n_paths_);
  parallel_for(n_paths_, resolve_threads(threads_), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const double* e = &root_e_[p * n];
      const double* a = &dw0_[p * n];
      const double* b = &dwp_[p * n];
      double xa = 0.0, xb = 0.0, q = 0.0, wa = 0.0, wb = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double s = e[k] * sqrt_v[k];
        xa += s * a[k];
        xb += s * b[k];
        q += s * s;
        wa += a[k];
        wb += b[k];
      }
      f.x_par[p] = xa;
      f.x_perp[p] = xb;
      f.quad[p] = q * dt;
      f.w_par[p] = wa;
      f.w_perp[p] = wb;
    }
  });
  return f;
}

PathFunctionals SmmPathCache::functionals(const std::function<double(double)>& v_curve, double expiry) const {
  const std::size_t m = grid_.index_of(expiry);
  std::vector<double> sqrt_v(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double v = v_curve(grid_.time(k));
    if (!(v > 0.0)) throw InputError("SmmPathCache: variance curve must stay positive");
    sqrt_v[k] = std::sqrt(v);
  }
  return functionals(sqrt_v, expiry, v_bar(v_curve, expiry));
}

namespace {

struct Terminal {
  std::vector<double> s, s_cv;
  double sigma_cv = 0.0;
};

Terminal terminal_values(const PathFunctionals& f, double scale, double rho) {
  const std::size_t n = f.x_par.size();
  const double rp = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  Terminal out;
  out.sigma_cv = scale * std::sqrt(f.vbar);
  out.s.resize(n);
  out.s_cv.resize(n);
  const double sc = out.sigma_cv;
  for (std::size_t p = 0; p < n; ++p) {
    out.s[p] = std::exp(scale * (rho * f.x_par[p] + rp * f.x_perp[p]) - 0.5 * scale * scale * f.quad[p]);
    out.s_cv[p] = std::exp(sc * (rho * f.w_par[p] + rp * f.w_perp[p]) - 0.5 * sc * sc * f.t);
  }
  return out;
}

SampleStats otm_stats(const PathFunctionals& f, const Terminal& term, double k, bool control_variate) {
  const bool call = k > 0.0;
  const double ek = std::exp(k);
  const double cv_mean = black_price(k, term.sigma_cv * std::sqrt(f.t), OptionSide::out_of_the_money);
  std::vector<double> pay(term.s.size());
  for (std::size_t p = 0; p < pay.size(); ++p) {
    const double x = call ? std::max(term.s[p] - ek, 0.0) : std::max(ek - term.s[p], 0.0);
    double y = x;
    if (control_variate) {
      const double c = call ? std::max(term.s_cv[p] - ek, 0.0) : std::max(ek - term.s_cv[p], 0.0);
      y -= c - cv_mean;
    }
    pay[p] = y;
  }
  return sample_stats(pay, f.antithetic);
}

}  // namespace

std::vector<PricingResult> price_functionals(const PathFunctionals& f, double scale, double rho,
                                             std::span<const double> ks, bool control_variate) {
  const Terminal term = terminal_values(f, scale, rho);
  std::vector<PricingResult> out;
  out.reserve(ks.size());
  for (double k : ks) {
    const auto st = otm_stats(f, term, k, control_variate);
    PricingResult r;
    r.price = st.mean;
    r.std_error = st.std_error;
    try {
      r.implied_vol = implied_vol(st.mean, k, f.t, OptionSide::out_of_the_money);
      const double vega = black_vega(k, r.implied_vol, f.t);
      r.iv_std_error = vega > 0.0 ? st.std_error / vega : std::numeric_limits<double>::infinity();
    } catch (const ArbitrageError&) {
      r.implied_vol = std::numeric_limits<double>::quiet_NaN();
      r.iv_std_error = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(r);
  }
  return out;
}

double atm_price_functionals(const PathFunctionals& f, double scale, double rho, bool control_variate) {
  const Terminal term = terminal_values(f, scale, rho);
  return otm_stats(f, term, 0.0, control_variate).mean;
}

}  // namespace rfmm
