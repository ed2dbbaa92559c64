#include "rfmm/smm.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "rfmm/errors.hpp"

namespace rfmm {

void SmmParams::validate() const {
  kernel.validate();
  if (!(s0 > 0.0)) throw InputError("SmmParams: s0 must be positive");
  if (!v_curve) throw InputError("SmmParams: missing variance curve");
  if (!(v_curve(0.0) > 0.0)) throw InputError("SmmParams: v(0) must be positive");
  if (!(std::abs(rho) <= 1.0)) throw InputError("SmmParams: |rho| must not exceed 1");
}

std::vector<double> mapping_weights(const FmmParams& fmm, const DiscountCurve& curve, const SwapDefinition& swap) {
  swap.validate(curve.size());
  if (curve.size() != fmm.size()) throw InputError("mapping_weights: curve and model tenor counts differ");
  const auto pi = pi_weights(curve, swap);
  const double s0 = forward_swap_rate(curve, swap);
  if (!(s0 > 0.0)) throw InputError("mapping_weights: forward swap rate must be positive");
  std::vector<double> w(pi.size());
  for (std::size_t m = 0; m < pi.size(); ++m) {
    const std::size_t j = swap.start + 1 + m;
    w[m] = pi[m] * fmm.eta()(forward_term_rate(curve, j)) / s0;
  }
  return w;
}

SmmParams map_fmm_to_smm(const FmmParams& fmm, const DiscountCurve& curve, const SwapDefinition& swap) {
  const auto pi = mapping_weights(fmm, curve, swap);
  auto model = std::make_shared<const FmmParams>(fmm);
  const std::size_t first = swap.start + 1;
  const std::size_t len = swap.length();

  auto v = [model, pi, first, len](double t) {
    std::vector<double> root(len);
    for (std::size_t m = 0; m < len; ++m) root[m] = pi[m] * std::sqrt(xi_curve(*model, first + m, t));
    double acc = 0.0;
    for (std::size_t a = 0; a < len; ++a) {
      const auto ia = static_cast<Eigen::Index>(first + a);
      acc += root[a] * root[a];
      for (std::size_t b = 0; b < a; ++b)
        acc += 2.0 * model->corr()(ia, static_cast<Eigen::Index>(first + b)) * root[a] * root[b];
    }
    return acc;
  };

  const double v0 = v(0.0);
  if (!(v0 > 0.0)) throw InputError("map_fmm_to_smm: v(0) <= 0, the rate correlation block is invalid");
  double num = 0.0;
  for (std::size_t m = 0; m < len; ++m) num += fmm.rho0(first + m) * pi[m] * std::sqrt(xi_curve(fmm, first + m, 0.0));

  SmmParams out;
  out.s0 = forward_swap_rate(curve, swap);
  out.kernel = fmm.kernel();
  out.v_curve = v;
  out.rho = std::clamp(num / std::sqrt(v0), -1.0, 1.0);
  return out;
}

std::size_t SmmPaths::observation_index(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= 1e-10 * std::max(1.0, t)) return i;
  }
  throw InputError("SmmPaths: time " + std::to_string(t) + " was not observed");
}

SmmPaths simulate_smm(const SmmParams& params, const SimGrid& grid, const McConfig& mc,
                      std::span<const double> observation_times) {
  params.validate();
  mc.validate();
  std::vector<double> obs_times(observation_times.begin(), observation_times.end());
  if (obs_times.empty()) obs_times.push_back(grid.horizon());
  std::vector<std::size_t> obs_idx(obs_times.size());
  for (std::size_t o = 0; o < obs_times.size(); ++o) obs_idx[o] = grid.index_of(obs_times[o]);

  const std::size_t steps = grid.steps();
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  const double kappa = params.kernel.kappa;
  const HybridScheme scheme(params.kernel.hurst, steps, dt);
  std::vector<double> v(steps), comp(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    v[k] = params.v(grid.time(k));
    if (!(v[k] > 0.0)) throw InputError("simulate_smm: variance curve must stay positive");
    comp[k] = 0.5 * kappa * kappa * scheme.variance(k);
  }
  const double rho = params.rho;
  const double rho_perp = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  SmmPaths out;
  out.n_paths = mc.n_paths;
  out.antithetic = mc.antithetic;
  out.times = obs_times;
  const std::size_t n_obs = obs_times.size();
  out.log_s.resize(mc.n_paths * n_obs);
  out.w_star.resize(mc.n_paths * n_obs);

  parallel_for(mc.n_paths, resolve_threads(mc.threads), [&](std::size_t begin, std::size_t end) {
    std::vector<double> z(3 * steps), zw(steps), za(steps), dw(steps), y(steps + 1);
    for (std::size_t p = begin; p < end; ++p) {
      PathRng rng(mc.seed, stream_of(p, mc.antithetic));
      fill_normals(rng, z);
      if (is_mirror(p, mc.antithetic))
        for (double& x : z) x = -x;
      for (std::size_t k = 0; k < steps; ++k) {
        zw[k] = z[3 * k];
        za[k] = z[3 * k + 1];
      }
      scheme.generate(zw, za, dw, y);
      double x = 0.0;
      double w = 0.0;
      for (std::size_t o = 0; o < n_obs; ++o)
        if (obs_idx[o] == 0) {
          out.log_s[p * n_obs + o] = 0.0;
          out.w_star[p * n_obs + o] = 0.0;
        }
      for (std::size_t k = 0; k < steps; ++k) {
        const double var = v[k] * std::exp(kappa * y[k] - comp[k]);
        const double dws = rho * dw[k] + rho_perp * sqrt_dt * z[3 * k + 2];
        x += std::sqrt(var) * dws - 0.5 * var * dt;
        w += dws;
        for (std::size_t o = 0; o < n_obs; ++o)
          if (obs_idx[o] == k + 1) {
            out.log_s[p * n_obs + o] = x;
            out.w_star[p * n_obs + o] = w;
          }
      }
    }
  });
  return out;
}

}  // namespace rfmm
