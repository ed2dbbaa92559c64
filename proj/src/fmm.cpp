#include "rfmm/fmm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfmm/errors.hpp"

namespace rfmm {

EtaSpec EtaSpec::shifted_power(double delta, double beta) {
  EtaSpec e;
  e.kind = Kind::shifted_power;
  e.shift = delta;
  e.beta = beta;
  e.validate();
  return e;
}

void EtaSpec::validate() const {
  if (kind == Kind::shifted_power) {
    if (!(shift > 0.0)) throw InputError("EtaSpec: shift must be positive");
    if (!(beta > 0.0 && beta <= 1.0)) throw InputError("EtaSpec: beta must lie in (0, 1]");
  }
}

double EtaSpec::operator()(double r) const {
  if (kind == Kind::lognormal) return r;
  return std::pow(std::abs(r + shift), beta);
}

bool EtaSpec::satisfies_regularity() const { return kind == Kind::lognormal || beta == 1.0; }

Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& corr) {
  const Eigen::Index n = corr.rows();
  if (n == 0 || corr.cols() != n) throw InputError("correlation matrix must be square");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(corr(i, i) - 1.0) > 1e-10) throw InputError("correlation matrix must have unit diagonal");
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(corr(i, j) - corr(j, i)) > 1e-10) throw InputError("correlation matrix must be symmetric");
      if (std::abs(corr(i, j)) > 1.0 + 1e-12) throw InputError("correlation entries must lie in [-1, 1]");
    }
  }

  auto try_factor = [n](const Eigen::MatrixXd& a, Eigen::MatrixXd& l) {
    l.setZero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double d = a(j, j);
      for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
      if (d < -1e-10) return false;
      if (d <= 1e-12) {
        // Zero pivot: the remaining column must be (numerically) zero too.
        for (Eigen::Index i = j + 1; i < n; ++i) {
          double s = a(i, j);
          for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
          if (std::abs(s) > 1e-8) return false;
        }
        continue;
      }
      const double p = std::sqrt(d);
      l(j, j) = p;
      for (Eigen::Index i = j + 1; i < n; ++i) {
        double s = a(i, j);
        for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
        l(i, j) = s / p;
      }
    }
    return true;
  };

  Eigen::MatrixXd sym = 0.5 * (corr + corr.transpose());
  Eigen::MatrixXd l;
  if (try_factor(sym, l)) return l;

  warn("correlation matrix is not positive semidefinite; clipping eigenvalues at 1e-10");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(1e-10);
  Eigen::MatrixXd fixed = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::VectorXd scale = fixed.diagonal().cwiseSqrt().cwiseInverse();
  fixed = scale.asDiagonal() * fixed * scale.asDiagonal();
  fixed = 0.5 * (fixed + fixed.transpose());
  if (!try_factor(fixed, l)) throw NumericalError("correlation repair failed");
  return l;
}

FmmParams::FmmParams(TenorStructure tenor, std::vector<double> initial_rates, RoughKernel kernel,
                     std::vector<double> alphas, Eigen::MatrixXd corr, EtaSpec eta)
    : tenor_(std::move(tenor)),
      initial_rates_(std::move(initial_rates)),
      kernel_(kernel),
      alphas_(std::move(alphas)),
      corr_(std::move(corr)),
      eta_(eta) {
  validate();
  factor_ = correlation_factor(corr_);
}

FmmParams FmmParams::from_curve(const DiscountCurve& curve, RoughKernel kernel, std::vector<double> alphas,
                                Eigen::MatrixXd corr, EtaSpec eta) {
  return FmmParams(curve.tenor(), forward_term_rates(curve), kernel, std::move(alphas), std::move(corr), eta);
}

void FmmParams::validate() const {
  const std::size_t n = tenor_.size();
  kernel_.validate();
  eta_.validate();
  if (initial_rates_.size() != n) throw InputError("FmmParams: need one initial rate per tenor");
  if (alphas_.size() != n) throw InputError("FmmParams: need one alpha per tenor");
  for (std::size_t j = 0; j < n; ++j) {
    if (!(initial_rates_[j] > 0.0)) throw InputError("FmmParams: initial rates must be positive");
    if (!(alphas_[j] > 0.0) || !std::isfinite(alphas_[j])) throw InputError("FmmParams: alphas must be positive");
  }
  const auto dim = static_cast<Eigen::Index>(n + 1);
  if (corr_.rows() != dim || corr_.cols() != dim)
    throw InputError("FmmParams: correlation matrix must be (N+1) x (N+1)");
  for (Eigen::Index i = 1; i < dim; ++i) {
    if (corr_(0, i) > 1e-14)
      throw InputError("FmmParams: spot-vol correlations rho_0i must be nonpositive (tenor " + std::to_string(i) + ")");
  }
}

double xi_curve(const FmmParams& params, std::size_t j, double t) {
  const std::size_t n = params.size();
  if (j < 1 || j > n) throw InputError("xi_curve: index out of range");
  if (t < 0.0) throw InputError("xi_curve: t must be nonnegative");
  const auto& k = params.kernel();
  const auto& tenor = params.tenor();
  double drift = 0.0;
  for (std::size_t i = j + 1; i <= n; ++i) {
    const double rho = params.rho0(i);
    if (rho == 0.0) continue;
    const double r = params.initial_rate(i);
    const double th = tenor.theta(i);
    drift += th * params.eta()(r) / (1.0 + th * r) * params.alpha(i) * rho * k.kappa *
             kernel_gamma_integral(k, tenor, i, t);
  }
  const double h = k.hurst;
  const double level = t > 0.0 ? k.kappa * k.kappa * std::pow(t, 2.0 * h) / (8.0 * h) : 0.0;
  const double a = params.alpha(j);
  return a * a * std::exp(level - drift);
}

std::size_t FmmPaths::observation_index(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= 1e-10 * std::max(1.0, t)) return i;
  }
  throw InputError("FmmPaths: time " + std::to_string(t) + " was not observed");
}

FmmPaths simulate_fmm(const FmmParams& params, const SimGrid& grid, const McConfig& mc,
                      std::span<const double> observation_times) {
  mc.validate();
  const std::size_t n = params.size();
  const auto& tenor = params.tenor();
  if (grid.horizon() > tenor.date(n) + 1e-12) throw InputError("simulate_fmm: grid horizon is past T_N");

  std::vector<double> obs_times(observation_times.begin(), observation_times.end());
  if (obs_times.empty()) obs_times.push_back(grid.horizon());
  std::vector<std::size_t> obs_idx(obs_times.size());
  for (std::size_t o = 0; o < obs_times.size(); ++o) obs_idx[o] = grid.index_of(obs_times[o]);

  const std::size_t steps = grid.steps();
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  const double kappa = params.kernel().kappa;
  const HybridScheme scheme(params.kernel().hurst, steps, dt);

  // Deterministic per-step tables.
  std::vector<double> xi(steps * n), gam(steps * n), comp(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = grid.time(k);
    comp[k] = 0.5 * kappa * kappa * scheme.variance(k);
    for (std::size_t j = 1; j <= n; ++j) {
      xi[k * n + j - 1] = xi_curve(params, j, t);
      gam[k * n + j - 1] = gamma_ramp(tenor, j, t);
    }
  }
  std::vector<double> theta(n), log_r0(n), log_one_plus0(n);
  for (std::size_t j = 1; j <= n; ++j) {
    theta[j - 1] = tenor.theta(j);
    log_r0[j - 1] = std::log(params.initial_rate(j));
    log_one_plus0[j - 1] = std::log1p(theta[j - 1] * params.initial_rate(j));
  }
  const Eigen::MatrixXd& l = params.factor();
  const Eigen::MatrixXd& corr = params.corr();
  const EtaSpec eta = params.eta();
  const bool lognormal = eta.kind == EtaSpec::Kind::lognormal;

  FmmPaths out;
  out.n_paths = mc.n_paths;
  out.n_tenors = n;
  out.antithetic = mc.antithetic;
  out.times = obs_times;
  const std::size_t n_obs = obs_times.size();
  out.rates.resize(mc.n_paths * n_obs * n);
  out.variances.resize(mc.n_paths * n_obs * n);
  out.log_weights.resize(mc.n_paths * n_obs);

  const std::size_t width = n + 2;
  parallel_for(mc.n_paths, resolve_threads(mc.threads), [&](std::size_t begin, std::size_t end) {
    std::vector<double> z(steps * width), zw(steps), za(steps), dw(steps), y(steps + 1);
    std::vector<double> log_r(n), r(n), sv(n), shock(n), drift(n), loading(n);
    for (std::size_t p = begin; p < end; ++p) {
      PathRng rng(mc.seed, stream_of(p, mc.antithetic));
      fill_normals(rng, z);
      if (is_mirror(p, mc.antithetic))
        for (double& v : z) v = -v;
      for (std::size_t k = 0; k < steps; ++k) {
        zw[k] = z[k * width];
        za[k] = z[k * width + 1];
      }
      scheme.generate(zw, za, dw, y);

      for (std::size_t j = 0; j < n; ++j) {
        log_r[j] = log_r0[j];
        r[j] = params.initial_rates()[j];
      }
      auto record = [&](std::size_t o, std::size_t k) {
        double lw = 0.0;
        double* rates_out = &out.rates[(p * n_obs + o) * n];
        double* var_out = &out.variances[(p * n_obs + o) * n];
        const double e = std::exp(kappa * y[k] - 0.5 * kappa * kappa * scheme.variance(k));
        const double t = grid.time(k);
        for (std::size_t j = 0; j < n; ++j) {
          rates_out[j] = r[j];
          var_out[j] = xi_curve(params, j + 1, t) * e;
          lw += std::log1p(theta[j] * r[j]) - log_one_plus0[j];
        }
        out.log_weights[p * n_obs + o] = lw;
      };
      for (std::size_t o = 0; o < n_obs; ++o)
        if (obs_idx[o] == 0) record(o, 0);

      for (std::size_t k = 0; k < steps; ++k) {
        const double* zk = &z[k * width];
        const double e = std::exp(kappa * y[k] - comp[k]);
        for (std::size_t j = 0; j < n; ++j) {
          sv[j] = std::sqrt(xi[k * n + j] * e);
          // Rate factor j+1 = L(j+1, 0) z_0 + sum_{m=1}^{j+1} L(j+1, m) z_m.
          const auto row = static_cast<Eigen::Index>(j + 1);
          double s = l(row, 0) * zk[0];
          for (Eigen::Index m = 1; m <= row; ++m) s += l(row, m) * zk[m + 1];
          shock[j] = s * sqrt_dt;
          const double et = eta(r[j]);
          loading[j] = theta[j] * gam[k * n + j] * et * sv[j] / (1.0 + theta[j] * r[j]);
        }
        // Q^{T_N} drift: sum_{i>j} theta_i gamma_i eta_i sqrt(V^i) rho_ij / (1 + theta_i R^i).
        for (std::size_t j = 0; j < n; ++j) {
          double mu = 0.0;
          for (std::size_t i = j + 1; i < n; ++i)
            mu += loading[i] * corr(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(j + 1));
          drift[j] = mu;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double g = gam[k * n + j];
          if (g == 0.0) continue;
          const double f = (lognormal ? 1.0 : eta(r[j]) / r[j]) * g * sv[j];
          log_r[j] += f * (shock[j] - drift[j] * dt) - 0.5 * f * f * dt;
          r[j] = std::exp(log_r[j]);
        }
        for (std::size_t o = 0; o < n_obs; ++o)
          if (obs_idx[o] == k + 1) record(o, k + 1);
      }
    }
  });
  return out;
}

std::vector<double> drift_qstar_coefficients(const TenorStructure& tenor, std::span<const double> rates,
                                             const SwapDefinition& swap) {
  const std::size_t n = tenor.size();
  swap.validate(n);
  if (rates.size() != n) throw InputError("drift_qstar_coefficients: need one rate per tenor");
  // Bond prices relative to P(T_I).
  std::vector<double> bond(swap.end + 1, 1.0);
  for (std::size_t k = swap.start + 1; k <= swap.end; ++k)
    bond[k] = bond[k - 1] / (1.0 + tenor.theta(k) * rates[k - 1]);
  double a = 0.0;
  for (std::size_t k = swap.start + 1; k <= swap.end; ++k) a += tenor.theta(k) * bond[k];

  std::vector<double> coef(swap.end);
  double tail = a;  // sum_{k=i}^{J} theta_k P(T_k), maintained for i >= I+1
  for (std::size_t i = 1; i <= swap.end; ++i) {
    const double th = tenor.theta(i);
    const double base = th / (1.0 + th * rates[i - 1]);
    if (i <= swap.start + 1) {
      coef[i - 1] = base;
    } else {
      tail -= tenor.theta(i - 1) * bond[i - 1];
      coef[i - 1] = tail / a * base;
    }
  }
  return coef;
}

}  // namespace rfmm
