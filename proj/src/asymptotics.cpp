#include "rfmm/asymptotics.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "rfmm/errors.hpp"

namespace rfmm {

double v_bar(const std::function<double(double)>& v_curve, double t) {
  if (t < 0.0) throw InputError("v_bar: t must be nonnegative");
  if (t == 0.0) return v_curve(0.0);
  return boost::math::quadrature::gauss<double, 64>::integrate([&](double s) { return v_curve(t * s); }, 0.0, 1.0);
}

namespace {
double hurst_factor(double h) { return (2.0 * h + 1.0) * (h + 1.5); }
}  // namespace

double psi(const FmmParams& fmm, const DiscountCurve& curve, const SwapDefinition& swap) {
  const auto pi = mapping_weights(fmm, curve, swap);
  const auto smm = map_fmm_to_smm(fmm, curve, swap);
  const double v0 = smm.v(0.0);
  double sum = 0.0;
  for (std::size_t m = 0; m < pi.size(); ++m) {
    const std::size_t j = swap.start + 1 + m;
    sum += fmm.rho0(j) * pi[m] * std::sqrt(xi_curve(fmm, j, 0.0));
  }
  return fmm.kernel().kappa / (hurst_factor(fmm.kernel().hurst) * v0) * sum;
}

double psi(const SmmParams& smm) {
  const double v0 = smm.v(0.0);
  if (!(v0 > 0.0)) throw InputError("psi: v(0) must be positive");
  return smm.kernel.kappa * smm.rho / (hurst_factor(smm.kernel.hurst) * std::sqrt(v0));
}

AsymptoticInputs AsymptoticInputs::from_smm(const SmmParams& smm) { return {smm.v_curve, rfmm::psi(smm), smm.kernel}; }

double asymptotic_iv(const AsymptoticInputs& inputs, double k, double t) {
  if (!(t > 0.0)) throw InputError("asymptotic_iv: t must be positive");
  return std::sqrt(v_bar(inputs.v_curve, t)) * (1.0 + inputs.psi * k * std::pow(t, inputs.kernel.hurst - 0.5));
}

double hagan_lognormal_iv(double alpha, double nu, double rho, double t, double k) {
  if (!(t > 0.0)) throw InputError("hagan_lognormal_iv: t must be positive");
  if (!(alpha > 0.0)) throw InputError("hagan_lognormal_iv: alpha must be positive");
  const double z = nu / alpha * (-k);
  double ratio = 1.0;
  if (std::abs(z) > 1e-8) {
    const double x = std::log((std::sqrt(1.0 - 2.0 * rho * z + z * z) + z - rho) / (1.0 - rho));
    ratio = z / x;
  } else {
    // z / x(z) = 1 - rho z / 2 + O(z^2)
    ratio = 1.0 - 0.5 * rho * z;
  }
  return alpha * ratio * (1.0 + (0.25 * rho * nu * alpha + (2.0 - 3.0 * rho * rho) * nu * nu / 24.0) * t);
}

}  // namespace rfmm
