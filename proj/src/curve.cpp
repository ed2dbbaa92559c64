#include "rfmm/curve.hpp"

#include <cmath>
#include <string>

#include "rfmm/errors.hpp"

namespace rfmm {

TenorStructure::TenorStructure(std::vector<double> dates) : dates_(std::move(dates)) {
  if (dates_.size() < 3) throw InputError("TenorStructure: need T_0 < T_1 < T_2 at least (N >= 2)");
  if (dates_.front() != 0.0) throw InputError("TenorStructure: T_0 must be 0");
  for (std::size_t j = 1; j < dates_.size(); ++j) {
    if (!(dates_[j] > dates_[j - 1]))
      throw InputError("TenorStructure: dates must be strictly increasing (index " + std::to_string(j) + ")");
  }
}

TenorStructure TenorStructure::uniform(std::size_t n, double step) {
  std::vector<double> dates(n + 1);
  for (std::size_t j = 0; j <= n; ++j) dates[j] = step * static_cast<double>(j);
  return TenorStructure(std::move(dates));
}

double TenorStructure::date(std::size_t j) const {
  if (j >= dates_.size()) throw InputError("TenorStructure: date index out of range");
  return dates_[j];
}

double TenorStructure::theta(std::size_t j) const {
  if (j == 0 || j >= dates_.size()) throw InputError("TenorStructure: theta index out of range");
  return dates_[j] - dates_[j - 1];
}

DiscountCurve::DiscountCurve(TenorStructure tenor, std::vector<double> discounts)
    : tenor_(std::move(tenor)), discounts_(std::move(discounts)) {
  if (discounts_.size() != tenor_.size() + 1)
    throw InputError("DiscountCurve: need one discount factor per tenor date");
  if (std::abs(discounts_[0] - 1.0) > 1e-14) throw InputError("DiscountCurve: P_0(T_0) must be 1");
  for (double p : discounts_) {
    if (!(p > 0.0) || !std::isfinite(p)) throw InputError("DiscountCurve: discount factors must be positive");
  }
}

DiscountCurve DiscountCurve::flat(const TenorStructure& tenor, double annual_rate) {
  std::vector<double> p(tenor.size() + 1);
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = std::pow(1.0 + annual_rate, -tenor.date(j));
  return DiscountCurve(tenor, std::move(p));
}

double DiscountCurve::discount(std::size_t j) const {
  if (j >= discounts_.size()) throw InputError("DiscountCurve: index out of range");
  return discounts_[j];
}

void SwapDefinition::validate(std::size_t n_tenors) const {
  if (!(start >= 1 && start < end && end <= n_tenors))
    throw InputError("SwapDefinition: need 1 <= I < J <= N (got I=" + std::to_string(start) +
                     ", J=" + std::to_string(end) + ", N=" + std::to_string(n_tenors) + ")");
}

double forward_term_rate(const DiscountCurve& curve, std::size_t j) {
  if (j < 1 || j > curve.size()) throw InputError("forward_term_rate: index out of range");
  return (curve.discount(j - 1) / curve.discount(j) - 1.0) / curve.tenor().theta(j);
}

std::vector<double> forward_term_rates(const DiscountCurve& curve) {
  std::vector<double> rates(curve.size());
  for (std::size_t j = 1; j <= curve.size(); ++j) rates[j - 1] = forward_term_rate(curve, j);
  return rates;
}

double annuity(const DiscountCurve& curve, const SwapDefinition& swap) {
  swap.validate(curve.size());
  double a = 0.0;
  for (std::size_t j = swap.start + 1; j <= swap.end; ++j) a += curve.tenor().theta(j) * curve.discount(j);
  return a;
}

double forward_swap_rate(const DiscountCurve& curve, const SwapDefinition& swap) {
  const double a = annuity(curve, swap);
  if (!(a > 0.0)) throw InputError("forward_swap_rate: zero annuity");
  return (curve.discount(swap.start) - curve.discount(swap.end)) / a;
}

std::vector<double> pi_weights(const DiscountCurve& curve, const SwapDefinition& swap) {
  const double a = annuity(curve, swap);
  const double s = forward_swap_rate(curve, swap);
  const auto& tenor = curve.tenor();
  std::vector<double> pi(swap.length());
  // tail = sum_{k=j}^{J} theta_k P(T_k), accumulated backwards.
  double tail = 0.0;
  for (std::size_t j = swap.end; j > swap.start; --j) {
    tail += tenor.theta(j) * curve.discount(j);
    pi[j - swap.start - 1] = tenor.theta(j) * curve.discount(j) / (a * curve.discount(j - 1)) *
                             (curve.discount(swap.end) + s * tail);
  }
  return pi;
}

std::vector<double> c_recursion(const DiscountCurve& curve, const SwapDefinition& swap) {
  const double s = forward_swap_rate(curve, swap);
  const auto& tenor = curve.tenor();
  std::vector<double> c(swap.length());
  c[0] = 1.0;
  for (std::size_t j = swap.start + 1; j < swap.end; ++j) {
    const double theta = tenor.theta(j);
    c[j - swap.start] = (1.0 + theta * forward_term_rate(curve, j)) * c[j - swap.start - 1] - theta * s;
  }
  return c;
}

std::vector<double> freezing_weights(const DiscountCurve& curve, const SwapDefinition& swap) {
  const double a = annuity(curve, swap);
  std::vector<double> w(swap.length());
  for (std::size_t j = swap.start + 1; j <= swap.end; ++j)
    w[j - swap.start - 1] = curve.tenor().theta(j) * curve.discount(j) / a;
  return w;
}

}  // namespace rfmm
