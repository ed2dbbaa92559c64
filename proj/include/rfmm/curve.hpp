#pragma once

// Tenor structure, pillar discount curve and the swap-rate algebra built on
// top of it. Tenor indices are 1-based to match the usual forward-rate
// notation: rate j accrues over (T_{j-1}, T_j], j = 1..N.

#include <cstddef>
#include <span>
#include <vector>

namespace rfmm {

class TenorStructure {
 public:
  // dates = T_0 < T_1 < ... < T_N with T_0 = 0 and N >= 2.
  explicit TenorStructure(std::vector<double> dates);

  // 0, step, 2 step, ..., n step.
  static TenorStructure uniform(std::size_t n, double step = 1.0);

  std::size_t size() const { return dates_.size() - 1; }
  double date(std::size_t j) const;
  // theta_j = T_j - T_{j-1}, j = 1..N.
  double theta(std::size_t j) const;
  std::span<const double> dates() const { return dates_; }

 private:
  std::vector<double> dates_;
};

class DiscountCurve {
 public:
  // discounts[j] = P_0(T_j), j = 0..N, with discounts[0] = 1.
  DiscountCurve(TenorStructure tenor, std::vector<double> discounts);

  // P_0(T_j) = (1 + rate)^{-T_j}.
  static DiscountCurve flat(const TenorStructure& tenor, double annual_rate);

  const TenorStructure& tenor() const { return tenor_; }
  std::size_t size() const { return tenor_.size(); }
  double discount(std::size_t j) const;
  std::span<const double> discounts() const { return discounts_; }

 private:
  TenorStructure tenor_;
  std::vector<double> discounts_;
};

// Swap over (T_I, T_J], 1 <= I < J <= N.
struct SwapDefinition {
  std::size_t start = 1;
  std::size_t end = 2;

  void validate(std::size_t n_tenors) const;
  std::size_t length() const { return end - start; }
};

double forward_term_rate(const DiscountCurve& curve, std::size_t j);
// R^1_0 .. R^N_0, element j-1 holds R^j_0.
std::vector<double> forward_term_rates(const DiscountCurve& curve);

double annuity(const DiscountCurve& curve, const SwapDefinition& swap);
double forward_swap_rate(const DiscountCurve& curve, const SwapDefinition& swap);

// Exact basket weights Pi^j_0 of dS = sum_j Pi^j dR^{j*}, j = I+1..J
// (element j-I-1). For nonnegative forward rates they satisfy
// Pi^j R^j <= S; with negative rates that bound is not guaranteed.
std::vector<double> pi_weights(const DiscountCurve& curve, const SwapDefinition& swap);

// C^j with Pi^j = theta_j P(T_j) C^j / A, via C^{I+1} = 1,
// C^{j+1} = (1 + theta_j R^j) C^j - theta_j S. Element j-I-1 holds C^j.
std::vector<double> c_recursion(const DiscountCurve& curve, const SwapDefinition& swap);

// Classical frozen weights theta_j P_0(T_j) / A_0.
std::vector<double> freezing_weights(const DiscountCurve& curve, const SwapDefinition& swap);

}  // namespace rfmm
