#include "rfmm/optimize.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>

#include "rfmm/errors.hpp"
#include "rfmm/mc.hpp"

namespace rfmm {

std::vector<double> Box::project(std::vector<double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  return x;
}

OptimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const Box& box,
                           const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0 || box.lower.size() != n || box.upper.size() != n) throw InputError("nelder_mead: dimension mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!(box.lower[i] <= box.upper[i])) throw InputError("nelder_mead: empty box");

  OptimizeResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };

  std::vector<std::vector<double>> simplex(n + 1, box.project(std::move(x0)));
  for (std::size_t i = 0; i < n; ++i) {
    const double width = box.upper[i] - box.lower[i];
    double step = options.initial_step * width;
    auto& v = simplex[i + 1];
    // Step inward when the start sits on the upper face.
    v[i] = v[i] + step <= box.upper[i] ? v[i] + step : v[i] - step;
    v = box.project(v);
  }
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  while (res.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d) {
        const double width = std::max(box.upper[d] - box.lower[d], 1e-300);
        diameter = std::max(diameter, std::abs(simplex[i][d] - simplex[best][d]) / width);
      }
    if (fv[worst] - fv[best] <= options.f_tolerance * (1.0 + std::abs(fv[best])) || diameter <= options.x_tolerance) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / static_cast<double>(n);

    auto along = [&](double c) {
      std::vector<double> x(n);
      for (std::size_t d = 0; d < n; ++d) x[d] = centroid[d] + c * (simplex[worst][d] - centroid[d]);
      return box.project(std::move(x));
    };

    trial = along(-1.0);
    const double fr = eval(trial);
    if (fr < fv[best]) {
      trial2 = along(-2.0);
      const double fe = eval(trial2);
      if (fe < fr) {
        simplex[worst] = trial2;
        fv[worst] = fe;
      } else {
        simplex[worst] = trial;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = trial;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    trial2 = along(outside ? -0.5 : 0.5);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = trial2;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d) simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
      simplex[i] = box.project(simplex[i]);
      fv[i] = eval(simplex[i]);
    }
  }
  const auto it = std::min_element(fv.begin(), fv.end());
  res.x = simplex[static_cast<std::size_t>(it - fv.begin())];
  res.value = *it;
  return res;
}

OptimizeResult nelder_mead_restarts(const Objective& f, std::vector<double> x0, const Box& box, int restarts,
                                    double jitter, std::uint64_t seed, const NelderMeadOptions& options) {
  OptimizeResult best = nelder_mead(f, x0, box, options);
  int total = best.evaluations;
  PathRng rng(seed, 0x5eed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> start = x0;
    for (std::size_t d = 0; d < start.size(); ++d) start[d] += jitter * (box.upper[d] - box.lower[d]) * u(rng);
    auto cand = nelder_mead(f, box.project(std::move(start)), box, options);
    total += cand.evaluations;
    if (cand.value < best.value) best = std::move(cand);
  }
  best.evaluations = total;
  return best;
}

}  // namespace rfmm
