#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rfmm {

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::vector<double> project(std::vector<double> x) const;
};

struct NelderMeadOptions {
  int max_evaluations = 400;
  double f_tolerance = 1e-12;  // spread of simplex values
  double x_tolerance = 1e-7;   // simplex diameter relative to the box width
  double initial_step = 0.1;   // fraction of the box width
};

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

// Nelder-Mead simplex; every trial point is projected into the box.
OptimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const Box& box,
                           const NelderMeadOptions& options = {});

// Runs from x0 and from `restarts` uniformly jittered starting points
// (jitter of +-`jitter` box widths, fixed by `seed`) and keeps the best.
OptimizeResult nelder_mead_restarts(const Objective& f, std::vector<double> x0, const Box& box, int restarts,
                                    double jitter, std::uint64_t seed, const NelderMeadOptions& options = {});

}  // namespace rfmm
