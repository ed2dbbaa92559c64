#pragma once

// Monte Carlo plumbing shared by the path simulators and pricers:
// per-path random substreams, the run configuration, a deterministic
// parallel-for and order-independent reductions.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace rfmm {

// xoshiro256** seeded through splitmix64. Each path owns one generator
// derived from (master seed, stream index), so results never depend on how
// paths are distributed across threads.
class PathRng {
 public:
  using result_type = std::uint64_t;

  PathRng(std::uint64_t master_seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t s_[4];
};

// Fills `out` with iid standard normals from the generator.
void fill_normals(PathRng& rng, std::span<double> out);

struct McConfig {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 42;
  bool antithetic = false;
  bool control_variate = true;
  // Use the regression-optimal control coefficient instead of beta = 1.
  bool regression_beta = false;
  // 0 selects std::thread::hardware_concurrency().
  unsigned threads = 1;

  void validate() const;
};

unsigned resolve_threads(unsigned requested);

// Splits [0, n) into contiguous chunks, one per worker. `body(begin, end)`
// must only write to per-index output slots.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

// Pairwise (cascade) summation; fixed association order for a given length.
double pairwise_sum(std::span<const double> values);

// Mean and standard error of a sample. With `paired` set, consecutive
// entries (antithetic partners) are averaged first and the error is computed
// over pair means.
struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
};
SampleStats sample_stats(std::span<const double> values, bool paired = false);

// Maps path index to (stream, sign) for antithetic pairing.
inline std::uint64_t stream_of(std::size_t path, bool antithetic) {
  return antithetic ? path / 2 : path;
}
inline bool is_mirror(std::size_t path, bool antithetic) { return antithetic && (path % 2 == 1); }

}  // namespace rfmm
