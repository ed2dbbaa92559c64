#include "rfmm/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "rfmm/errors.hpp"

namespace rfmm {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

PathRng::PathRng(std::uint64_t master_seed, std::uint64_t stream) {
  std::uint64_t mix = master_seed;
  std::uint64_t key = splitmix64(mix) ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  for (auto& word : s_) word = splitmix64(key);
}

PathRng::result_type PathRng::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

void fill_normals(PathRng& rng, std::span<double> out) {
  std::normal_distribution<double> normal;
  for (auto& z : out) z = normal(rng);
}

void McConfig::validate() const {
  if (n_paths < 2) throw InputError("McConfig: n_paths must be at least 2");
  if (antithetic && n_paths % 2 != 0) throw InputError("McConfig: antithetic sampling needs an even path count");
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 64;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleStats sample_stats(std::span<const double> values, bool paired) {
  std::vector<double> units;
  std::span<const double> sample = values;
  if (paired) {
    units.resize(values.size() / 2);
    for (std::size_t i = 0; i < units.size(); ++i) units[i] = 0.5 * (values[2 * i] + values[2 * i + 1]);
    sample = units;
  }
  const std::size_t n = sample.size();
  if (n < 2) throw InputError("sample_stats: need at least two sampling units");
  SampleStats stats;
  stats.mean = pairwise_sum(sample) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sample[i] - stats.mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  stats.std_error = std::sqrt(var / static_cast<double>(n));
  return stats;
}

}  // namespace rfmm
