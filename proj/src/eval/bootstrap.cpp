#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "vizsim/error.hpp"
#include "vizsim/evalsuite.hpp"

namespace vizsim::eval {

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  if (n == 0) throw ValidationError("uniform_index: empty range");
  const std::uint64_t range = n;
  const std::uint64_t threshold = (0 - range) % range;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return static_cast<std::size_t>(x % range);
  }
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of empty data");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError(fmt::format("quantile {} outside [0, 1]", q));
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ConfidenceInterval bootstrap_ci(std::span<const double> samples, std::size_t resamples, double level,
                                std::mt19937_64& rng) {
  if (samples.empty()) throw ValidationError("bootstrap needs at least one sample");
  if (resamples == 0) throw ValidationError("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError(fmt::format("confidence level {} outside (0, 1)", level));
  const std::size_t n = samples.size();
  double total = 0.0;
  for (double s : samples) total += s;
  const double mean = total / static_cast<double>(n);

  std::vector<double> means(resamples);
  for (auto& m : means) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += samples[uniform_index(rng, n)];
    m = acc / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  return {quantile_sorted(means, (1.0 - level) / 2.0), mean, quantile_sorted(means, (1.0 + level) / 2.0)};
}

}  // namespace vizsim::eval
