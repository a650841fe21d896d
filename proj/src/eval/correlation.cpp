#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "vizsim/error.hpp"
#include "vizsim/evalsuite.hpp"

namespace vizsim::eval {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

double spearman_rho(const DistanceMatrix& a, const DistanceMatrix& b) {
  if (a.size() != b.size()) {
    throw ValidationError(fmt::format("matrix dimensions differ: {}x{} vs {}x{}", a.size(), a.size(), b.size(), b.size()));
  }
  if (a.size() < 3) throw ValidationError("Spearman correlation needs at least 3 items");
  const auto ra = average_ranks(a.upper_triangle());
  const auto rb = average_ranks(b.reordered(a.ids).upper_triangle());
  const double m = static_cast<double>(ra.size());
  const double mean = (m + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean, db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw DomainError("Spearman correlation undefined: constant ranks");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

DistanceMatrix normalize01(const DistanceMatrix& m) {
  const auto tri = m.upper_triangle();
  if (tri.empty()) throw DomainError("cannot normalize a matrix with no off-diagonal entries");
  const auto [lo_it, hi_it] = std::minmax_element(tri.begin(), tri.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) throw DomainError("cannot normalize a constant matrix");
  DistanceMatrix out(m.ids);
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = i == j ? 0.0 : (m(i, j) - lo) / (hi - lo);
  }
  return out;
}

void PerceptualKernel::validate() const {
  const std::size_t n = matrix.size();
  if (n != 10 && n != 16) throw ValidationError(fmt::format("kernel must be 10x10 or 16x16, got {}x{}", n, n));
  matrix.validate(1e-9);
  for (double v : matrix.values) {
    if (v < 0.0 || v > 1.0) throw ValidationError(fmt::format("kernel value {} outside [0, 1]", v));
  }
}

PerceptualKernel read_kernel_csv(const std::filesystem::path& path, std::string channel, std::string task) {
  PerceptualKernel k{std::move(channel), std::move(task), read_matrix_csv(path)};
  k.validate();
  return k;
}

}  // namespace vizsim::eval
