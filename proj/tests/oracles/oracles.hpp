#pragma once

// Slow, independent reference implementations used as test oracles.

#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "vizsim/tensor.hpp"

namespace oracle {

using vizsim::Tensor;

Tensor random_tensor(const vizsim::Shape& shape, std::mt19937_64& rng, float lo = -1.0f, float hi = 1.0f);

/// Six nested loops, zero padding by bounds check, double accumulation.
Tensor naive_conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride,
                    std::size_t pad);

/// Sliding window maximum over the padded grid; output size counts windows
/// that start inside the (left-padded) input.
Tensor naive_maxpool(const Tensor& input, std::size_t kernel, std::size_t stride, std::size_t pad, bool ceil_mode);

/// One Ward merge expressed as the two leaf sets joined.
struct LeafMerge {
  std::set<std::size_t> left;
  std::set<std::size_t> right;
  double height;
};

/// Brute-force Ward on Euclidean points: every step re-evaluates the merge
/// criterion sqrt(2 n_a n_b / (n_a + n_b)) * |c_a - c_b| over all cluster pairs.
std::vector<LeafMerge> brute_ward(const std::vector<std::vector<double>>& points);

/// Pair enumeration.
double pair_rand_index(const std::vector<int>& a, const std::vector<int>& b);
double pair_adjusted_rand(const std::vector<int>& a, const std::vector<int>& b);

/// Mutual information and entropies straight from joint frequencies.
double joint_mi(const std::vector<int>& a, const std::vector<int>& b);
double label_entropy(const std::vector<int>& a);

/// E[MI] by averaging over every permutation of `b` (exact for small n).
double permutation_emi(const std::vector<int>& a, const std::vector<int>& b);

/// Percentile bootstrap written from scratch; draws indices as x mod n after
/// rejecting x < 2^64 mod n.
struct Interval {
  double lo;
  double mean;
  double hi;
};
Interval percentile_bootstrap(std::span<const double> xs, std::size_t resamples, double level, std::mt19937_64& rng);

/// Pearson correlation of average ranks, ranks computed by counting.
double counted_spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oracle
