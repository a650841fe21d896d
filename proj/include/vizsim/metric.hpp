#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vizsim/distance_matrix.hpp"
#include "vizsim/nn/archive.hpp"
#include "vizsim/nn/model.hpp"
#include "vizsim/preprocess.hpp"

namespace vizsim::metric {

using nn::FeatureStack;

/// Channel-wise scaling vectors, one per extraction layer.
struct ScalingWeights {
  std::vector<std::vector<float>> layers;
  nn::WeightSet label = nn::WeightSet::imagenet;

  /// All-ones vectors: plain pre-trained features without calibration.
  static ScalingWeights ones(const std::vector<std::size_t>& channels_per_layer);
  static ScalingWeights ones_for(const nn::ArchitectureSpec& spec);

  /// Reads calibration vectors from an archive. Entries named `scaling.<l>`
  /// hold w_l directly; LPIPS-native `lin<l>.model.1.weight` entries weight
  /// the squared difference and are converted with a square root. Negative
  /// components are clamped to zero.
  static ScalingWeights from_archive(const nn::TensorArchive& archive, const nn::ArchitectureSpec& spec);
};

inline constexpr double kDefaultEpsilon = 1e-10;

struct DistanceConfig {
  std::optional<std::vector<std::size_t>> layers;  // subset of extraction layers; all when unset
  double epsilon = kDefaultEpsilon;

  std::vector<std::size_t> resolve_layers(std::size_t layer_count) const;
};

/// Divides every channel vector (fixed layer, row, column) by its L2 norm + eps.
FeatureStack unit_normalize(const FeatureStack& stack, double eps = kDefaultEpsilon);

/// Per-layer terms: (1 / (H_l W_l)) * sum_{h,w} || w_l * (a_hw - b_hw) ||^2.
std::vector<double> per_layer_distances(const FeatureStack& a, const FeatureStack& b, const ScalingWeights& w);

/// Sum of the per-layer terms over the configured layer subset.
double perceptual_distance(const FeatureStack& a, const FeatureStack& b, const ScalingWeights& w,
                           const DistanceConfig& cfg = {});

/// Distance over every layer except `layer`.
double distance_excluding_layer(const FeatureStack& a, const FeatureStack& b, const ScalingWeights& w,
                                std::size_t layer);

/// Everything needed to turn images into normalized feature stacks.
struct Backend {
  const nn::ArchitectureSpec* spec = nullptr;
  const nn::TensorArchive* weights = nullptr;
  ScalingWeights scaling;
  PreprocessConfig preprocess;
  DistanceConfig distance;
};

/// Preprocess -> forward -> unit-normalize for one image.
FeatureStack normalized_features(const ImageStimulus& image, const Backend& backend);

/// Normalized stacks for many images, computed in parallel. Errors name the
/// offending image id.
std::vector<FeatureStack> normalized_features(const std::vector<ImageStimulus>& images, const Backend& backend,
                                              unsigned threads = 1);

/// Per-layer terms for every unordered pair (i < j), row-major over pairs.
std::vector<std::vector<double>> pairwise_layer_terms(const std::vector<FeatureStack>& stacks,
                                                      const ScalingWeights& w, unsigned threads = 1);

/// Matrix whose (i, j) entry sums the selected per-layer terms of pair (i, j).
DistanceMatrix matrix_from_layer_terms(const std::vector<std::string>& ids,
                                       const std::vector<std::vector<double>>& terms,
                                       const std::vector<std::size_t>& layers);

/// Pairwise perceptual distance matrix. Features are computed once per image and
/// reused across pairs.
DistanceMatrix pairwise_matrix(const std::vector<ImageStimulus>& images, const Backend& backend,
                               unsigned threads = 1);

}  // namespace vizsim::metric
