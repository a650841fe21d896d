#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vizsim/nn/architecture.hpp"
#include "vizsim/nn/archive.hpp"

namespace vizsim::nn {

/// One reference classification. Either `logits` or `logits_sha256` is set.
struct FixtureEntry {
  std::filesystem::path image_path;
  std::size_t top1_index = 0;
  std::vector<float> logits;
  std::string logits_sha256;
  std::size_t size = 224;
};

/// JSON list of {image_path, top1_index, logits | logits_sha256, size?}.
/// Relative image paths resolve against `base_dir`.
std::vector<FixtureEntry> parse_fixtures_json(const std::string& text, const std::filesystem::path& base_dir,
                                              const std::string& source = "<json>");
std::vector<FixtureEntry> read_fixtures(const std::filesystem::path& path);
std::string fixtures_to_json(const std::vector<FixtureEntry>& entries);

/// SHA-256 of the logits as little-endian f32 bytes.
std::string logits_sha256(std::span<const float> logits);

struct FixtureResult {
  std::filesystem::path image_path;
  std::size_t expected_top1 = 0;
  std::size_t top1 = 0;
  std::optional<double> max_abs_error;  // when reference logits are stored
  std::optional<bool> hash_match;       // when only the digest is stored
};

struct SanityReport {
  std::vector<FixtureResult> results;
  std::size_t agreeing = 0;
  double max_abs_error = 0.0;

  bool passed(double logit_tolerance = 1e-3) const;
};

/// Classifies each fixture image (resized to its recorded size) and compares
/// against the reference top-1 and logits.
SanityReport run_fixtures(const std::vector<FixtureEntry>& entries, const ArchitectureSpec& spec,
                          const TensorArchive& weights);

}  // namespace vizsim::nn
