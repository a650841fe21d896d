#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vizsim/nn/architecture.hpp"
#include "vizsim/tensor.hpp"

namespace vizsim::nn {

enum class WeightSet { imagenet, stylized_imagenet, lpips_scaling, cifar10, simclr, random };

std::string_view weight_set_name(WeightSet ws);
std::optional<WeightSet> parse_weight_set(std::string_view name);

struct ArchiveMetadata {
  std::string architecture;  // one of the arch_name() labels
  WeightSet weight_set = WeightSet::random;
  std::string source_checksum;  // provenance of the exported checkpoint, may be empty
};

/// Named f32 tensors plus provenance. On disk it is a directory holding
/// `manifest.json` and `data.bin` (little-endian f32, byte-exact offsets).
class TensorArchive {
 public:
  TensorArchive() = default;
  explicit TensorArchive(ArchiveMetadata meta) : meta_(std::move(meta)) {}

  const ArchiveMetadata& metadata() const noexcept { return meta_; }
  ArchiveMetadata& metadata() noexcept { return meta_; }

  /// Appends or replaces a tensor. Insertion order is the on-disk order.
  void put(const std::string& name, Tensor tensor);

  const Tensor* find(std::string_view name) const;
  /// Throws ValidationError naming the missing slot.
  const Tensor& get(std::string_view name) const;

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t tensor_count() const noexcept { return names_.size(); }
  std::size_t element_count() const;

  /// Checks every parameter slot of `spec` is present with the right shape.
  /// Head slots are only required when `require_head` is set.
  void validate_against(const ArchitectureSpec& spec, bool require_head = false) const;

  bool operator==(const TensorArchive& other) const;

 private:
  ArchiveMetadata meta_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, Tensor> tensors_;
};

struct ManifestEntry {
  std::string name;
  Shape shape;
  std::size_t offset = 0;
  std::size_t nbytes = 0;
};

/// Writes `dir/manifest.json` and `dir/data.bin`, creating `dir` if needed.
void save_archive(const TensorArchive& archive, const std::filesystem::path& dir);

/// Reads an archive directory. The manifest is validated (labels, dtype,
/// offsets within and non-overlapping in the blob, blob size) before the blob
/// is read; the blob is then checked against `blob_sha256`.
TensorArchive load_archive(const std::filesystem::path& dir);

/// SHA-256 recorded in the manifest of an archive directory.
std::string archive_checksum(const std::filesystem::path& dir);

/// Resolves an archive path, falling back to $VIZSIM_WEIGHTS_DIR/<path> for
/// relative paths that do not exist as given.
std::filesystem::path resolve_archive_path(const std::filesystem::path& path);

}  // namespace vizsim::nn
