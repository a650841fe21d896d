#include "vizsim/nn/archive.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vizsim/checksum.hpp"
#include "vizsim/error.hpp"

namespace vizsim::nn {

static_assert(std::endian::native == std::endian::little, "archive blobs are little-endian f32");

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kFormatVersion = 1;

std::string_view weight_set_name(WeightSet ws) {
  switch (ws) {
    case WeightSet::imagenet: return "imagenet";
    case WeightSet::stylized_imagenet: return "stylized-imagenet";
    case WeightSet::lpips_scaling: return "lpips-scaling";
    case WeightSet::cifar10: return "cifar10";
    case WeightSet::simclr: return "simclr";
    case WeightSet::random: return "random";
  }
  return "unknown";
}

std::optional<WeightSet> parse_weight_set(std::string_view name) {
  for (WeightSet ws : {WeightSet::imagenet, WeightSet::stylized_imagenet, WeightSet::lpips_scaling, WeightSet::cifar10,
                       WeightSet::simclr, WeightSet::random}) {
    if (weight_set_name(ws) == name) return ws;
  }
  return std::nullopt;
}

void TensorArchive::put(const std::string& name, Tensor tensor) {
  if (tensors_.find(name) == tensors_.end()) names_.push_back(name);
  tensors_[name] = std::move(tensor);
}

const Tensor* TensorArchive::find(std::string_view name) const {
  auto it = tensors_.find(std::string(name));
  return it == tensors_.end() ? nullptr : &it->second;
}

const Tensor& TensorArchive::get(std::string_view name) const {
  if (const Tensor* t = find(name)) return *t;
  throw ValidationError(fmt::format("archive ({}, {}) has no tensor '{}'", meta_.architecture,
                                    weight_set_name(meta_.weight_set), name));
}

std::size_t TensorArchive::element_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.size();
  return n;
}

void TensorArchive::validate_against(const ArchitectureSpec& spec, bool require_head) const {
  for (const auto& slot : parameter_slots(spec)) {
    if (slot.head && !require_head) continue;
    const Tensor* t = find(slot.name);
    if (!t) throw ValidationError(fmt::format("missing parameter tensor '{}'", slot.name));
    if (t->shape() != slot.shape) {
      throw ShapeError(fmt::format("parameter '{}' has shape {}, expected {}", slot.name, shape_str(t->shape()),
                                   shape_str(slot.shape)));
    }
  }
}

bool TensorArchive::operator==(const TensorArchive& other) const {
  if (meta_.architecture != other.meta_.architecture || meta_.weight_set != other.meta_.weight_set ||
      meta_.source_checksum != other.meta_.source_checksum || names_ != other.names_) {
    return false;
  }
  for (const auto& name : names_) {
    const Tensor& a = tensors_.at(name);
    const Tensor& b = other.tensors_.at(name);
    if (a.shape() != b.shape() || std::memcmp(a.ptr(), b.ptr(), a.size() * sizeof(float)) != 0) return false;
  }
  return true;
}

void save_archive(const TensorArchive& archive, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  std::vector<std::byte> blob;
  json entries = json::array();
  for (const auto& name : archive.names()) {
    const Tensor& t = archive.get(name);
    const std::size_t nbytes = t.size() * sizeof(float);
    entries.push_back({{"name", name}, {"dtype", "f32"}, {"shape", t.shape()}, {"offset", blob.size()},
                       {"nbytes", nbytes}});
    const auto* raw = reinterpret_cast<const std::byte*>(t.ptr());
    blob.insert(blob.end(), raw, raw + nbytes);
  }

  const auto& meta = archive.metadata();
  json manifest = {
      {"format_version", kFormatVersion},
      {"architecture", meta.architecture},
      {"weight_set", weight_set_name(meta.weight_set)},
      {"source_checksum", meta.source_checksum},
      {"entries", std::move(entries)},
      {"blob_sha256", sha256_hex(blob)},
  };

  std::ofstream data(dir / "data.bin", std::ios::binary | std::ios::trunc);
  data.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  if (!data) throw IoError(fmt::format("failed writing {}", (dir / "data.bin").string()));
  std::ofstream man(dir / "manifest.json", std::ios::trunc);
  man << manifest.dump(2) << '\n';
  if (!man) throw IoError(fmt::format("failed writing {}", (dir / "manifest.json").string()));
}

namespace {

json read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open archive manifest {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: malformed JSON: {}", path.string(), e.what()));
  }
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(fmt::format("{}: missing field '{}'", where, key));
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(fmt::format("{}: field '{}' has the wrong type", where, key));
  }
}

}  // namespace

TensorArchive load_archive(const fs::path& dir) {
  const json manifest = read_manifest(dir);
  const std::string where = (dir / "manifest.json").string();

  if (field<int>(manifest, "format_version", where) != kFormatVersion) {
    throw ValidationError(fmt::format("{}: unsupported format_version", where));
  }
  ArchiveMetadata meta;
  meta.architecture = field<std::string>(manifest, "architecture", where);
  if (!parse_arch(meta.architecture)) {
    throw ValidationError(fmt::format("{}: unknown architecture label '{}'", where, meta.architecture));
  }
  const auto ws_label = field<std::string>(manifest, "weight_set", where);
  const auto ws = parse_weight_set(ws_label);
  if (!ws) throw ValidationError(fmt::format("{}: unknown weight_set label '{}'", where, ws_label));
  meta.weight_set = *ws;
  if (manifest.contains("source_checksum")) meta.source_checksum = field<std::string>(manifest, "source_checksum", where);
  const auto expected_sha = field<std::string>(manifest, "blob_sha256", where);

  std::vector<ManifestEntry> entries;
  for (const auto& e : field<json>(manifest, "entries", where)) {
    ManifestEntry entry;
    entry.name = field<std::string>(e, "name", where);
    const std::string ctx = fmt::format("{} entry '{}'", where, entry.name);
    if (field<std::string>(e, "dtype", ctx) != "f32") throw ValidationError(ctx + ": dtype must be f32");
    entry.shape = field<Shape>(e, "shape", ctx);
    entry.offset = field<std::size_t>(e, "offset", ctx);
    entry.nbytes = field<std::size_t>(e, "nbytes", ctx);
    if (entry.nbytes != shape_numel(entry.shape) * sizeof(float)) {
      throw ValidationError(fmt::format("{}: nbytes {} does not match shape {}", ctx, entry.nbytes,
                                        shape_str(entry.shape)));
    }
    if (entry.offset % sizeof(float) != 0) throw ValidationError(ctx + ": offset is not 4-byte aligned");
    entries.push_back(std::move(entry));
  }

  const fs::path blob_path = dir / "data.bin";
  std::error_code ec;
  const auto blob_size = fs::file_size(blob_path, ec);
  if (ec) throw IoError(fmt::format("cannot stat {}: {}", blob_path.string(), ec.message()));

  std::vector<const ManifestEntry*> by_offset;
  for (const auto& e : entries) by_offset.push_back(&e);
  std::sort(by_offset.begin(), by_offset.end(),
            [](const auto* a, const auto* b) { return a->offset < b->offset; });
  std::size_t end = 0;
  for (const auto* e : by_offset) {
    if (e->offset < end) {
      throw ValidationError(fmt::format("{}: entry '{}' at offset {} overlaps the previous entry", where, e->name,
                                        e->offset));
    }
    end = e->offset + e->nbytes;
    if (end > blob_size) {
      throw ValidationError(fmt::format("{}: entry '{}' ends at byte {} but data.bin holds {} (truncated blob)",
                                        where, e->name, end, blob_size));
    }
  }

  std::vector<std::byte> blob(blob_size);
  std::ifstream in(blob_path, std::ios::binary);
  in.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(blob_size));
  if (!in) throw IoError(fmt::format("failed reading {}", blob_path.string()));
  const std::string actual_sha = sha256_hex(blob);
  if (actual_sha != expected_sha) {
    throw ValidationError(fmt::format("{}: checksum mismatch (manifest {}, data.bin {})", where, expected_sha,
                                      actual_sha));
  }

  TensorArchive archive(meta);
  for (const auto& e : entries) {
    std::vector<float> values(e.nbytes / sizeof(float));
    std::memcpy(values.data(), blob.data() + e.offset, e.nbytes);
    archive.put(e.name, Tensor(e.shape, std::move(values)));
  }
  return archive;
}

std::string archive_checksum(const fs::path& dir) {
  const json manifest = read_manifest(dir);
  return field<std::string>(manifest, "blob_sha256", (dir / "manifest.json").string());
}

fs::path resolve_archive_path(const fs::path& path) {
  if (fs::exists(path) || path.is_absolute()) return path;
  if (const char* env = std::getenv("VIZSIM_WEIGHTS_DIR")) {
    const fs::path candidate = fs::path(env) / path;
    if (fs::exists(candidate)) return candidate;
  }
  return path;
}

}  // namespace vizsim::nn
