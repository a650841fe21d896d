#include "vizsim/nn/fixtures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vizsim/checksum.hpp"
#include "vizsim/distance_matrix.hpp"
#include "vizsim/error.hpp"
#include "vizsim/nn/model.hpp"
#include "vizsim/preprocess.hpp"

namespace vizsim::nn {

using nlohmann::json;

std::vector<FixtureEntry> parse_fixtures_json(const std::string& text, const std::filesystem::path& base_dir,
                                              const std::string& source) {
  std::vector<FixtureEntry> out;
  try {
    const json doc = json::parse(text);
    if (!doc.is_array()) throw ValidationError(fmt::format("{}: fixtures must be a JSON list", source));
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto& obj = doc[i];
      FixtureEntry e;
      std::filesystem::path p = obj.at("image_path").get<std::string>();
      e.image_path = p.is_absolute() ? p : base_dir / p;
      e.top1_index = obj.at("top1_index").get<std::size_t>();
      if (obj.contains("logits")) e.logits = obj.at("logits").get<std::vector<float>>();
      if (obj.contains("logits_sha256")) e.logits_sha256 = obj.at("logits_sha256").get<std::string>();
      if (obj.contains("size")) e.size = obj.at("size").get<std::size_t>();
      if (e.logits.empty() && e.logits_sha256.empty()) {
        throw ValidationError(fmt::format("{}: entry {} has neither logits nor logits_sha256", source, i));
      }
      out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: malformed fixtures: {}", source, e.what()));
  }
  return out;
}

std::vector<FixtureEntry> read_fixtures(const std::filesystem::path& path) {
  return parse_fixtures_json(read_text_file(path), path.parent_path(), path.string());
}

std::string fixtures_to_json(const std::vector<FixtureEntry>& entries) {
  json doc = json::array();
  for (const auto& e : entries) {
    json obj{{"image_path", e.image_path.generic_string()}, {"top1_index", e.top1_index}, {"size", e.size}};
    if (!e.logits.empty()) obj["logits"] = e.logits;
    if (!e.logits_sha256.empty()) obj["logits_sha256"] = e.logits_sha256;
    doc.push_back(std::move(obj));
  }
  return doc.dump(2) + "\n";
}

std::string logits_sha256(std::span<const float> logits) {
  std::vector<std::byte> bytes(logits.size() * sizeof(float));
  for (std::size_t i = 0; i < logits.size(); ++i) {
    auto word = std::bit_cast<std::uint32_t>(logits[i]);
    if constexpr (std::endian::native == std::endian::big) word = __builtin_bswap32(word);
    std::memcpy(bytes.data() + i * sizeof(float), &word, sizeof(word));
  }
  return sha256_hex(bytes);
}

bool SanityReport::passed(double logit_tolerance) const {
  if (results.empty() || agreeing != results.size()) return false;
  for (const auto& r : results) {
    if (r.hash_match.has_value() && !*r.hash_match) return false;
  }
  return max_abs_error <= logit_tolerance;
}

SanityReport run_fixtures(const std::vector<FixtureEntry>& entries, const ArchitectureSpec& spec,
                          const TensorArchive& weights) {
  SanityReport report;
  for (const auto& e : entries) {
    PreprocessConfig cfg;
    cfg.target_size = e.size;
    const Tensor logits = classify_logits(to_model_input(load_image(e.image_path), cfg), spec, weights);
    const auto values = logits.data();
    FixtureResult r;
    r.image_path = e.image_path;
    r.expected_top1 = e.top1_index;
    r.top1 = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    if (!e.logits.empty()) {
      if (e.logits.size() != values.size()) {
        throw ValidationError(fmt::format("{}: fixture has {} logits, model produced {}", e.image_path.string(),
                                          e.logits.size(), values.size()));
      }
      double err = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        err = std::max(err, std::abs(static_cast<double>(values[i]) - e.logits[i]));
      }
      r.max_abs_error = err;
      report.max_abs_error = std::max(report.max_abs_error, err);
    }
    if (!e.logits_sha256.empty()) r.hash_match = logits_sha256(values) == e.logits_sha256;
    if (r.top1 == r.expected_top1) ++report.agreeing;
    report.results.push_back(std::move(r));
  }
  return report;
}

}  // namespace vizsim::nn
