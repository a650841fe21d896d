#include <algorithm>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vizsim/error.hpp"
#include "vizsim/evalsuite.hpp"

namespace vizsim::eval {

using nlohmann::json;

namespace {

GroupingRecord parse_record(const json& obj, const std::string& source, std::size_t index) {
  const std::string where = fmt::format("{} record {}", source, index);
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  GroupingRecord rec;
  if (obj.contains("participant")) {
    const auto& p = obj.at("participant");
    rec.participant = p.is_string() ? p.get<std::string>() : p.dump();
  } else {
    rec.participant = std::to_string(index);
  }
  if (!obj.contains("groups") || !obj.at("groups").is_array()) {
    throw ValidationError(where + ": missing 'groups' array");
  }
  for (const auto& g : obj.at("groups")) {
    if (!g.is_array()) throw ValidationError(where + ": each group must be an array of ids");
    std::vector<std::string> group;
    for (const auto& id : g) group.push_back(id.is_string() ? id.get<std::string>() : id.dump());
    rec.groups.push_back(std::move(group));
  }
  return rec;
}

}  // namespace

std::vector<GroupingRecord> parse_groupings_json(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: malformed JSON: {}", source, e.what()));
  }
  std::vector<GroupingRecord> records;
  if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) records.push_back(parse_record(doc[i], source, i));
  } else {
    records.push_back(parse_record(doc, source, 0));
  }
  return records;
}

std::vector<GroupingRecord> read_groupings(const std::filesystem::path& path) {
  return parse_groupings_json(read_text_file(path), path.string());
}

std::vector<std::string> grouping_ids(const std::vector<GroupingRecord>& records) {
  std::set<std::string> ids;
  for (const auto& r : records) {
    for (const auto& g : r.groups) ids.insert(g.begin(), g.end());
  }
  return {ids.begin(), ids.end()};
}

DistanceMatrix consensus_matrix(const std::vector<GroupingRecord>& records) {
  return consensus_matrix(records, grouping_ids(records));
}

DistanceMatrix consensus_matrix(const std::vector<GroupingRecord>& records, const std::vector<std::string>& ids) {
  if (records.empty()) throw ValidationError("consensus matrix needs at least one grouping record");
  const std::size_t n = ids.size();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[ids[i]] = i;

  DistanceMatrix m(ids);
  std::vector<std::size_t> count(n);           // c_i
  std::vector<std::size_t> together(n * n);    // c_ij
  std::vector<std::size_t> members;
  for (const auto& rec : records) {
    std::fill(count.begin(), count.end(), 0);
    std::fill(together.begin(), together.end(), 0);
    for (const auto& group : rec.groups) {
      members.clear();
      for (const auto& id : group) {
        auto it = index.find(id);
        if (it == index.end()) {
          throw ValidationError(fmt::format("participant '{}' references unknown stimulus '{}'", rec.participant, id));
        }
        members.push_back(it->second);
      }
      // A stimulus listed twice in one group still counts that group once.
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      for (std::size_t a : members) {
        ++count[a];
        for (std::size_t b : members) ++together[a * n + b];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (count[i] == 0) {
        throw ValidationError(
            fmt::format("participant '{}' did not place stimulus '{}' in any group", rec.participant, ids[i]));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = 1.0 - static_cast<double>(together[i * n + j]) /
                                   static_cast<double>(std::min(count[i], count[j]));
        m(i, j) += d;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(records.size());
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      m(i, j) *= inv;
      m(j, i) = m(i, j);
    }
  }
  return m;
}

}  // namespace vizsim::eval
