#include "vizsim/distance_matrix.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "vizsim/error.hpp"

namespace vizsim {

DistanceMatrix::DistanceMatrix(std::vector<std::string> labels)
    : ids(std::move(labels)), values(ids.size() * ids.size(), 0.0) {}

void DistanceMatrix::validate(double symmetry_tol) const {
  const std::size_t n = size();
  if (values.size() != n * n) {
    throw ValidationError(fmt::format("distance matrix holds {} values for {} ids", values.size(), n));
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw ValidationError(fmt::format("duplicate id '{}' in distance matrix", id));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if ((*this)(i, i) != 0.0) throw ValidationError(fmt::format("nonzero diagonal at '{}'", ids[i]));
    for (std::size_t j = 0; j < n; ++j) {
      const double v = (*this)(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError(fmt::format("invalid distance {} at ('{}', '{}')", v, ids[i], ids[j]));
      }
      if (std::abs(v - (*this)(j, i)) > symmetry_tol * std::max(1.0, std::abs(v))) {
        throw ValidationError(fmt::format("asymmetric distance at ('{}', '{}')", ids[i], ids[j]));
      }
    }
  }
}

std::vector<double> DistanceMatrix::upper_triangle() const {
  std::vector<double> out;
  const std::size_t n = size();
  out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) out.push_back((*this)(i, j));
  }
  return out;
}

DistanceMatrix DistanceMatrix::reordered(const std::vector<std::string>& order) const {
  if (order.size() != size()) {
    throw ValidationError(fmt::format("id sets differ in size ({} vs {})", size(), order.size()));
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;
  std::vector<std::size_t> perm;
  for (const auto& id : order) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError(fmt::format("id '{}' missing from distance matrix", id));
    perm.push_back(it->second);
  }
  DistanceMatrix out(order);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = 0; j < order.size(); ++j) out(i, j) = (*this)(perm[i], perm[j]);
  }
  return out;
}

std::string format_double(double v) { return fmt::format("{}", v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string to_csv(const DistanceMatrix& m) {
  std::string out;
  for (const auto& id : m.ids) out += "," + csv_field(id);
  out += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += csv_field(m.ids[i]);
    for (std::size_t j = 0; j < m.size(); ++j) out += "," + format_double(m(i, j));
    out += "\n";
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

void write_csv(const DistanceMatrix& m, const std::filesystem::path& path) { write_text_file(path, to_csv(m)); }

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

DistanceMatrix parse_matrix_csv(const std::string& text, const std::string& source) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw ValidationError(fmt::format("{}: empty matrix CSV", source));
  const auto& header = rows.front();
  if (header.size() < 2) throw ValidationError(fmt::format("{}: header has no ids", source));
  std::vector<std::string> ids(header.begin() + 1, header.end());
  const std::size_t n = ids.size();
  if (rows.size() != n + 1) {
    throw ValidationError(fmt::format("{}: {} ids in header but {} data rows", source, n, rows.size() - 1));
  }
  DistanceMatrix m(ids);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != n + 1) {
      throw ValidationError(fmt::format("{}: row {} has {} cells, expected {}", source, i + 1, row.size(), n + 1));
    }
    if (row[0] != ids[i]) {
      throw ValidationError(fmt::format("{}: row id '{}' does not match column id '{}'", source, row[0], ids[i]));
    }
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t used = 0;
      try {
        m(i, j) = std::stod(row[j + 1], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != row[j + 1].size()) {
        throw ValidationError(fmt::format("{}: cell ({}, {}) is not a number: '{}'", source, i + 1, j + 1,
                                          row[j + 1]));
      }
    }
  }
  return m;
}

DistanceMatrix read_matrix_csv(const std::filesystem::path& path) {
  return parse_matrix_csv(read_text_file(path), path.string());
}

}  // namespace vizsim
