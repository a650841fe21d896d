#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace vizsim {

/// Labeled square matrix of pairwise distances, row-major.
struct DistanceMatrix {
  std::vector<std::string> ids;
  std::vector<double> values;

  DistanceMatrix() = default;
  explicit DistanceMatrix(std::vector<std::string> labels);

  std::size_t size() const noexcept { return ids.size(); }
  double& operator()(std::size_t i, std::size_t j) { return values[i * ids.size() + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }

  /// Symmetric, nonnegative, finite, zero diagonal, unique ids.
  /// Throws ValidationError describing the first violation.
  void validate(double symmetry_tol = 0.0) const;

  /// Strict upper triangle, row by row.
  std::vector<double> upper_triangle() const;

  /// Rows/columns reordered to follow `order` (every id must be present).
  DistanceMatrix reordered(const std::vector<std::string>& order) const;
};

/// CSV with a header row of ids (first cell empty) and one row per id.
std::string to_csv(const DistanceMatrix& m);
void write_csv(const DistanceMatrix& m, const std::filesystem::path& path);
DistanceMatrix parse_matrix_csv(const std::string& text, const std::string& source = "<csv>");
DistanceMatrix read_matrix_csv(const std::filesystem::path& path);

/// Minimal RFC 4180 reader shared by the CSV formats.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string csv_field(const std::string& s);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace vizsim
