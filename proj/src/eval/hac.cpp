#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "vizsim/error.hpp"
#include "vizsim/evalsuite.hpp"

namespace vizsim::eval {

Dendrogram hac_ward(const DistanceMatrix& matrix, WardVariant variant) {
  const std::size_t n = matrix.size();
  if (n < 2) throw ValidationError("hierarchical clustering needs at least two items");
  matrix.validate(1e-9);

  // Working dissimilarities between active slots.
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    d[i] = variant == WardVariant::d2 ? matrix.values[i] * matrix.values[i] : matrix.values[i];
  }
  std::vector<std::size_t> cluster(n), size(n, 1);
  std::iota(cluster.begin(), cluster.end(), 0);
  std::vector<bool> active(n, true);

  Dendrogram tree{matrix.ids, {}};
  tree.merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && d[i * n + j] < best) {
          best = d[i * n + j];
          bi = i;
          bj = j;
        }
      }
    }
    const double ni = static_cast<double>(size[bi]), nj = static_cast<double>(size[bj]);
    for (std::size_t m = 0; m < n; ++m) {
      if (!active[m] || m == bi || m == bj) continue;
      const double nm = static_cast<double>(size[m]);
      const double updated = ((ni + nm) * d[bi * n + m] + (nj + nm) * d[bj * n + m] - nm * best) / (ni + nj + nm);
      d[bi * n + m] = updated;
      d[m * n + bi] = updated;
    }
    const double height = variant == WardVariant::d2 ? std::sqrt(std::max(best, 0.0)) : best;
    tree.merges.push_back({std::min(cluster[bi], cluster[bj]), std::max(cluster[bi], cluster[bj]), height,
                           size[bi] + size[bj]});
    cluster[bi] = n + step;
    size[bi] += size[bj];
    active[bj] = false;
  }
  return tree;
}

std::size_t ClusterLabels::cluster_count() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

ClusterLabels cut_k(const Dendrogram& tree, std::size_t k) {
  const std::size_t n = tree.ids.size();
  if (k < 1 || k > n) throw ValidationError(fmt::format("cluster count {} out of range [1, {}]", k, n));
  if (tree.merges.size() + 1 != n) throw ValidationError("dendrogram is incomplete");

  // Union-find over leaves and internal nodes; apply the first n - k merges.
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t s = 0; s < n - k; ++s) {
    const auto& mg = tree.merges[s];
    parent[find(mg.a)] = n + s;
    parent[find(mg.b)] = n + s;
  }
  ClusterLabels out{tree.ids, std::vector<std::size_t>(n)};
  std::unordered_map<std::size_t, std::size_t> label_of_root;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    auto [it, inserted] = label_of_root.try_emplace(root, label_of_root.size());
    out.labels[i] = it->second;
  }
  return out;
}

std::string labels_to_csv(const ClusterLabels& labels) {
  std::string out = "id,label\n";
  for (std::size_t i = 0; i < labels.ids.size(); ++i) {
    out += csv_field(labels.ids[i]) + "," + std::to_string(labels.labels[i]) + "\n";
  }
  return out;
}

ClusterLabels parse_labels_csv(const std::string& text, const std::string& source) {
  const auto rows = parse_csv(text);
  ClusterLabels out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (r == 0 && row.size() == 2 && row[0] == "id" && row[1] == "label") continue;
    if (row.size() != 2) throw ValidationError(fmt::format("{}: row {} must have 2 cells", source, r + 1));
    std::size_t used = 0;
    unsigned long label = 0;
    try {
      label = std::stoul(row[1], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != row[1].size()) {
      throw ValidationError(fmt::format("{}: row {} label '{}' is not a nonnegative integer", source, r + 1, row[1]));
    }
    out.ids.push_back(row[0]);
    out.labels.push_back(label);
  }
  if (out.ids.empty()) throw ValidationError(fmt::format("{}: no labels", source));
  return out;
}

ClusterLabels read_labels_csv(const std::filesystem::path& path) {
  return parse_labels_csv(read_text_file(path), path.string());
}

}  // namespace vizsim::eval
