#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <fmt/format.h>

#include "vizsim/error.hpp"
#include "vizsim/evalsuite.hpp"

namespace vizsim::eval {

namespace {

// Contingency table of two labelings matched by id, with compacted labels.
struct Contingency {
  std::size_t n = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> cells;  // rows x cols
  std::vector<double> a_sums;
  std::vector<double> b_sums;

  double at(std::size_t i, std::size_t j) const { return cells[i * cols + j]; }
};

std::vector<std::size_t> compact(const std::vector<std::size_t>& labels, std::size_t& count) {
  std::unordered_map<std::size_t, std::size_t> remap;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = remap.try_emplace(labels[i], remap.size()).first->second;
  }
  count = remap.size();
  return out;
}

Contingency contingency(const ClusterLabels& a, const ClusterLabels& b) {
  if (a.ids.size() != a.labels.size() || b.ids.size() != b.labels.size()) {
    throw ValidationError("cluster labels: id and label counts differ");
  }
  if (a.ids.size() != b.ids.size()) {
    throw ValidationError(fmt::format("labelings cover different id sets ({} vs {} ids)", a.ids.size(), b.ids.size()));
  }
  std::unordered_map<std::string, std::size_t> b_index;
  for (std::size_t i = 0; i < b.ids.size(); ++i) {
    if (!b_index.emplace(b.ids[i], i).second) throw ValidationError(fmt::format("duplicate id '{}'", b.ids[i]));
  }
  std::vector<std::size_t> b_aligned(a.ids.size());
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    auto it = b_index.find(a.ids[i]);
    if (it == b_index.end()) throw ValidationError(fmt::format("id '{}' missing from the second labeling", a.ids[i]));
    b_aligned[i] = b.labels[it->second];
  }
  Contingency c;
  c.n = a.ids.size();
  const auto la = compact(a.labels, c.rows);
  const auto lb = compact(b_aligned, c.cols);
  c.cells.assign(c.rows * c.cols, 0.0);
  c.a_sums.assign(c.rows, 0.0);
  c.b_sums.assign(c.cols, 0.0);
  for (std::size_t i = 0; i < c.n; ++i) {
    c.cells[la[i] * c.cols + lb[i]] += 1.0;
    c.a_sums[la[i]] += 1.0;
    c.b_sums[lb[i]] += 1.0;
  }
  return c;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

double entropy(const std::vector<double>& sums, double n) {
  double h = 0.0;
  for (double s : sums) {
    if (s > 0) h -= (s / n) * std::log(s / n);
  }
  return h;
}

double mi_of(const Contingency& c) {
  const double n = static_cast<double>(c.n);
  double mi = 0.0;
  for (std::size_t i = 0; i < c.rows; ++i) {
    for (std::size_t j = 0; j < c.cols; ++j) {
      const double nij = c.at(i, j);
      if (nij > 0) mi += (nij / n) * std::log(n * nij / (c.a_sums[i] * c.b_sums[j]));
    }
  }
  return std::max(mi, 0.0);
}

double emi_of(const Contingency& c) {
  const double n = static_cast<double>(c.n);
  const double lg_n = std::lgamma(n + 1.0);
  double emi = 0.0;
  for (double ai : c.a_sums) {
    for (double bj : c.b_sums) {
      const double lo = std::max(1.0, ai + bj - n);
      const double hi = std::min(ai, bj);
      const double fixed = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) + std::lgamma(n - ai + 1.0) +
                           std::lgamma(n - bj + 1.0) - lg_n;
      for (double nij = lo; nij <= hi; nij += 1.0) {
        const double log_p = fixed - std::lgamma(nij + 1.0) - std::lgamma(ai - nij + 1.0) -
                             std::lgamma(bj - nij + 1.0) - std::lgamma(n - ai - bj + nij + 1.0);
        emi += (nij / n) * std::log(n * nij / (ai * bj)) * std::exp(log_p);
      }
    }
  }
  return emi;
}

double generalized_mean(double ha, double hb, MiNormalization norm) {
  switch (norm) {
    case MiNormalization::arithmetic: return (ha + hb) / 2.0;
    case MiNormalization::max: return std::max(ha, hb);
    case MiNormalization::min: return std::min(ha, hb);
    case MiNormalization::geometric: return std::sqrt(ha * hb);
  }
  return (ha + hb) / 2.0;
}

bool both_single(const Contingency& c) { return c.rows == c.cols && c.rows <= 1; }

}  // namespace

std::string_view mi_normalization_name(MiNormalization norm) {
  switch (norm) {
    case MiNormalization::arithmetic: return "arithmetic";
    case MiNormalization::max: return "max";
    case MiNormalization::min: return "min";
    case MiNormalization::geometric: return "geometric";
  }
  return "arithmetic";
}

MiNormalization parse_mi_normalization(std::string_view name) {
  for (auto norm : {MiNormalization::arithmetic, MiNormalization::max, MiNormalization::min,
                    MiNormalization::geometric}) {
    if (name == mi_normalization_name(norm)) return norm;
  }
  throw ValidationError(fmt::format("unknown MI normalization '{}' (arithmetic|max|min|geometric)", name));
}

double rand_index(const ClusterLabels& a, const ClusterLabels& b) {
  const auto c = contingency(a, b);
  const double n = static_cast<double>(c.n);
  const double pairs = comb2(n);
  if (pairs == 0.0) return 1.0;
  double same_both = 0.0, same_a = 0.0, same_b = 0.0;
  for (double v : c.cells) same_both += comb2(v);
  for (double v : c.a_sums) same_a += comb2(v);
  for (double v : c.b_sums) same_b += comb2(v);
  const double agree = pairs + 2.0 * same_both - same_a - same_b;
  return agree / pairs;
}

double adjusted_rand(const ClusterLabels& a, const ClusterLabels& b) {
  const auto c = contingency(a, b);
  const double pairs = comb2(static_cast<double>(c.n));
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (double v : c.cells) index += comb2(v);
  for (double v : c.a_sums) sum_a += comb2(v);
  for (double v : c.b_sums) sum_b += comb2(v);
  if (pairs == 0.0) return 1.0;
  const double expected = sum_a * sum_b / pairs;
  const double max_index = (sum_a + sum_b) / 2.0;
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

double mutual_information(const ClusterLabels& a, const ClusterLabels& b) { return mi_of(contingency(a, b)); }

double expected_mutual_information(const ClusterLabels& a, const ClusterLabels& b) {
  return emi_of(contingency(a, b));
}

double nmi(const ClusterLabels& a, const ClusterLabels& b, MiNormalization norm) {
  const auto c = contingency(a, b);
  if (both_single(c)) return 1.0;
  const double mi = mi_of(c);
  if (mi == 0.0) return 0.0;
  const double n = static_cast<double>(c.n);
  const double normalizer = generalized_mean(entropy(c.a_sums, n), entropy(c.b_sums, n), norm);
  return std::clamp(mi / normalizer, 0.0, 1.0);
}

double ami(const ClusterLabels& a, const ClusterLabels& b, MiNormalization norm) {
  const auto c = contingency(a, b);
  if (both_single(c)) return 1.0;
  const double n = static_cast<double>(c.n);
  const double mi = mi_of(c);
  const double emi = emi_of(c);
  const double normalizer = generalized_mean(entropy(c.a_sums, n), entropy(c.b_sums, n), norm);
  double denom = normalizer - emi;
  const double eps = std::numeric_limits<double>::epsilon();
  denom = denom < 0 ? std::min(denom, -eps) : std::max(denom, eps);
  return (mi - emi) / denom;
}

ClusteringScores score_clustering(const ClusterLabels& predicted, const ClusterLabels& reference,
                                  MiNormalization norm) {
  return {rand_index(predicted, reference), adjusted_rand(predicted, reference), nmi(predicted, reference, norm),
          ami(predicted, reference, norm)};
}

}  // namespace vizsim::eval
