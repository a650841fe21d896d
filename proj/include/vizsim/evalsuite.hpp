#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vizsim/distance_matrix.hpp"

namespace vizsim::eval {

// ---------------------------------------------------------------------------
// Human groupings

/// One participant's grouping of stimuli; a stimulus may sit in several groups.
struct GroupingRecord {
  std::string participant;
  std::vector<std::vector<std::string>> groups;
};

/// Accepts a JSON array of {participant, groups} objects or a single object.
std::vector<GroupingRecord> parse_groupings_json(const std::string& text, const std::string& source = "<json>");
std::vector<GroupingRecord> read_groupings(const std::filesystem::path& path);

/// Sorted union of the ids referenced by any record.
std::vector<std::string> grouping_ids(const std::vector<GroupingRecord>& records);

/// Consensus distance: d_ij = (1/N) sum_k (1 - c_ij / min(c_i, c_j)) where c_ij
/// counts participant k's groups holding both i and j and c_i those holding i.
/// Every participant must place every id at least once.
DistanceMatrix consensus_matrix(const std::vector<GroupingRecord>& records);
DistanceMatrix consensus_matrix(const std::vector<GroupingRecord>& records, const std::vector<std::string>& ids);

// ---------------------------------------------------------------------------
// Ward clustering

enum class WardVariant {
  d2,  // Lance-Williams on squared dissimilarities (heights are distances)
  d1,  // Lance-Williams on the dissimilarities as given
};

/// One agglomeration step. Leaves are 0..n-1; the cluster formed at step s
/// gets id n + s.
struct Merge {
  std::size_t a;
  std::size_t b;
  double height;
  std::size_t size;
};

struct Dendrogram {
  std::vector<std::string> ids;
  std::vector<Merge> merges;
};

/// Agglomerative clustering with Ward linkage. Ties on merge cost resolve to
/// the lexicographically smallest (slot, slot) pair, where a merged cluster
/// keeps the smaller slot of its two parts.
Dendrogram hac_ward(const DistanceMatrix& matrix, WardVariant variant = WardVariant::d2);

struct ClusterLabels {
  std::vector<std::string> ids;
  std::vector<std::size_t> labels;

  std::size_t cluster_count() const;
};

/// Undoes the last k-1 merges. Labels are numbered by first appearance in
/// leaf order.
ClusterLabels cut_k(const Dendrogram& tree, std::size_t k);

std::string labels_to_csv(const ClusterLabels& labels);
ClusterLabels parse_labels_csv(const std::string& text, const std::string& source = "<csv>");
ClusterLabels read_labels_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Agreement between labelings

enum class MiNormalization { arithmetic, max, min, geometric };

std::string_view mi_normalization_name(MiNormalization norm);
MiNormalization parse_mi_normalization(std::string_view name);

/// Labelings are matched by id; both must cover the same id set.
double rand_index(const ClusterLabels& a, const ClusterLabels& b);
double adjusted_rand(const ClusterLabels& a, const ClusterLabels& b);
double mutual_information(const ClusterLabels& a, const ClusterLabels& b);
/// Expected mutual information under the permutation (fixed marginals) model.
double expected_mutual_information(const ClusterLabels& a, const ClusterLabels& b);
double nmi(const ClusterLabels& a, const ClusterLabels& b, MiNormalization norm = MiNormalization::arithmetic);
double ami(const ClusterLabels& a, const ClusterLabels& b, MiNormalization norm = MiNormalization::arithmetic);

struct ClusteringScores {
  double rand_index;
  double adjusted_rand;
  double nmi;
  double ami;
};

ClusteringScores score_clustering(const ClusterLabels& predicted, const ClusterLabels& reference,
                                  MiNormalization norm = MiNormalization::arithmetic);

// ---------------------------------------------------------------------------
// Matrix comparison

/// Average ranks (ties share the mean of their positions), 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rho between the strict upper triangles, B aligned to A's ids.
/// Throws DomainError when either side has constant ranks.
double spearman_rho(const DistanceMatrix& a, const DistanceMatrix& b);

/// Affine map of the off-diagonal entries onto [0, 1]; the diagonal stays 0.
/// Throws DomainError for a constant off-diagonal.
DistanceMatrix normalize01(const DistanceMatrix& m);

struct PerceptualKernel {
  std::string channel;  // color | shape | size | size-color
  std::string task;     // L5 | L9 | Tm | Td | Sa
  DistanceMatrix matrix;

  /// Square 10x10 or 16x16, symmetric, zero diagonal, values in [0, 1].
  void validate() const;
};

PerceptualKernel read_kernel_csv(const std::filesystem::path& path, std::string channel = {}, std::string task = {});

// ---------------------------------------------------------------------------
// Bootstrap

struct ConfidenceInterval {
  double lo;
  double mean;
  double hi;
};

/// Uniform index in [0, n) from a 64-bit engine, unbiased by rejection.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

/// Percentile bootstrap of the mean: B resamples with replacement, interval
/// bounds are the (1-level)/2 and (1+level)/2 quantiles (linear interpolation)
/// of the resampled means. `mean` is the plain sample mean.
ConfidenceInterval bootstrap_ci(std::span<const double> samples, std::size_t resamples, double level,
                                std::mt19937_64& rng);

/// Linear-interpolation quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace vizsim::eval
