#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ballet/levelset.hpp"
#include "ballet/risk.hpp"
#include "ballet/subpartition.hpp"

namespace ballet {

enum class LevelKind {
  kLambda,         ///< the level itself
  kNoiseFraction,  ///< fraction ν of observations to leave as noise
  kCosmoC,         ///< (1 + c) times the average density 1 / Vol(domain)
};

struct LevelSpec {
  LevelKind kind = LevelKind::kNoiseFraction;
  double value = 0.1;

  void validate() const;
};

/// Level below which ceil(ν n) of the reference densities fall: the
/// (ceil(ν n) + 1)-th smallest value, capped at the largest.
double noise_fraction_level(std::span<const double> density, double nu);

/// Resolves a level specification to λ. Noise fractions need the reference
/// densities, the c-level needs the domain volume.
double resolve_level(const LevelSpec& spec, std::span<const double> reference_density = {},
                     std::optional<double> domain_volume = std::nullopt);

/// Knee of an increasing concave curve by the kneedle rule: on the curve
/// rescaled to the unit square, local maxima of (y - x) that drop by
/// sensitivity / (n - 1) before the next local maximum are knees; the one
/// with the largest difference is returned.
std::optional<std::size_t> kneedle(std::span<const double> x, std::span<const double> y,
                                   double sensitivity = 1.0);

struct ElbowLevel {
  double lambda = 0.0;
  double implied_nu = 0.0;  ///< fraction of observations below lambda
  std::optional<std::size_t> knee_rank;
  bool fallback = false;  ///< no knee; lambda comes from ν = 0.1
};

/// Level at the knee of the sorted log densities.
ElbowLevel elbow_level(std::span<const double> density, double fallback_nu = 0.1);

struct TreeNode {
  std::size_t row;  ///< level index; row 0 holds the lowest level
  Label cluster;
  std::size_t size;
};

struct TreeEdge {
  std::size_t upper;  ///< node in row r
  std::size_t lower;  ///< node in row r + 1
  std::size_t shared;
};

/// Clusterings over an increasing ladder of levels. Row 0 (the lowest
/// level) is the top of the tree; edges join overlapping clusters of
/// adjacent rows.
class ClusterTree {
 public:
  ClusterTree(std::vector<double> levels, std::vector<SubPartition> partitions);

  std::size_t rows() const { return levels_.size(); }
  double level(std::size_t row) const { return levels_[row]; }
  const SubPartition& partition(std::size_t row) const { return partitions_[row]; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<TreeEdge>& edges() const { return edges_; }

  std::optional<std::size_t> node_id(std::size_t row, Label cluster) const;
  /// Overlapping node in the row above with the largest overlap (ties to
  /// the smaller cluster id).
  std::optional<std::size_t> parent(std::size_t node) const { return parent_[node]; }
  std::span<const std::size_t> children(std::size_t node) const { return children_[node]; }
  /// Nodes overlapping more than one cluster in the row above.
  const std::vector<std::size_t>& ambiguous() const { return ambiguous_; }

  std::string to_dot() const;
  std::string to_json() const;

 private:
  std::vector<double> levels_;
  std::vector<SubPartition> partitions_;
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> row_start_;
  std::vector<TreeEdge> edges_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> ambiguous_;
};

enum class TreeEstimator { kBallet, kPlugin };

struct TreeConfig {
  TreeEstimator estimator = TreeEstimator::kPlugin;
  LossParams loss;
  SearchConfig search;
};

/// One clustering per level from the ensemble, sharing the δ-graph.
ClusterTree build_cluster_tree(const PointSet& points, const DensityDrawEnsemble& ensemble,
                               std::vector<double> levels, double delta,
                               const TreeConfig& cfg = {});

/// Walks each bottom-row node up through single-child parents, stopping at
/// the top row, at a node without a parent, or below a parent with more
/// than one child. Returns the final nodes, de-duplicated and sorted. With
/// `strict`, a walk through a node that overlaps several parents throws.
std::vector<std::size_t> persistent_clusters(const ClusterTree& tree, bool strict = false);

}  // namespace ballet
