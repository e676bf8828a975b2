#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "ballet/subpartition.hpp"

namespace ballet {

/// n observations in R^d, stored row-major. Row order is the observation
/// order shared with every SubPartition over the same data.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t dim, std::vector<double> coords);

  static PointSet from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<const double> coords() const { return coords_; }

  /// Copy of the rows listed in `rows`, in that order.
  PointSet subset(std::span<const std::size_t> rows) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

/// Euclidean distance. Every neighborhood test in the library goes through
/// this function so that the different routes compare identical values.
double distance(std::span<const double> x, std::span<const double> y);

/// Whether a neighborhood of radius r includes its boundary.
enum class EdgeRule {
  kStrict,  ///< ||x - y|| < r  (the δ-neighborhood graph)
  kClosed,  ///< ||x - y|| <= r (DBSCAN's Eps-neighborhoods)
};

inline bool within(double dist, double radius, EdgeRule rule) {
  return rule == EdgeRule::kStrict ? dist < radius : dist <= radius;
}

/// Uniform grid over the points for fixed-radius queries. Used for d <= 3;
/// higher dimensions fall back to a linear scan.
class GridIndex {
 public:
  GridIndex(const PointSet& points, double cell_width);

  /// Calls visit(j, dist) for every point j with within(dist, radius, rule).
  /// The query point's own index is reported too when it is a data point.
  template <typename Visit>
  void for_each_within(std::span<const double> query, double radius, EdgeRule rule,
                       Visit&& visit) const;

  std::vector<std::size_t> within_radius(std::span<const double> query, double radius,
                                         EdgeRule rule) const;

  const PointSet& points() const { return *points_; }
  double cell_width() const { return cell_width_; }
  bool brute_force() const { return brute_force_; }

 private:
  /// Exact cell key, or -1 for cells outside the occupied box.
  std::int64_t key_of(std::span<const std::int64_t> cell) const;
  void cell_of(std::span<const double> x, std::span<std::int64_t> cell) const;

  template <typename Visit>
  void scan_cells(std::span<const double> query, std::int64_t reach, Visit&& visit) const;

  const PointSet* points_;
  double cell_width_;
  bool brute_force_;
  std::vector<double> origin_;
  std::vector<std::int64_t> extent_;
  std::vector<std::size_t> order_;
  std::unordered_map<std::int64_t, std::pair<std::size_t, std::size_t>> cells_;

  friend std::vector<double> knn_distance(const PointSet&, std::size_t);
};

/// Distance from each point to its k-th nearest *other* point.
std::vector<double> knn_distance(const PointSet& points, std::size_t k);

/// ceil(ln n), the default neighbor count for the adaptive δ.
std::size_t default_knn_k(std::size_t n);
/// ceil(log2 n), the default MinPts for DBSCAN comparisons.
std::size_t default_min_pts(std::size_t n);

struct AdaptiveDeltaConfig {
  std::optional<std::size_t> k;  ///< defaults to ceil(ln n)
  double gamma = 0.01;

  std::size_t resolve_k(std::size_t n) const;
};

/// The (1 - gamma) empirical quantile of the k-NN distances of the active
/// points. `knn` may be passed to reuse precomputed k-NN distances.
double adaptive_delta(const PointSet& points, std::span<const std::size_t> active,
                      const AdaptiveDeltaConfig& cfg = {});
double adaptive_delta(std::span<const double> knn, std::span<const std::size_t> active,
                      double gamma);

/// Indices with density >= lambda.
std::vector<std::size_t> active_indices(std::span<const double> density, double lambda);

/// δ-neighborhood graph over all points in CSR form. Restricting it to an
/// active set gives G_δ(A).
class NeighborhoodGraph {
 public:
  NeighborhoodGraph(const PointSet& points, double delta, EdgeRule rule = EdgeRule::kStrict);

  std::size_t size() const { return offsets_.size() - 1; }
  double delta() const { return delta_; }
  EdgeRule rule() const { return rule_; }
  std::size_t num_edges() const { return neighbors_.size() / 2; }

  std::span<const std::uint32_t> neighbors(std::size_t i) const {
    return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  /// Connected components of the subgraph induced by `active`; inactive
  /// points are noise.
  SubPartition components(std::span<const std::uint8_t> active) const;

  /// Level-λ surrogate clustering of a density evaluated at the points.
  SubPartition cluster(std::span<const double> density, double lambda) const;

 private:
  double delta_;
  EdgeRule rule_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> neighbors_;
};

/// Connected components of the δ-neighborhood graph over the points whose
/// density is at least lambda.
SubPartition surrogate_cluster(const PointSet& points, std::span<const double> density,
                               double lambda, double delta,
                               EdgeRule rule = EdgeRule::kStrict);

struct DbscanOptions {
  /// Count the point itself in |N_eps(x)|, following the set definition.
  bool count_self = true;
};

/// DBSCAN*: core points clustered by the closure of the eps-relation; every
/// non-core point is noise.
SubPartition dbscan_star(const PointSet& points, double eps, std::size_t min_pts,
                         DbscanOptions opts = {});

/// Classic DBSCAN: DBSCAN* plus border points, each attached to the cluster
/// of its nearest core point.
SubPartition dbscan_classic(const PointSet& points, double eps, std::size_t min_pts,
                            DbscanOptions opts = {});

/// Volume of the unit ball in R^d.
double unit_ball_volume(std::size_t d);

/// Diagnostic lower end of the δ range covered by the consistency theory:
/// 2 (16 d ln n / (λ v_d n))^(1/d). Reported, never enforced.
double theory_min_delta(std::size_t n, std::size_t d, double lambda);

// ---------------------------------------------------------------------------

template <typename Visit>
void GridIndex::scan_cells(std::span<const double> query, std::int64_t reach,
                           Visit&& visit) const {
  const std::size_t d = points_->dim();
  std::vector<std::int64_t> center(d), cell(d), offset(d, -reach);
  cell_of(query, center);
  for (;;) {
    for (std::size_t a = 0; a < d; ++a) cell[a] = center[a] + offset[a];
    const std::int64_t key = key_of(cell);
    auto it = key < 0 ? cells_.end() : cells_.find(key);
    if (it != cells_.end()) {
      for (std::size_t p = it->second.first; p < it->second.second; ++p) visit(order_[p]);
    }
    std::size_t a = 0;
    while (a < d && offset[a] == reach) offset[a++] = -reach;
    if (a == d) break;
    ++offset[a];
  }
}

template <typename Visit>
void GridIndex::for_each_within(std::span<const double> query, double radius, EdgeRule rule,
                                Visit&& visit) const {
  const PointSet& pts = *points_;
  auto test = [&](std::size_t j) {
    const double dist = distance(query, pts[j]);
    if (within(dist, radius, rule)) visit(j, dist);
  };
  if (!brute_force_) {
    const double reach = std::max(1.0, std::ceil(radius / cell_width_));
    // A cube of (2r+1)^d cells that outnumbers the points is slower than a scan.
    if (std::pow(2.0 * reach + 1.0, static_cast<double>(pts.dim())) <=
        static_cast<double>(pts.size())) {
      scan_cells(query, static_cast<std::int64_t>(reach), test);
      return;
    }
  }
  for (std::size_t j = 0; j < pts.size(); ++j) test(j);
}

}  // namespace ballet
