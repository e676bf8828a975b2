#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ballet/levelset.hpp"
#include "ballet/subpartition.hpp"

namespace ballet {

/// S posterior density draws evaluated at the n data points, row-major
/// (row s holds f^(s)(x_1), ..., f^(s)(x_n)).
class DensityDrawEnsemble {
 public:
  DensityDrawEnsemble() = default;
  DensityDrawEnsemble(std::size_t num_draws, std::size_t n, std::vector<double> values);

  std::size_t num_draws() const { return num_draws_; }
  std::size_t size() const { return n_; }
  std::span<const double> row(std::size_t s) const { return {values_.data() + s * n_, n_}; }
  std::span<const double> values() const { return values_; }

  /// Pointwise posterior mean density.
  std::vector<double> mean() const;

 private:
  std::size_t num_draws_ = 0;
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// Level-λ surrogate clustering of every draw, sharing one δ-graph.
std::vector<SubPartition> draw_clusterings(const PointSet& points,
                                           const DensityDrawEnsemble& ensemble, double lambda,
                                           double delta, EdgeRule rule = EdgeRule::kStrict);
std::vector<SubPartition> draw_clusterings(const NeighborhoodGraph& graph,
                                           const DensityDrawEnsemble& ensemble, double lambda);

/// Monte-Carlo frequencies over the draw clusterings: how often each point
/// is active, and how often each pair is active and together / active and
/// apart. Pair counts are kept only for points active in at least one
/// draw; every other pair has frequency zero.
class CoClusteringStats {
 public:
  explicit CoClusteringStats(std::span<const SubPartition> clusterings);

  std::size_t size() const { return n_; }
  std::size_t num_draws() const { return num_draws_; }

  double alpha(std::size_t i) const { return alpha_[i]; }
  std::span<const double> alpha() const { return alpha_; }

  /// Both active and in the same cluster.
  double together(std::size_t i, std::size_t j) const;
  /// Both active and in different clusters.
  double apart(std::size_t i, std::size_t j) const;

  /// Points active in at least one draw, ascending.
  std::span<const std::size_t> ever_active() const { return members_; }
  /// Position of point i in `ever_active()`, or -1.
  std::int64_t compact_index(std::size_t i) const { return compact_[i]; }

  /// Raw counts for compact indices u != v: co-clustered draws in the low
  /// 16 bits, jointly active draws in the high 16 bits.
  std::uint32_t packed_counts(std::size_t u, std::size_t v) const {
    if (u < v) std::swap(u, v);
    return counts_[u * (u - 1) / 2 + v];
  }

 private:
  std::size_t n_;
  std::size_t num_draws_;
  std::vector<double> alpha_;
  std::vector<std::size_t> members_;
  std::vector<std::int64_t> compact_;
  std::vector<std::uint32_t> counts_;
};

/// Largest number of draws the packed pair counts can hold.
inline constexpr std::size_t kMaxDraws = 65535;

CoClusteringStats precompute_stats(std::span<const SubPartition> clusterings);

/// Posterior expected IA-Binder loss of c estimated from the draws. Equal to
/// the mean of ia_binder_loss(draw, c) over the draws.
double empirical_risk(const SubPartition& c, const CoClusteringStats& stats,
                      const LossParams& p = {});

/// Marks a point not yet placed by `incremental_best_assignment`.
inline constexpr Label kUnassigned = -1;

/// Places point `next` in the cheapest of: noise, a new cluster, or an
/// existing cluster, counting only pair terms with already placed points.
/// Ties go to the first candidate in that order (clusters by label).
/// `partial` has one entry per observation: kUnassigned, kNoise or a
/// cluster label.
std::vector<Label> incremental_best_assignment(std::span<const Label> partial, std::size_t next,
                                               const CoClusteringStats& stats,
                                               const LossParams& p = {});

struct SearchConfig {
  int n_restarts = 16;
  int max_sweeten_passes = 50;
  int n_zealous_attempts = 10;
  std::uint64_t seed = 0;
  /// Worker threads for restarts; 0 uses the hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

struct SearchResult {
  SubPartition estimate;
  double risk = 0.0;
  int restarts = 0;
  std::uint64_t seed = 0;
  /// Restart that produced the estimate; -1 when a draw or the all-noise
  /// sub-partition beat every restart.
  int best_restart = -1;
};

/// Approximate minimizer of the empirical risk. Half the restarts grow a
/// sub-partition point by point in random order, the other half start from
/// a random draw; each is refined by sweetening passes and zealous
/// destroy-and-rebuild moves. The draws and the all-noise sub-partition are
/// always considered as candidates. Deterministic for a fixed seed.
SearchResult search(const CoClusteringStats& stats, const LossParams& p = {},
                    const SearchConfig& cfg = {},
                    std::span<const SubPartition> draws = {});

/// Surrogate clustering of the pointwise posterior mean density.
SubPartition plugin_estimate(const PointSet& points, const DensityDrawEnsemble& ensemble,
                             double lambda, double delta, EdgeRule rule = EdgeRule::kStrict);

}  // namespace ballet
