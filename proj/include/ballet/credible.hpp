#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ballet/levelset.hpp"
#include "ballet/risk.hpp"
#include "ballet/subpartition.hpp"

namespace ballet {

/// Losses from `center` to every draw clustering.
std::vector<double> losses_to_draws(const SubPartition& center,
                                    std::span<const SubPartition> draws,
                                    const LossParams& p = {});

/// Smallest radius (in IA-Binder loss units) whose ball around `center`
/// holds at least 1 - alpha of the draws: the ceil((1 - alpha) S)-th
/// smallest loss.
double credible_radius(const SubPartition& center, std::span<const SubPartition> draws,
                       const LossParams& p, double alpha);

/// Fraction of draws within `radius` of `center`.
double coverage(const SubPartition& center, std::span<const SubPartition> draws,
                const LossParams& p, double radius);

struct BoundStep {
  std::size_t point;  ///< observation activated or removed
  double loss;        ///< loss from the center after the step
  bool accepted;      ///< false for the step that left the ball
};

struct GreedyBound {
  SubPartition partition;
  double loss = 0.0;  ///< loss from the center
  std::vector<BoundStep> trace;
};

/// Activates inactive points by decreasing activity probability (ties by
/// index), re-deriving clusters as components of the δ-graph after each
/// step, and returns the last state within `radius` of the center.
GreedyBound greedy_upper_bound(const SubPartition& center, const NeighborhoodGraph& graph,
                               std::span<const double> activity, const LossParams& p,
                               double radius);
GreedyBound greedy_upper_bound(const SubPartition& center, const PointSet& points, double delta,
                               const CoClusteringStats& stats, const LossParams& p,
                               double radius);

/// The reverse walk: removes active points by increasing activity
/// probability (ties by index).
GreedyBound greedy_lower_bound(const SubPartition& center, const NeighborhoodGraph& graph,
                               std::span<const double> activity, const LossParams& p,
                               double radius);
GreedyBound greedy_lower_bound(const SubPartition& center, const PointSet& points, double delta,
                               const CoClusteringStats& stats, const LossParams& p,
                               double radius);

struct CredibleBall {
  SubPartition center;
  double alpha = 0.05;
  double radius = 0.0;           ///< ε* in loss units
  double radius_rescaled = 0.0;  ///< ε* / C(n, 2)
  double coverage = 0.0;
  GreedyBound lower;
  GreedyBound upper;
};

CredibleBall credible_ball(const SubPartition& center, std::span<const SubPartition> draws,
                           const NeighborhoodGraph& graph, const CoClusteringStats& stats,
                           const LossParams& p, double alpha);

}  // namespace ballet
