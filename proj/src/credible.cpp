#include "ballet/credible.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ballet/disjoint_set.hpp"
#include "ballet/errors.hpp"
#include "ballet/order_statistics.hpp"

namespace ballet {
namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

void require_radius(double radius) {
  if (!(radius >= 0.0)) throw ConfigError("radius must be non-negative");
}

void require_aligned(const SubPartition& center, const NeighborhoodGraph& graph,
                     std::span<const double> activity) {
  if (center.size() != graph.size() || activity.size() != graph.size()) {
    throw AlignmentError("center, graph and activity vector sizes differ");
  }
}

/// Labels from the union-find roots of the active points.
SubPartition labels_from(DisjointSet& sets, const std::vector<std::uint8_t>& active) {
  std::vector<Label> labels(active.size(), kNoise);
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i]) labels[i] = static_cast<Label>(sets.find(i) + 1);
  }
  return SubPartition(std::move(labels));
}

}  // namespace

std::vector<double> losses_to_draws(const SubPartition& center,
                                    std::span<const SubPartition> draws, const LossParams& p) {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(ia_binder_loss(center, d, p));
  return out;
}

double credible_radius(const SubPartition& center, std::span<const SubPartition> draws,
                       const LossParams& p, double alpha) {
  require_alpha(alpha);
  if (draws.empty()) throw ConfigError("credible radius needs at least one draw");
  return empirical_quantile(losses_to_draws(center, draws, p), 1.0 - alpha);
}

double coverage(const SubPartition& center, std::span<const SubPartition> draws,
                const LossParams& p, double radius) {
  if (draws.empty()) throw ConfigError("coverage needs at least one draw");
  std::size_t inside = 0;
  for (const auto& d : draws) inside += ia_binder_loss(center, d, p) <= radius ? 1 : 0;
  return static_cast<double>(inside) / static_cast<double>(draws.size());
}

GreedyBound greedy_upper_bound(const SubPartition& center, const NeighborhoodGraph& graph,
                               std::span<const double> activity, const LossParams& p,
                               double radius) {
  require_aligned(center, graph, activity);
  require_radius(radius);
  const std::size_t n = center.size();
  GreedyBound out{center, 0.0, {}};

  std::vector<std::uint8_t> active(n, 0);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (center.is_active(i)) {
      active[i] = 1;
    } else {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return activity[x] > activity[y]; });

  DisjointSet sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    for (std::uint32_t j : graph.neighbors(i)) {
      if (j < i && active[j]) sets.unite(i, j);
    }
  }
  for (std::size_t i : order) {
    active[i] = 1;
    for (std::uint32_t j : graph.neighbors(i)) {
      if (active[j]) sets.unite(i, j);
    }
    SubPartition next = labels_from(sets, active);
    const double loss = ia_binder_loss(center, next, p);
    const bool inside = loss <= radius;
    out.trace.push_back({i, loss, inside});
    if (!inside) break;
    out.partition = std::move(next);
    out.loss = loss;
  }
  return out;
}

GreedyBound greedy_lower_bound(const SubPartition& center, const NeighborhoodGraph& graph,
                               std::span<const double> activity, const LossParams& p,
                               double radius) {
  require_aligned(center, graph, activity);
  require_radius(radius);
  const std::size_t n = center.size();
  GreedyBound out{center, 0.0, {}};

  std::vector<std::uint8_t> active(n, 0);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (center.is_active(i)) {
      active[i] = 1;
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return activity[x] < activity[y]; });

  for (std::size_t i : order) {
    active[i] = 0;
    SubPartition next = graph.components(active);
    const double loss = ia_binder_loss(center, next, p);
    const bool inside = loss <= radius;
    out.trace.push_back({i, loss, inside});
    if (!inside) break;
    out.partition = std::move(next);
    out.loss = loss;
  }
  return out;
}

GreedyBound greedy_upper_bound(const SubPartition& center, const PointSet& points, double delta,
                               const CoClusteringStats& stats, const LossParams& p,
                               double radius) {
  return greedy_upper_bound(center, NeighborhoodGraph(points, delta), stats.alpha(), p, radius);
}

GreedyBound greedy_lower_bound(const SubPartition& center, const PointSet& points, double delta,
                               const CoClusteringStats& stats, const LossParams& p,
                               double radius) {
  return greedy_lower_bound(center, NeighborhoodGraph(points, delta), stats.alpha(), p, radius);
}

CredibleBall credible_ball(const SubPartition& center, std::span<const SubPartition> draws,
                           const NeighborhoodGraph& graph, const CoClusteringStats& stats,
                           const LossParams& p, double alpha) {
  CredibleBall ball;
  ball.center = center;
  ball.alpha = alpha;
  ball.radius = credible_radius(center, draws, p, alpha);
  const double n = static_cast<double>(center.size());
  ball.radius_rescaled = n >= 2 ? ball.radius / (0.5 * n * (n - 1.0)) : 0.0;
  ball.coverage = coverage(center, draws, p, ball.radius);
  ball.lower = greedy_lower_bound(center, graph, stats.alpha(), p, ball.radius);
  ball.upper = greedy_upper_bound(center, graph, stats.alpha(), p, ball.radius);
  return ball;
}

}  // namespace ballet
