#include "ballet/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ballet/disjoint_set.hpp"
#include "ballet/errors.hpp"
#include "ballet/order_statistics.hpp"

namespace ballet {
namespace {

constexpr std::size_t kMaxGridDim = 3;
constexpr std::size_t kBruteForceBelow = 64;

std::vector<std::uint8_t> mask_at_least(std::span<const double> density, double lambda) {
  std::vector<std::uint8_t> active(density.size(), 0);
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (std::isnan(density[i])) {
      throw NumericError("density value at observation " + std::to_string(i) + " is NaN");
    }
    active[i] = density[i] >= lambda ? 1 : 0;
  }
  return active;
}

void require_k(std::size_t k, std::size_t n) {
  if (k < 1 || k + 1 > n) {
    throw ConfigError("k = " + std::to_string(k) + " must lie in [1, n - 1] with n = " +
                      std::to_string(n));
  }
}

}  // namespace

PointSet::PointSet(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw ConfigError("point dimension must be at least 1");
  if (coords_.size() % dim_ != 0) {
    throw AlignmentError("coordinate count is not a multiple of the dimension");
  }
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i])) {
      throw NumericError("non-finite coordinate in observation " + std::to_string(i / dim_));
    }
  }
}

PointSet PointSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ConfigError("empty point set");
  const std::size_t d = rows.front().size();
  std::vector<double> coords;
  coords.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw AlignmentError("rows have different lengths");
    coords.insert(coords.end(), r.begin(), r.end());
  }
  return PointSet(d, std::move(coords));
}

PointSet PointSet::subset(std::span<const std::size_t> rows) const {
  std::vector<double> coords;
  coords.reserve(rows.size() * dim_);
  for (std::size_t r : rows) {
    auto x = (*this)[r];
    coords.insert(coords.end(), x.begin(), x.end());
  }
  return PointSet(dim_, std::move(coords));
}

double distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double t = x[a] - y[a];
    s += t * t;
  }
  return std::sqrt(s);
}

GridIndex::GridIndex(const PointSet& points, double cell_width)
    : points_(&points), cell_width_(cell_width), brute_force_(false) {
  const std::size_t n = points.size();
  const std::size_t d = points.dim();
  if (d > kMaxGridDim || n < kBruteForceBelow || !(cell_width > 0.0) ||
      !std::isfinite(cell_width)) {
    brute_force_ = true;
    return;
  }
  origin_.assign(d, std::numeric_limits<double>::infinity());
  std::vector<double> top(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    auto x = points[i];
    for (std::size_t a = 0; a < d; ++a) {
      origin_[a] = std::min(origin_[a], x[a]);
      top[a] = std::max(top[a], x[a]);
    }
  }
  extent_.resize(d);
  double total = 1.0;
  for (std::size_t a = 0; a < d; ++a) {
    const double cells = std::floor((top[a] - origin_[a]) / cell_width_) + 1.0;
    total *= cells;
    extent_[a] = static_cast<std::int64_t>(std::min(cells, 4.0e18));
  }
  if (total > 4.0e18) {
    brute_force_ = true;
    return;
  }

  std::vector<std::int64_t> cell(d);
  std::vector<std::pair<std::int64_t, std::size_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) {
    cell_of(points[i], cell);
    keyed[i] = {key_of(cell), i};
  }
  std::sort(keyed.begin(), keyed.end());
  order_.resize(n);
  for (std::size_t p = 0; p < n;) {
    std::size_t q = p;
    while (q < n && keyed[q].first == keyed[p].first) {
      order_[q] = keyed[q].second;
      ++q;
    }
    cells_.emplace(keyed[p].first, std::make_pair(p, q));
    p = q;
  }
}

void GridIndex::cell_of(std::span<const double> x, std::span<std::int64_t> cell) const {
  constexpr double kFar = 1e15;
  for (std::size_t a = 0; a < cell.size(); ++a) {
    const double c = std::floor((x[a] - origin_[a]) / cell_width_);
    cell[a] = static_cast<std::int64_t>(std::clamp(c, -kFar, kFar));
  }
}

std::int64_t GridIndex::key_of(std::span<const std::int64_t> cell) const {
  std::int64_t key = 0;
  for (std::size_t a = cell.size(); a-- > 0;) {
    if (cell[a] < 0 || cell[a] >= extent_[a]) return -1;
    key = key * extent_[a] + cell[a];
  }
  return key;
}

std::vector<std::size_t> GridIndex::within_radius(std::span<const double> query, double radius,
                                                  EdgeRule rule) const {
  std::vector<std::size_t> out;
  for_each_within(query, radius, rule, [&](std::size_t j, double) { out.push_back(j); });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> knn_distance(const PointSet& points, std::size_t k) {
  const std::size_t n = points.size();
  require_k(k, n);
  const std::size_t d = points.dim();
  std::vector<double> out(n);
  std::vector<double> dist;

  auto kth_by_scan = [&](std::size_t i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.push_back(distance(points[i], points[j]));
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    return dist[k - 1];
  };

  if (d > kMaxGridDim || n < kBruteForceBelow) {
    for (std::size_t i = 0; i < n; ++i) out[i] = kth_by_scan(i);
    return out;
  }

  // Cell width chosen so that a cell holds about k points on average.
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], points[i][a]);
      hi[a] = std::max(hi[a], points[i][a]);
    }
  }
  double span_max = 0.0;
  double volume = 1.0;
  for (std::size_t a = 0; a < d; ++a) {
    span_max = std::max(span_max, hi[a] - lo[a]);
    volume *= std::max(hi[a] - lo[a], 1e-300);
  }
  if (!(span_max > 0.0)) return std::vector<double>(n, 0.0);
  double width = std::pow(volume * static_cast<double>(k) / static_cast<double>(n),
                          1.0 / static_cast<double>(d));
  width = std::clamp(width, span_max * 1e-6, span_max);

  const GridIndex grid(points, width);
  if (grid.brute_force()) {
    for (std::size_t i = 0; i < n; ++i) out[i] = kth_by_scan(i);
    return out;
  }
  std::int64_t full_reach = 0;
  for (auto e : grid.extent_) full_reach = std::max(full_reach, e);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::int64_t reach = 1;; ++reach) {
      if (std::pow(2.0 * static_cast<double>(reach) + 1.0, static_cast<double>(d)) >
          4.0 * static_cast<double>(n)) {
        out[i] = kth_by_scan(i);
        break;
      }
      dist.clear();
      grid.scan_cells(points[i], reach, [&](std::size_t j) {
        if (j != i) dist.push_back(distance(points[i], points[j]));
      });
      if (dist.size() >= k) {
        auto nth = dist.begin() + static_cast<std::ptrdiff_t>(k - 1);
        std::nth_element(dist.begin(), nth, dist.end());
        // Every point within reach * width lies inside the scanned cube.
        if (*nth <= static_cast<double>(reach) * width || reach >= full_reach) {
          out[i] = *nth;
          break;
        }
      }
    }
  }
  return out;
}

std::size_t default_knn_k(std::size_t n) {
  if (n < 2) return 1;
  return static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(n))));
}

std::size_t default_min_pts(std::size_t n) {
  if (n < 2) return 1;
  return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n))));
}

std::size_t AdaptiveDeltaConfig::resolve_k(std::size_t n) const {
  const std::size_t kk = k ? *k : std::min(default_knn_k(n), n > 1 ? n - 1 : 1);
  require_k(kk, n);
  return kk;
}

double adaptive_delta(const PointSet& points, std::span<const std::size_t> active,
                      const AdaptiveDeltaConfig& cfg) {
  if (active.empty()) throw ConfigError("adaptive_delta: empty active set");
  const auto knn = knn_distance(points, cfg.resolve_k(points.size()));
  return adaptive_delta(knn, active, cfg.gamma);
}

double adaptive_delta(std::span<const double> knn, std::span<const std::size_t> active,
                      double gamma) {
  if (active.empty()) throw ConfigError("adaptive_delta: empty active set");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  std::vector<double> values;
  values.reserve(active.size());
  for (std::size_t i : active) {
    if (i >= knn.size()) throw AlignmentError("active index out of range");
    values.push_back(knn[i]);
  }
  return empirical_quantile(values, 1.0 - gamma);
}

std::vector<std::size_t> active_indices(std::span<const double> density, double lambda) {
  const auto mask = mask_at_least(density, lambda);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

NeighborhoodGraph::NeighborhoodGraph(const PointSet& points, double delta, EdgeRule rule)
    : delta_(delta), rule_(rule) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ConfigError("neighborhood radius must be positive and finite");
  }
  const std::size_t n = points.size();
  if (n > std::numeric_limits<std::uint32_t>::max()) throw InfeasibleError("too many points");
  const GridIndex grid(points, delta);
  offsets_.assign(n + 1, 0);
  std::vector<std::uint32_t> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    grid.for_each_within(points[i], delta, rule, [&](std::size_t j, double) {
      if (j != i) row.push_back(static_cast<std::uint32_t>(j));
    });
    std::sort(row.begin(), row.end());
    neighbors_.insert(neighbors_.end(), row.begin(), row.end());
    offsets_[i + 1] = neighbors_.size();
  }
}

SubPartition NeighborhoodGraph::components(std::span<const std::uint8_t> active) const {
  const std::size_t n = size();
  if (active.size() != n) throw AlignmentError("active mask does not match the graph size");
  DisjointSet sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    for (std::uint32_t j : neighbors(i)) {
      if (j > i && active[j]) sets.unite(i, j);
    }
  }
  std::vector<Label> labels(n, kNoise);
  for (std::size_t i = 0; i < n; ++i) {
    if (active[i]) labels[i] = static_cast<Label>(sets.find(i) + 1);
  }
  return SubPartition(std::move(labels));
}

SubPartition NeighborhoodGraph::cluster(std::span<const double> density, double lambda) const {
  if (density.size() != size()) {
    throw AlignmentError("density vector has " + std::to_string(density.size()) +
                         " entries, expected " + std::to_string(size()));
  }
  return components(mask_at_least(density, lambda));
}

SubPartition surrogate_cluster(const PointSet& points, std::span<const double> density,
                               double lambda, double delta, EdgeRule rule) {
  if (density.size() != points.size()) {
    throw AlignmentError("density vector does not match the point set");
  }
  const auto active = mask_at_least(density, lambda);
  if (std::none_of(active.begin(), active.end(), [](std::uint8_t a) { return a != 0; })) {
    return SubPartition::all_noise(points.size());
  }
  return NeighborhoodGraph(points, delta, rule).components(active);
}

namespace {

std::vector<std::uint8_t> core_mask(const NeighborhoodGraph& graph, std::size_t min_pts,
                                    const DbscanOptions& opts) {
  std::vector<std::uint8_t> core(graph.size(), 0);
  const std::size_t self = opts.count_self ? 1 : 0;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    core[i] = graph.neighbors(i).size() + self >= min_pts ? 1 : 0;
  }
  return core;
}

}  // namespace

SubPartition dbscan_star(const PointSet& points, double eps, std::size_t min_pts,
                         DbscanOptions opts) {
  if (min_pts < 1) throw ConfigError("min_pts must be at least 1");
  const NeighborhoodGraph graph(points, eps, EdgeRule::kClosed);
  return graph.components(core_mask(graph, min_pts, opts));
}

SubPartition dbscan_classic(const PointSet& points, double eps, std::size_t min_pts,
                            DbscanOptions opts) {
  if (min_pts < 1) throw ConfigError("min_pts must be at least 1");
  const NeighborhoodGraph graph(points, eps, EdgeRule::kClosed);
  const auto core = core_mask(graph, min_pts, opts);
  const SubPartition star = graph.components(core);
  std::vector<Label> labels(star.labels().begin(), star.labels().end());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (core[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    Label target = kNoise;
    for (std::uint32_t j : graph.neighbors(i)) {  // sorted, so ties keep the smaller index
      if (!core[j]) continue;
      const double dist = distance(points[i], points[j]);
      if (dist < best) {
        best = dist;
        target = star[j];
      }
    }
    labels[i] = target;
  }
  return SubPartition(std::move(labels));
}

double unit_ball_volume(std::size_t d) {
  if (d < 1) throw ConfigError("dimension must be at least 1");
  // v_d = 2 pi / d * v_{d-2}, starting from v_0 = 1 and v_1 = 2.
  double v = d % 2 == 0 ? 1.0 : 2.0;
  for (std::size_t k = d % 2 == 0 ? 2 : 3; k <= d; k += 2) {
    v *= 2.0 * std::numbers::pi / static_cast<double>(k);
  }
  return v;
}

double theory_min_delta(std::size_t n, std::size_t d, double lambda) {
  if (n < 2 || !(lambda > 0.0)) throw ConfigError("theory_min_delta needs n >= 2, lambda > 0");
  const double dd = static_cast<double>(d);
  const double inner = 16.0 * dd * std::log(static_cast<double>(n)) /
                       (lambda * unit_ball_volume(d) * static_cast<double>(n));
  return 2.0 * std::pow(inner, 1.0 / dd);
}

}  // namespace ballet
