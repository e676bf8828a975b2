#include "ballet/levels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

#include "ballet/errors.hpp"

namespace ballet {

void LevelSpec::validate() const {
  if (!std::isfinite(value)) throw ConfigError("level value must be finite");
  switch (kind) {
    case LevelKind::kLambda:
      if (value < 0.0) throw ConfigError("lambda must be non-negative");
      break;
    case LevelKind::kNoiseFraction:
      if (!(value >= 0.0 && value < 1.0)) throw ConfigError("noise fraction must lie in [0, 1)");
      break;
    case LevelKind::kCosmoC:
      if (value < -1.0) throw ConfigError("c must be at least -1");
      break;
  }
}

double noise_fraction_level(std::span<const double> density, double nu) {
  if (density.empty()) throw ConfigError("noise-fraction level needs reference densities");
  if (!(nu >= 0.0 && nu < 1.0)) throw ConfigError("noise fraction must lie in [0, 1)");
  const std::size_t n = density.size();
  const auto below = static_cast<std::size_t>(std::ceil(nu * static_cast<double>(n) - 1e-9));
  const std::size_t rank = std::min(below, n - 1);  // 0-based
  std::vector<double> sorted(density.begin(), density.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank),
                   sorted.end());
  return sorted[rank];
}

double resolve_level(const LevelSpec& spec, std::span<const double> reference_density,
                     std::optional<double> domain_volume) {
  spec.validate();
  switch (spec.kind) {
    case LevelKind::kLambda:
      return spec.value;
    case LevelKind::kNoiseFraction:
      if (reference_density.empty()) {
        throw ConfigError("a noise-fraction level needs reference densities");
      }
      return noise_fraction_level(reference_density, spec.value);
    case LevelKind::kCosmoC:
      if (!domain_volume || !(*domain_volume > 0.0)) {
        throw ConfigError("a c-level needs a positive domain volume");
      }
      return (1.0 + spec.value) / *domain_volume;
  }
  throw ConfigError("unknown level kind");
}

std::optional<std::size_t> kneedle(std::span<const double> x, std::span<const double> y,
                                   double sensitivity) {
  const std::size_t n = x.size();
  if (y.size() != n) throw AlignmentError("knee curve coordinates differ in length");
  if (n < 3) return std::nullopt;
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  const double xr = *xmax - *xmin;
  const double yr = *ymax - *ymin;
  if (!(xr > 0.0) || !(yr > 0.0)) return std::nullopt;

  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = (y[i] - *ymin) / yr - (x[i] - *xmin) / xr;
  }
  // Floating-point wiggle on a straight line is not a knee.
  constexpr double kFlat = 1e-9;
  const double step = sensitivity / static_cast<double>(n - 1);

  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (diff[i] >= diff[i - 1] && diff[i] > diff[i + 1]) maxima.push_back(i);
  }
  std::optional<std::size_t> best;
  for (std::size_t t = 0; t < maxima.size(); ++t) {
    const std::size_t at = maxima[t];
    if (diff[at] <= kFlat) continue;
    const double threshold = diff[at] - step;
    const std::size_t stop = t + 1 < maxima.size() ? maxima[t + 1] : n;
    bool drops = false;
    for (std::size_t j = at + 1; j < stop; ++j) {
      if (diff[j] < threshold) {
        drops = true;
        break;
      }
    }
    if (drops && (!best || diff[at] > diff[*best])) best = at;
  }
  return best;
}

ElbowLevel elbow_level(std::span<const double> density, double fallback_nu) {
  if (density.size() < 2) throw ConfigError("elbow detection needs at least two densities");
  std::vector<double> sorted(density.begin(), density.end());
  for (double v : sorted) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw NumericError("elbow detection needs positive finite densities");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> rank(sorted.size()), logd(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    rank[i] = static_cast<double>(i);
    logd[i] = std::log(sorted[i]);
  }
  ElbowLevel out;
  out.knee_rank = kneedle(rank, logd);
  if (!out.knee_rank) {
    out.fallback = true;
    out.lambda = noise_fraction_level(density, fallback_nu);
  } else {
    out.lambda = sorted[*out.knee_rank];
  }
  const auto below = std::lower_bound(sorted.begin(), sorted.end(), out.lambda) - sorted.begin();
  out.implied_nu = static_cast<double>(below) / static_cast<double>(sorted.size());
  return out;
}

// ---------------------------------------------------------------------------

ClusterTree::ClusterTree(std::vector<double> levels, std::vector<SubPartition> partitions)
    : levels_(std::move(levels)), partitions_(std::move(partitions)) {
  if (levels_.empty() || levels_.size() != partitions_.size()) {
    throw AlignmentError("cluster tree needs one partition per level");
  }
  for (std::size_t r = 1; r < levels_.size(); ++r) {
    if (!(levels_[r] > levels_[r - 1])) throw ConfigError("tree levels must be increasing");
    if (partitions_[r].size() != partitions_[0].size()) {
      throw AlignmentError("tree partitions have different sizes");
    }
  }
  for (std::size_t r = 0; r < rows(); ++r) {
    row_start_.push_back(nodes_.size());
    const auto sizes = partitions_[r].cluster_sizes();
    for (std::size_t h = 0; h < sizes.size(); ++h) {
      nodes_.push_back({r, static_cast<Label>(h + 1), sizes[h]});
    }
  }
  row_start_.push_back(nodes_.size());
  parent_.assign(nodes_.size(), std::nullopt);
  children_.assign(nodes_.size(), {});

  for (std::size_t r = 0; r + 1 < rows(); ++r) {
    const SubPartition& up = partitions_[r];
    const SubPartition& down = partitions_[r + 1];
    std::map<std::pair<Label, Label>, std::size_t> shared;  // (lower, upper) -> count
    for (std::size_t i = 0; i < up.size(); ++i) {
      if (up.is_active(i) && down.is_active(i)) ++shared[{down[i], up[i]}];
    }
    std::vector<std::size_t> best(nodes_.size(), 0);
    std::vector<std::size_t> overlaps(nodes_.size(), 0);
    for (const auto& [key, count] : shared) {
      const std::size_t lower = row_start_[r + 1] + static_cast<std::size_t>(key.first - 1);
      const std::size_t upper = row_start_[r] + static_cast<std::size_t>(key.second - 1);
      edges_.push_back({upper, lower, count});
      ++overlaps[lower];
      // Upper ids arrive in increasing order, so ties keep the smaller id.
      if (count > best[lower]) {
        best[lower] = count;
        parent_[lower] = upper;
      }
    }
    for (std::size_t v = row_start_[r + 1]; v < row_start_[r + 2]; ++v) {
      if (overlaps[v] > 1) ambiguous_.push_back(v);
      if (parent_[v]) children_[*parent_[v]].push_back(v);
    }
  }
}

std::optional<std::size_t> ClusterTree::node_id(std::size_t row, Label cluster) const {
  if (row >= rows() || cluster < 1) return std::nullopt;
  const std::size_t id = row_start_[row] + static_cast<std::size_t>(cluster - 1);
  if (id >= row_start_[row + 1]) return std::nullopt;
  return id;
}

std::string ClusterTree::to_dot() const {
  std::ostringstream out;
  out << "digraph cluster_tree {\n  rankdir=TB;\n";
  for (std::size_t r = 0; r < rows(); ++r) {
    out << "  { rank=same;";
    for (std::size_t v = row_start_[r]; v < row_start_[r + 1]; ++v) out << " n" << v << ';';
    out << " }\n";
  }
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    const auto& node = nodes_[v];
    out << "  n" << v << " [label=\"L" << node.row << " C" << node.cluster << "\\n"
        << node.size << " pts\"];\n";
  }
  for (const auto& e : edges_) {
    out << "  n" << e.upper << " -> n" << e.lower << " [label=\"" << e.shared << "\"";
    if (parent_[e.lower] != e.upper) out << ", style=dashed";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string ClusterTree::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["levels"] = levels_;
  j["cluster_counts"] = nlohmann::json::array();
  for (const auto& p : partitions_) j["cluster_counts"].push_back(p.num_clusters());
  j["nodes"] = nlohmann::json::array();
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    nlohmann::json node = {{"id", v},
                           {"row", nodes_[v].row},
                           {"cluster", nodes_[v].cluster},
                           {"size", nodes_[v].size}};
    node["parent"] = parent_[v] ? nlohmann::json(*parent_[v]) : nlohmann::json(nullptr);
    j["nodes"].push_back(std::move(node));
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : edges_) {
    j["edges"].push_back({{"upper", e.upper}, {"lower", e.lower}, {"shared", e.shared}});
  }
  j["ambiguous_nodes"] = ambiguous_;
  return j.dump(2);
}

ClusterTree build_cluster_tree(const PointSet& points, const DensityDrawEnsemble& ensemble,
                               std::vector<double> levels, double delta,
                               const TreeConfig& cfg) {
  if (levels.size() < 2) throw ConfigError("a cluster tree needs at least two levels");
  if (ensemble.size() != points.size()) {
    throw AlignmentError("ensemble does not match the point set");
  }
  std::sort(levels.begin(), levels.end());
  const NeighborhoodGraph graph(points, delta);
  std::vector<SubPartition> partitions;
  partitions.reserve(levels.size());
  const auto mean = ensemble.mean();
  for (double lambda : levels) {
    if (cfg.estimator == TreeEstimator::kPlugin) {
      partitions.push_back(graph.cluster(mean, lambda));
    } else {
      const auto draws = draw_clusterings(graph, ensemble, lambda);
      const CoClusteringStats stats(draws);
      partitions.push_back(search(stats, cfg.loss, cfg.search, draws).estimate);
    }
  }
  return ClusterTree(std::move(levels), std::move(partitions));
}

std::vector<std::size_t> persistent_clusters(const ClusterTree& tree, bool strict) {
  const auto& ambiguous = tree.ambiguous();
  std::vector<std::size_t> out;
  const std::size_t bottom = tree.rows() - 1;
  for (std::size_t v = 0; v < tree.nodes().size(); ++v) {
    if (tree.nodes()[v].row != bottom) continue;
    std::size_t at = v;
    for (;;) {
      if (strict && std::find(ambiguous.begin(), ambiguous.end(), at) != ambiguous.end()) {
        throw ConfigError("cluster " + std::to_string(tree.nodes()[at].cluster) + " at row " +
                          std::to_string(tree.nodes()[at].row) +
                          " overlaps more than one cluster in the row above");
      }
      const auto up = tree.parent(at);
      if (tree.nodes()[at].row == 0 || !up || tree.children(*up).size() > 1) break;
      at = *up;
    }
    out.push_back(at);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace ballet
