#include "ballet/risk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <thread>

#include "ballet/errors.hpp"
#include "ballet/random.hpp"

namespace ballet {

DensityDrawEnsemble::DensityDrawEnsemble(std::size_t num_draws, std::size_t n,
                                         std::vector<double> values)
    : num_draws_(num_draws), n_(n), values_(std::move(values)) {
  if (num_draws_ == 0) throw ConfigError("ensemble needs at least one draw");
  if (values_.size() != num_draws_ * n_) {
    throw AlignmentError("ensemble holds " + std::to_string(values_.size()) +
                         " values, expected S * n = " + std::to_string(num_draws_ * n_));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]) || values_[k] < 0.0) {
      throw NumericError("ensemble value for draw " + std::to_string(k / n_) +
                         ", observation " + std::to_string(k % n_) +
                         " is negative or not finite");
    }
  }
}

std::vector<double> DensityDrawEnsemble::mean() const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t s = 0; s < num_draws_; ++s) {
    auto r = row(s);
    for (std::size_t i = 0; i < n_; ++i) out[i] += r[i];
  }
  for (double& v : out) v /= static_cast<double>(num_draws_);
  return out;
}

std::vector<SubPartition> draw_clusterings(const PointSet& points,
                                           const DensityDrawEnsemble& ensemble, double lambda,
                                           double delta, EdgeRule rule) {
  if (ensemble.size() != points.size()) {
    throw AlignmentError("ensemble has n = " + std::to_string(ensemble.size()) +
                         " but the data has " + std::to_string(points.size()) + " points");
  }
  return draw_clusterings(NeighborhoodGraph(points, delta, rule), ensemble, lambda);
}

std::vector<SubPartition> draw_clusterings(const NeighborhoodGraph& graph,
                                           const DensityDrawEnsemble& ensemble, double lambda) {
  if (ensemble.size() != graph.size()) {
    throw AlignmentError("ensemble has n = " + std::to_string(ensemble.size()) +
                         " but the graph has " + std::to_string(graph.size()) + " vertices");
  }
  std::vector<SubPartition> out;
  out.reserve(ensemble.num_draws());
  for (std::size_t s = 0; s < ensemble.num_draws(); ++s) {
    out.push_back(graph.cluster(ensemble.row(s), lambda));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Co-clustering statistics

namespace {
constexpr double kMaxPairEntries = 4.0e8;
constexpr std::uint32_t kJointUnit = 1u << 16;
}  // namespace

CoClusteringStats::CoClusteringStats(std::span<const SubPartition> clusterings) {
  if (clusterings.empty()) throw ConfigError("co-clustering statistics need at least one draw");
  if (clusterings.size() > kMaxDraws) {
    throw InfeasibleError("at most " + std::to_string(kMaxDraws) + " draws are supported");
  }
  n_ = clusterings.front().size();
  num_draws_ = clusterings.size();
  for (const auto& c : clusterings) {
    if (c.size() != n_) throw AlignmentError("draw clusterings have different sizes");
  }

  std::vector<std::size_t> active_count(n_, 0);
  for (const auto& c : clusterings) {
    for (std::size_t i = 0; i < n_; ++i) active_count[i] += c.is_active(i) ? 1 : 0;
  }
  alpha_.resize(n_);
  compact_.assign(n_, -1);
  for (std::size_t i = 0; i < n_; ++i) {
    alpha_[i] = static_cast<double>(active_count[i]) / static_cast<double>(num_draws_);
    if (active_count[i] > 0) {
      compact_[i] = static_cast<std::int64_t>(members_.size());
      members_.push_back(i);
    }
  }
  const std::size_t m = members_.size();
  if (0.5 * static_cast<double>(m) * static_cast<double>(m) > kMaxPairEntries) {
    throw InfeasibleError(std::to_string(m) +
                          " ever-active points exceed the pair-count memory limit");
  }
  counts_.assign(m < 2 ? 0 : m * (m - 1) / 2, 0);

  std::vector<std::size_t> active;
  std::vector<std::vector<std::size_t>> groups;
  for (const auto& c : clusterings) {
    active.clear();
    groups.assign(static_cast<std::size_t>(c.num_clusters()), {});
    for (std::size_t i = 0; i < n_; ++i) {
      if (!c.is_active(i)) continue;
      const auto u = static_cast<std::size_t>(compact_[i]);
      active.push_back(u);
      groups[static_cast<std::size_t>(c[i] - 1)].push_back(u);
    }
    for (std::size_t x = 1; x < active.size(); ++x) {
      std::uint32_t* row = counts_.data() + active[x] * (active[x] - 1) / 2;
      for (std::size_t y = 0; y < x; ++y) row[active[y]] += kJointUnit;
    }
    for (const auto& g : groups) {
      for (std::size_t x = 1; x < g.size(); ++x) {
        std::uint32_t* row = counts_.data() + g[x] * (g[x] - 1) / 2;
        for (std::size_t y = 0; y < x; ++y) row[g[y]] += 1;
      }
    }
  }
}

double CoClusteringStats::together(std::size_t i, std::size_t j) const {
  if (i == j || compact_[i] < 0 || compact_[j] < 0) return 0.0;
  const auto c = packed_counts(static_cast<std::size_t>(compact_[i]),
                               static_cast<std::size_t>(compact_[j]));
  return static_cast<double>(c & 0xffffu) / static_cast<double>(num_draws_);
}

double CoClusteringStats::apart(std::size_t i, std::size_t j) const {
  if (i == j || compact_[i] < 0 || compact_[j] < 0) return 0.0;
  const auto c = packed_counts(static_cast<std::size_t>(compact_[i]),
                               static_cast<std::size_t>(compact_[j]));
  return static_cast<double>((c >> 16) - (c & 0xffffu)) / static_cast<double>(num_draws_);
}

CoClusteringStats precompute_stats(std::span<const SubPartition> clusterings) {
  return CoClusteringStats(clusterings);
}

double empirical_risk(const SubPartition& c, const CoClusteringStats& stats,
                      const LossParams& p) {
  const std::size_t n = stats.size();
  if (c.size() != n) throw AlignmentError("sub-partition size does not match the statistics");
  p.validate();
  const double scale = static_cast<double>(n) - 1.0;
  double unary = 0.0;
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (c.is_active(i)) {
      unary += p.m_ia * (1.0 - stats.alpha(i));
      if (stats.compact_index(i) >= 0) active.push_back(i);
    } else {
      unary += p.m_ai * stats.alpha(i);
    }
  }
  const double S = static_cast<double>(stats.num_draws());
  double together_cost = 0.0;  // counts, scaled once at the end
  double apart_cost = 0.0;
  for (std::size_t x = 1; x < active.size(); ++x) {
    const auto u = static_cast<std::size_t>(stats.compact_index(active[x]));
    for (std::size_t y = 0; y < x; ++y) {
      const auto v = static_cast<std::size_t>(stats.compact_index(active[y]));
      const std::uint32_t cnt = stats.packed_counts(u, v);
      const std::uint32_t co = cnt & 0xffffu;
      if (c[active[x]] == c[active[y]]) {
        apart_cost += static_cast<double>((cnt >> 16) - co);
      } else {
        together_cost += static_cast<double>(co);
      }
    }
  }
  return scale * unary + (p.a * together_cost + p.b * apart_cost) / S;
}

std::vector<Label> incremental_best_assignment(std::span<const Label> partial, std::size_t next,
                                               const CoClusteringStats& stats,
                                               const LossParams& p) {
  const std::size_t n = stats.size();
  if (partial.size() != n) throw AlignmentError("partial assignment has the wrong length");
  if (next >= n) throw ConfigError("next index out of range");
  if (partial[next] != kUnassigned) throw ConfigError("next point is already assigned");
  p.validate();

  const double scale = static_cast<double>(n) - 1.0;
  const double alpha = stats.alpha(next);
  const double cost_noise = scale * p.m_ai * alpha;
  const double unary_active = scale * p.m_ia * (1.0 - alpha);
  double apart_all = 0.0;
  std::map<Label, double> shift;
  Label top = kNoise;
  for (std::size_t j = 0; j < n; ++j) {
    const Label l = partial[j];
    if (l == kUnassigned || l == kNoise) continue;
    if (l < 0) throw ConfigError("invalid label in partial assignment");
    top = std::max(top, l);
    const double t = p.a * stats.together(next, j);
    apart_all += t;
    shift[l] += p.b * stats.apart(next, j) - t;
  }

  Label choice = kNoise;
  double best = cost_noise;
  if (unary_active + apart_all < best) {
    best = unary_active + apart_all;
    choice = top + 1;
  }
  for (const auto& [label, delta] : shift) {
    const double cost = unary_active + apart_all + delta;
    if (cost < best) {
      best = cost;
      choice = label;
    }
  }
  std::vector<Label> out(partial.begin(), partial.end());
  out[next] = choice;
  return out;
}

// ---------------------------------------------------------------------------
// Search

void SearchConfig::validate() const {
  if (n_restarts < 1 || max_sweeten_passes < 1 || n_zealous_attempts < 0) {
    throw ConfigError("search needs at least one restart and one sweetening pass");
  }
}

namespace {

/// Sub-partition over the ever-active points with the running risk kept up
/// to date move by move. Points that are never active stay noise.
class Partitioner {
 public:
  Partitioner(const CoClusteringStats& stats, const LossParams& p)
      : stats_(stats),
        m_(stats.ever_active().size()),
        label_(m_, kUnassigned),
        size_(1, 0),
        shift_(1, 0.0) {
    const double scale = static_cast<double>(stats.size()) - 1.0;
    const double S = static_cast<double>(stats.num_draws());
    unary_noise_.resize(m_);
    unary_active_.resize(m_);
    for (std::size_t u = 0; u < m_; ++u) {
      const double alpha = stats.alpha(stats.ever_active()[u]);
      unary_noise_[u] = scale * p.m_ai * alpha;
      unary_active_[u] = scale * p.m_ia * (1.0 - alpha);
    }
    together_weight_ = p.a / S;
    apart_weight_ = p.b / S;
    tolerance_ = 1e-12 * (1.0 + scale) * (1.0 + std::max({p.a, p.b, p.m_ai, p.m_ia}));
  }

  std::size_t size() const { return m_; }
  double risk() const { return risk_; }
  double tolerance() const { return tolerance_; }

  void clear() {
    std::fill(label_.begin(), label_.end(), kUnassigned);
    size_.assign(1, 0);
    shift_.assign(1, 0.0);
    free_.clear();
    risk_ = 0.0;
  }

  /// Evaluates every candidate cell for u; fills shift_ and base_.
  void evaluate(std::size_t u) {
    std::fill(shift_.begin(), shift_.end(), 0.0);
    double apart_all = 0.0;
    for (std::size_t v = 0; v < m_; ++v) {
      const Label l = label_[v];
      if (l <= kNoise || v == u) continue;
      const std::uint32_t c = stats_.packed_counts(u, v);
      const std::uint32_t co = c & 0xffffu;
      const double t = together_weight_ * static_cast<double>(co);
      apart_all += t;
      shift_[static_cast<std::size_t>(l)] +=
          apart_weight_ * static_cast<double>((c >> 16) - co) - t;
    }
    base_ = unary_active_[u] + apart_all;
  }

  /// Cost of placing u in `target` after evaluate(u). Label 0 is noise;
  /// an empty or unknown label means a new cluster.
  double cost(std::size_t u, Label target) const {
    if (target == kNoise) return unary_noise_[u];
    const auto h = static_cast<std::size_t>(target);
    if (h >= size_.size() || members_excluding(u, target) == 0) return base_;
    return base_ + shift_[h];
  }

  /// Cheapest cell after evaluate(u), in the order noise, new, clusters.
  /// Returns the label to use, where size_.size() stands for a new cluster.
  std::pair<Label, double> best_cell(std::size_t u) const {
    Label choice = kNoise;
    double best = unary_noise_[u];
    const auto fresh = static_cast<Label>(size_.size());
    if (base_ < best) {
      best = base_;
      choice = fresh;
    }
    for (std::size_t h = 1; h < size_.size(); ++h) {
      if (members_excluding(u, static_cast<Label>(h)) == 0) continue;
      const double c = base_ + shift_[h];
      if (c < best) {
        best = c;
        choice = static_cast<Label>(h);
      }
    }
    return {choice, best};
  }

  void assign(std::size_t u, Label target, double cost) {
    if (target != kNoise) {
      if (static_cast<std::size_t>(target) >= size_.size()) {
        target = open_cluster();
      } else if (size_[static_cast<std::size_t>(target)] == 0) {
        auto it = std::find(free_.begin(), free_.end(), target);
        if (it != free_.end()) free_.erase(it);
      }
    }
    label_[u] = target;
    if (target != kNoise) ++size_[static_cast<std::size_t>(target)];
    risk_ += cost;
  }

  void unassign(std::size_t u, double cost) {
    const Label l = label_[u];
    if (l > kNoise && --size_[static_cast<std::size_t>(l)] == 0) free_.push_back(l);
    label_[u] = kUnassigned;
    risk_ -= cost;
  }

  /// Current cost of u where it sits.
  double current_cost(std::size_t u) {
    evaluate(u);
    return cost(u, label_[u]);
  }

  void place_best(std::size_t u) {
    evaluate(u);
    auto [cell, c] = best_cell(u);
    assign(u, cell, c);
  }

  /// Loads a full labeling (indexed by compact position).
  void load(std::span<const Label> labels) {
    clear();
    for (std::size_t u = 0; u < m_; ++u) {
      evaluate(u);
      Label l = labels[u];
      if (l != kNoise) {
        while (static_cast<std::size_t>(l) >= size_.size()) {
          size_.push_back(0);
          shift_.push_back(0.0);
        }
      }
      assign(u, l, cost(u, l));
    }
    free_.clear();
    for (std::size_t h = 1; h < size_.size(); ++h) {
      if (size_[h] == 0) free_.push_back(static_cast<Label>(h));
    }
  }

  void build_incrementally(Rng& rng) {
    clear();
    std::vector<std::size_t> order(m_);
    for (std::size_t u = 0; u < m_; ++u) order[u] = u;
    rng.shuffle(order);
    for (std::size_t u : order) place_best(u);
  }

  /// One pass over the points in random order; returns accepted moves.
  std::size_t sweeten_pass(Rng& rng) {
    std::vector<std::size_t> order(m_);
    for (std::size_t u = 0; u < m_; ++u) order[u] = u;
    rng.shuffle(order);
    std::size_t moves = 0;
    for (std::size_t u : order) {
      evaluate(u);
      const Label here = label_[u];
      const double now = cost(u, here);
      auto [cell, c] = best_cell(u);
      if (c < now - tolerance_) {
        unassign(u, now);
        // Removing u leaves the other points' terms unchanged, so the
        // evaluated costs still hold.
        assign(u, cell, c);
        ++moves;
      }
    }
    return moves;
  }

  void sweeten(Rng& rng, int max_passes) {
    for (int pass = 0; pass < max_passes; ++pass) {
      if (sweeten_pass(rng) == 0) break;
    }
  }

  /// Destroys the noise set or one cluster chosen uniformly, rebuilds its
  /// members incrementally and keeps the result iff the risk drops.
  bool zealous_attempt(Rng& rng) {
    std::vector<Label> cells;
    bool has_noise = false;
    for (Label l : label_) has_noise = has_noise || l == kNoise;
    if (has_noise) cells.push_back(kNoise);
    for (std::size_t h = 1; h < size_.size(); ++h) {
      if (size_[h] > 0) cells.push_back(static_cast<Label>(h));
    }
    if (cells.empty()) return false;
    const Label victim = cells[rng.uniform_index(cells.size())];

    const auto saved_label = label_;
    const auto saved_size = size_;
    const auto saved_free = free_;
    const double saved_risk = risk_;

    std::vector<std::size_t> members;
    for (std::size_t u = 0; u < m_; ++u) {
      if (label_[u] == victim) members.push_back(u);
    }
    for (std::size_t u : members) unassign(u, current_cost(u));
    rng.shuffle(members);
    for (std::size_t u : members) place_best(u);

    if (risk_ < saved_risk - tolerance_) return true;
    label_ = saved_label;
    size_ = saved_size;
    shift_.resize(size_.size());
    free_ = saved_free;
    risk_ = saved_risk;
    return false;
  }

  /// Canonical labels over all n observations.
  SubPartition to_subpartition() const {
    std::vector<Label> labels(stats_.size(), kNoise);
    for (std::size_t u = 0; u < m_; ++u) {
      labels[stats_.ever_active()[u]] = std::max(label_[u], kNoise);
    }
    return SubPartition(std::move(labels));
  }

 private:
  std::size_t members_excluding(std::size_t u, Label h) const {
    const std::size_t count = size_[static_cast<std::size_t>(h)];
    return label_[u] == h ? count - 1 : count;
  }

  Label open_cluster() {
    if (!free_.empty()) {
      auto it = std::min_element(free_.begin(), free_.end());
      const Label l = *it;
      free_.erase(it);
      return l;
    }
    size_.push_back(0);
    shift_.push_back(0.0);
    return static_cast<Label>(size_.size() - 1);
  }

  const CoClusteringStats& stats_;
  std::size_t m_;
  std::vector<Label> label_;
  std::vector<std::size_t> size_;  // by label; slot 0 unused
  std::vector<double> shift_;      // by label, filled by evaluate()
  std::vector<Label> free_;
  std::vector<double> unary_noise_;
  std::vector<double> unary_active_;
  double together_weight_ = 0.0;
  double apart_weight_ = 0.0;
  double tolerance_ = 0.0;
  double base_ = 0.0;
  double risk_ = 0.0;
};

struct RestartOutcome {
  SubPartition estimate;
  double risk = 0.0;
};

RestartOutcome run_restart(const CoClusteringStats& stats, const LossParams& p,
                           const SearchConfig& cfg, std::span<const SubPartition> draws,
                           int restart) {
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
  Partitioner part(stats, p);
  if (restart % 2 == 1 && !draws.empty()) {
    const SubPartition& start = draws[rng.uniform_index(draws.size())];
    std::vector<Label> compact(part.size());
    for (std::size_t u = 0; u < part.size(); ++u) compact[u] = start[stats.ever_active()[u]];
    part.load(compact);
  } else {
    part.build_incrementally(rng);
  }
  part.sweeten(rng, cfg.max_sweeten_passes);
  for (int z = 0; z < cfg.n_zealous_attempts; ++z) {
    if (part.zealous_attempt(rng)) part.sweeten(rng, cfg.max_sweeten_passes);
  }
  RestartOutcome out;
  out.estimate = part.to_subpartition();
  out.risk = empirical_risk(out.estimate, stats, p);
  return out;
}

}  // namespace

SearchResult search(const CoClusteringStats& stats, const LossParams& p,
                    const SearchConfig& cfg, std::span<const SubPartition> draws) {
  cfg.validate();
  p.validate();
  for (const auto& d : draws) {
    if (d.size() != stats.size()) throw AlignmentError("draw size does not match the statistics");
  }

  const auto restarts = static_cast<std::size_t>(cfg.n_restarts);
  std::vector<RestartOutcome> outcomes(restarts);
  unsigned workers = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(restarts)));
  if (workers == 1) {
    for (std::size_t r = 0; r < restarts; ++r) {
      outcomes[r] = run_restart(stats, p, cfg, draws, static_cast<int>(r));
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < restarts; r += workers) {
            outcomes[r] = run_restart(stats, p, cfg, draws, static_cast<int>(r));
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  SearchResult result;
  result.restarts = cfg.n_restarts;
  result.seed = cfg.seed;
  for (std::size_t r = 0; r < restarts; ++r) {
    if (result.best_restart < 0 || outcomes[r].risk < result.risk) {
      result.risk = outcomes[r].risk;
      result.estimate = std::move(outcomes[r].estimate);
      result.best_restart = static_cast<int>(r);
    }
  }
  auto consider = [&](const SubPartition& c) {
    const double r = empirical_risk(c, stats, p);
    if (r < result.risk) {
      result.risk = r;
      result.estimate = c;
      result.best_restart = -1;
    }
  };
  consider(SubPartition::all_noise(stats.size()));
  for (const auto& d : draws) consider(d);
  return result;
}

SubPartition plugin_estimate(const PointSet& points, const DensityDrawEnsemble& ensemble,
                             double lambda, double delta, EdgeRule rule) {
  if (ensemble.size() != points.size()) {
    throw AlignmentError("ensemble has n = " + std::to_string(ensemble.size()) +
                         " but the data has " + std::to_string(points.size()) + " points");
  }
  const auto mean = ensemble.mean();
  return surrogate_cluster(points, mean, lambda, delta, rule);
}

}  // namespace ballet
