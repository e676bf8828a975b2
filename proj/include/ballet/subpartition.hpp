#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ballet {

using Label = std::int32_t;

/// Allocation label reserved for noise (inactive) observations.
inline constexpr Label kNoise = 0;

/// A clustering of n observations in which some observations may be left
/// out as noise. Labels are stored in canonical form: noise is 0 and cluster
/// ids 1..k are numbered by first occurrence, so two sub-partitions compare
/// equal exactly when they have the same active set and the same grouping
/// of active points.
class SubPartition {
 public:
  SubPartition() = default;

  /// Takes arbitrary non-negative labels (0 = noise) and canonicalizes them.
  explicit SubPartition(std::vector<Label> labels);

  static SubPartition all_noise(std::size_t n);
  static SubPartition one_cluster(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  int num_clusters() const { return num_clusters_; }
  std::size_t num_active() const;

  Label operator[](std::size_t i) const { return labels_[i]; }
  std::span<const Label> labels() const { return labels_; }
  bool is_active(std::size_t i) const { return labels_[i] != kNoise; }

  /// Member indices of each cluster, in cluster-id order.
  std::vector<std::vector<std::size_t>> clusters() const;
  std::vector<std::size_t> cluster_sizes() const;

  bool operator==(const SubPartition&) const = default;

 private:
  std::vector<Label> labels_;
  int num_clusters_ = 0;
};

struct SubPartitionHash {
  std::size_t operator()(const SubPartition& c) const noexcept;
};

/// Parameters of the Inactive/Active Binder loss.
struct LossParams {
  double a = 1.0;     ///< together in the first, apart in the second
  double b = 1.0;     ///< apart in the first, together in the second
  double m_ai = 0.5;  ///< active in the first, inactive in the second
  double m_ia = 0.5;  ///< inactive in the first, active in the second

  /// True when the rescaled loss is a metric bounded by one:
  /// 0 < a = b <= 1, m_ai = m_ia = m <= 1 and a <= 2m.
  bool is_metric() const;
  void validate() const;
};

/// Inactive/Active Binder loss. Computed from the contingency table of the
/// two labelings in O(n).
double ia_binder_loss(const SubPartition& c1, const SubPartition& c2,
                      const LossParams& p = {});

struct RescaledDistance {
  double value = 0.0;
  /// False when the loss parameters fall outside the metric regime; the
  /// value is still the rescaled loss but carries no metric guarantee.
  bool metric = true;
};

/// The loss divided by n(n-1)/2.
RescaledDistance rescaled_distance(const SubPartition& c1, const SubPartition& c2,
                                   const LossParams& p = {});

/// The same loss accumulated pair by pair from per-pair penalties. In the
/// metric regime each penalty is one of {0, a, m, 2m}. O(n^2); kept as an
/// independent route to `ia_binder_loss`.
double pairwise_penalty_sum(const SubPartition& c1, const SubPartition& c2,
                            const LossParams& p = {});

/// Lattice order: c1 precedes c2 when every cluster of c1 is contained in a
/// cluster of c2 (so the active set of c1 is contained in that of c2).
bool precedes(const SubPartition& c1, const SubPartition& c2);

/// Greatest lower bound: the nonempty intersections of clusters.
SubPartition meet(const SubPartition& c1, const SubPartition& c2);

/// Least upper bound: clusters of both arguments merged transitively
/// wherever they overlap, over the union of the active sets.
SubPartition join(const SubPartition& c1, const SubPartition& c2);

/// Covering moves upward in the lattice: merge two clusters, or activate a
/// noise point as its own singleton cluster.
std::vector<SubPartition> hasse_up(const SubPartition& c);

/// Covering moves downward: split a cluster in two, or deactivate a
/// singleton cluster. Enumerates every bipartition, so clusters are
/// limited to 20 members.
std::vector<SubPartition> hasse_down(const SubPartition& c);

/// Largest n accepted by `enumerate_subpartitions`.
inline constexpr std::size_t kMaxEnumerationSize = 9;

/// Calls `visit` once for every sub-partition of n items (Bell(n + 1) in
/// total), in restricted-growth-string order with a pinned noise anchor.
void for_each_subpartition(std::size_t n,
                           const std::function<void(const SubPartition&)>& visit);

std::vector<SubPartition> enumerate_subpartitions(std::size_t n);

}  // namespace ballet
