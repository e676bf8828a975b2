#include "ballet/subpartition.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "ballet/disjoint_set.hpp"
#include "ballet/errors.hpp"

namespace ballet {
namespace {

void require_same_size(const SubPartition& c1, const SubPartition& c2,
                       const char* op) {
  if (c1.size() != c2.size()) {
    throw AlignmentError(std::string(op) + ": sub-partitions have different sizes (" +
                         std::to_string(c1.size()) + " vs " +
                         std::to_string(c2.size()) + ")");
  }
}

std::int64_t pairs(std::int64_t count) { return count * (count - 1) / 2; }

}  // namespace

SubPartition::SubPartition(std::vector<Label> labels) : labels_(std::move(labels)) {
  std::unordered_map<Label, Label> remap;
  Label next = 1;
  for (Label& l : labels_) {
    if (l < 0) throw ConfigError("sub-partition labels must be non-negative");
    if (l == kNoise) continue;
    auto [it, inserted] = remap.try_emplace(l, next);
    if (inserted) ++next;
    l = it->second;
  }
  num_clusters_ = next - 1;
}

SubPartition SubPartition::all_noise(std::size_t n) {
  return SubPartition(std::vector<Label>(n, kNoise));
}

SubPartition SubPartition::one_cluster(std::size_t n) {
  return SubPartition(std::vector<Label>(n, 1));
}

std::size_t SubPartition::num_active() const {
  return static_cast<std::size_t>(
      std::count_if(labels_.begin(), labels_.end(), [](Label l) { return l != kNoise; }));
}

std::vector<std::vector<std::size_t>> SubPartition::clusters() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_clusters_));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != kNoise) out[static_cast<std::size_t>(labels_[i] - 1)].push_back(i);
  }
  return out;
}

std::vector<std::size_t> SubPartition::cluster_sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(num_clusters_), 0);
  for (Label l : labels_) {
    if (l != kNoise) ++out[static_cast<std::size_t>(l - 1)];
  }
  return out;
}

std::size_t SubPartitionHash::operator()(const SubPartition& c) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (Label l : c.labels()) {
    h ^= static_cast<std::size_t>(l) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

bool LossParams::is_metric() const {
  return a > 0.0 && a == b && a <= 1.0 && m_ai == m_ia && m_ai <= 1.0 && a <= 2.0 * m_ai;
}

void LossParams::validate() const {
  for (double v : {a, b, m_ai, m_ia}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("loss parameters must be finite and non-negative");
    }
  }
}

double ia_binder_loss(const SubPartition& c1, const SubPartition& c2, const LossParams& p) {
  require_same_size(c1, c2, "ia_binder_loss");
  p.validate();
  const std::size_t n = c1.size();
  if (n == 0) return 0.0;

  std::int64_t active_inactive = 0;  // |A ∩ I'|
  std::int64_t inactive_active = 0;  // |I ∩ A'|
  std::vector<std::int64_t> rows(static_cast<std::size_t>(c1.num_clusters()) + 1, 0);
  std::vector<std::int64_t> cols(static_cast<std::size_t>(c2.num_clusters()) + 1, 0);
  std::vector<std::uint64_t> cells;
  cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool on1 = c1.is_active(i);
    const bool on2 = c2.is_active(i);
    if (on1 && !on2) ++active_inactive;
    if (!on1 && on2) ++inactive_active;
    if (on1 && on2) {
      ++rows[static_cast<std::size_t>(c1[i])];
      ++cols[static_cast<std::size_t>(c2[i])];
      cells.push_back((static_cast<std::uint64_t>(c1[i]) << 32) |
                      static_cast<std::uint32_t>(c2[i]));
    }
  }
  std::int64_t together1 = 0, together2 = 0, together_both = 0;
  for (auto v : rows) together1 += pairs(v);
  for (auto v : cols) together2 += pairs(v);
  std::sort(cells.begin(), cells.end());
  for (std::size_t i = 0; i < cells.size();) {
    std::size_t j = i;
    while (j < cells.size() && cells[j] == cells[i]) ++j;
    together_both += pairs(static_cast<std::int64_t>(j - i));
    i = j;
  }
  const double unary = static_cast<double>(n - 1) *
                       (p.m_ai * static_cast<double>(active_inactive) +
                        p.m_ia * static_cast<double>(inactive_active));
  return unary + p.a * static_cast<double>(together1 - together_both) +
         p.b * static_cast<double>(together2 - together_both);
}

RescaledDistance rescaled_distance(const SubPartition& c1, const SubPartition& c2,
                                   const LossParams& p) {
  require_same_size(c1, c2, "rescaled_distance");
  const std::size_t n = c1.size();
  if (n < 2) throw ConfigError("rescaled_distance needs at least two observations");
  const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return {ia_binder_loss(c1, c2, p) / total_pairs, p.is_metric()};
}

double pairwise_penalty_sum(const SubPartition& c1, const SubPartition& c2,
                            const LossParams& p) {
  require_same_size(c1, c2, "pairwise_penalty_sum");
  p.validate();
  const std::size_t n = c1.size();
  auto activity_penalty = [&](std::size_t x) {
    const bool on1 = c1.is_active(x);
    const bool on2 = c2.is_active(x);
    if (on1 && !on2) return p.m_ai;
    if (!on1 && on2) return p.m_ia;
    return 0.0;
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double phi = activity_penalty(i) + activity_penalty(j);
      if (c1.is_active(i) && c2.is_active(i) && c1.is_active(j) && c2.is_active(j)) {
        const bool same1 = c1[i] == c1[j];
        const bool same2 = c2[i] == c2[j];
        if (same1 && !same2) phi += p.a;
        if (!same1 && same2) phi += p.b;
      }
      total += phi;
    }
  }
  return total;
}

bool precedes(const SubPartition& c1, const SubPartition& c2) {
  require_same_size(c1, c2, "precedes");
  // Each cluster of c1 must map into a single cluster of c2.
  std::vector<Label> image(static_cast<std::size_t>(c1.num_clusters()) + 1, kNoise);
  for (std::size_t i = 0; i < c1.size(); ++i) {
    if (!c1.is_active(i)) continue;
    if (!c2.is_active(i)) return false;
    Label& target = image[static_cast<std::size_t>(c1[i])];
    if (target == kNoise) {
      target = c2[i];
    } else if (target != c2[i]) {
      return false;
    }
  }
  return true;
}

SubPartition meet(const SubPartition& c1, const SubPartition& c2) {
  require_same_size(c1, c2, "meet");
  const auto width = static_cast<std::int64_t>(c2.num_clusters()) + 1;
  std::unordered_map<std::int64_t, Label> ids;
  std::vector<Label> labels(c1.size(), kNoise);
  for (std::size_t i = 0; i < c1.size(); ++i) {
    if (!c1.is_active(i) || !c2.is_active(i)) continue;
    const std::int64_t key = static_cast<std::int64_t>(c1[i]) * width + c2[i];
    auto [it, inserted] = ids.try_emplace(key, static_cast<Label>(ids.size() + 1));
    labels[i] = it->second;
  }
  return SubPartition(std::move(labels));
}

SubPartition join(const SubPartition& c1, const SubPartition& c2) {
  require_same_size(c1, c2, "join");
  const std::size_t n = c1.size();
  DisjointSet sets(n);
  std::vector<std::size_t> first1(static_cast<std::size_t>(c1.num_clusters()) + 1, n);
  std::vector<std::size_t> first2(static_cast<std::size_t>(c2.num_clusters()) + 1, n);
  auto link = [&](std::vector<std::size_t>& first, Label l, std::size_t i) {
    auto& f = first[static_cast<std::size_t>(l)];
    if (f == n) {
      f = i;
    } else {
      sets.unite(f, i);
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (c1.is_active(i)) link(first1, c1[i], i);
    if (c2.is_active(i)) link(first2, c2[i], i);
  }
  std::vector<Label> labels(n, kNoise);
  for (std::size_t i = 0; i < n; ++i) {
    if (c1.is_active(i) || c2.is_active(i)) labels[i] = static_cast<Label>(sets.find(i) + 1);
  }
  return SubPartition(std::move(labels));
}

std::vector<SubPartition> hasse_up(const SubPartition& c) {
  std::vector<SubPartition> out;
  const int k = c.num_clusters();
  std::vector<Label> labels(c.labels().begin(), c.labels().end());
  for (Label h = 1; h <= k; ++h) {
    for (Label g = h + 1; g <= k; ++g) {
      std::vector<Label> merged = labels;
      for (Label& l : merged) {
        if (l == g) l = h;
      }
      out.emplace_back(std::move(merged));
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kNoise) continue;
    std::vector<Label> grown = labels;
    grown[i] = static_cast<Label>(k + 1);
    out.emplace_back(std::move(grown));
  }
  return out;
}

std::vector<SubPartition> hasse_down(const SubPartition& c) {
  std::vector<SubPartition> out;
  const int k = c.num_clusters();
  std::vector<Label> labels(c.labels().begin(), c.labels().end());
  for (const auto& members : c.clusters()) {
    if (members.size() == 1) {
      std::vector<Label> shrunk = labels;
      shrunk[members.front()] = kNoise;
      out.emplace_back(std::move(shrunk));
      continue;
    }
    if (members.size() > 20) throw InfeasibleError("hasse_down: cluster too large to enumerate splits");
    // Bipartitions with the first member pinned to the part that keeps its id.
    const std::uint64_t count = std::uint64_t{1} << (members.size() - 1);
    for (std::uint64_t mask = 1; mask < count; ++mask) {
      std::vector<Label> split = labels;
      for (std::size_t b = 0; b + 1 < members.size(); ++b) {
        if (mask & (std::uint64_t{1} << b)) split[members[b + 1]] = static_cast<Label>(k + 1);
      }
      out.emplace_back(std::move(split));
    }
  }
  return out;
}

void for_each_subpartition(std::size_t n,
                           const std::function<void(const SubPartition&)>& visit) {
  if (n > kMaxEnumerationSize) {
    throw InfeasibleError("enumerate_subpartitions: n = " + std::to_string(n) +
                          " exceeds the limit of " + std::to_string(kMaxEnumerationSize));
  }
  // Restricted growth strings over items 0..n; item 0 is the noise anchor, so
  // the block holding it is the noise set and every other block is a cluster.
  std::vector<Label> rgs(n + 1, 0);
  std::vector<Label> prefix_max(n + 1, 0);
  for (;;) {
    visit(SubPartition(std::vector<Label>(rgs.begin() + 1, rgs.end())));
    std::size_t i = n;
    while (i > 0 && rgs[i] > prefix_max[i - 1]) --i;
    if (i == 0) return;
    ++rgs[i];
    prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
    for (std::size_t j = i + 1; j <= n; ++j) {
      rgs[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
}

std::vector<SubPartition> enumerate_subpartitions(std::size_t n) {
  std::vector<SubPartition> out;
  for_each_subpartition(n, [&](const SubPartition& c) { out.push_back(c); });
  return out;
}

}  // namespace ballet
