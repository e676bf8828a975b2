#pragma once

// Naive reference implementations used as test oracles. Each follows the
// textbook definition directly and shares no code with the library beyond
// the data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "ballet/levelset.hpp"
#include "ballet/random.hpp"
#include "ballet/subpartition.hpp"

namespace oracle {

using ballet::Label;
using ballet::LossParams;
using ballet::PointSet;
using ballet::SubPartition;

// Loss from its set form: Binder terms over pairs active in both arguments
// plus (n - 1) m per point whose activity differs.
inline double loss(const SubPartition& c1, const SubPartition& c2, const LossParams& p = {}) {
  const std::size_t n = c1.size();
  double binder = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool act = c1[i] && c1[j] && c2[i] && c2[j];
      if (!act) continue;
      const bool t1 = c1[i] == c1[j];
      const bool t2 = c2[i] == c2[j];
      if (t1 && !t2) binder += p.a;
      if (!t1 && t2) binder += p.b;
    }
  }
  double only1 = 0.0, only2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (c1[i] && !c2[i]) only1 += 1.0;
    if (!c1[i] && c2[i]) only2 += 1.0;
  }
  const double w = static_cast<double>(n) - 1.0;
  return binder + w * p.m_ai * only1 + w * p.m_ia * only2;
}

inline double mean_loss(const std::vector<SubPartition>& draws, const SubPartition& c,
                        const LossParams& p = {}) {
  double total = 0.0;
  for (const auto& d : draws) total += loss(d, c, p);
  return total / static_cast<double>(draws.size());
}

inline double dist(const PointSet& ps, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t a = 0; a < ps.dim(); ++a) {
    const double d = ps[i][a] - ps[j][a];
    s += d * d;
  }
  return std::sqrt(s);
}

// Distance to the k-th nearest other point.
inline std::vector<double> knn(const PointSet& ps, std::size_t k) {
  std::vector<double> out(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < ps.size(); ++j) {
      if (j != i) d.push_back(dist(ps, i, j));
    }
    std::sort(d.begin(), d.end());
    out[i] = d[k - 1];
  }
  return out;
}

// m-th smallest (1-based) by full sort.
inline double nth_smallest(std::vector<double> v, std::size_t m) {
  std::sort(v.begin(), v.end());
  return v[m - 1];
}

// Components of the active points by Warshall's transitive closure of the
// adjacency relation: O(n^3).
template <class Adjacent>
SubPartition closure_components(std::size_t n, const std::vector<bool>& active, Adjacent adj) {
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    r[i][i] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && active[j] && adj(i, j)) r[i][j] = 1;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!r[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (r[k][j]) r[i][j] = 1;
      }
    }
  }
  std::vector<Label> labels(n, 0);
  Label next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i] || labels[i]) continue;
    ++next;
    for (std::size_t j = 0; j < n; ++j) {
      if (r[i][j]) labels[j] = next;
    }
  }
  return SubPartition(labels);
}

// Strict δ-graph components over points with density >= lambda.
inline SubPartition surrogate(const PointSet& ps, const std::vector<double>& density,
                              double lambda, double delta, bool closed = false) {
  std::vector<bool> active(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) active[i] = density[i] >= lambda;
  return closure_components(ps.size(), active, [&](std::size_t i, std::size_t j) {
    const double d = dist(ps, i, j);
    return closed ? d <= delta : d < delta;
  });
}

// DBSCAN* from the definition: core points have at least min_pts points
// (themselves included) within eps; clusters are closure components.
inline SubPartition dbscan_star(const PointSet& ps, double eps, std::size_t min_pts) {
  std::vector<bool> core(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < ps.size(); ++j) count += dist(ps, i, j) <= eps;
    core[i] = count >= min_pts;
  }
  return closure_components(ps.size(), core,
                            [&](std::size_t i, std::size_t j) { return dist(ps, i, j) <= eps; });
}

inline SubPartition random_subpartition(std::size_t n, std::size_t max_label, ballet::Rng& rng) {
  std::vector<Label> labels(n);
  for (auto& l : labels) l = static_cast<Label>(rng.uniform_index(max_label + 1));
  return SubPartition(labels);
}

inline PointSet random_points(std::size_t n, std::size_t d, ballet::Rng& rng) {
  std::vector<double> coords(n * d);
  for (auto& x : coords) x = rng.uniform();
  return PointSet(d, coords);
}

// Minimum of the averaged loss over every sub-partition of n items.
inline double brute_force_min_risk(const std::vector<SubPartition>& draws,
                                   const LossParams& p = {}) {
  double best = INFINITY;
  ballet::for_each_subpartition(draws.front().size(), [&](const SubPartition& c) {
    best = std::min(best, mean_loss(draws, c, p));
  });
  return best;
}

}  // namespace oracle
