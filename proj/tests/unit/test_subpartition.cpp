#include <set>

#include "doctest.h"

#include "ballet/errors.hpp"
#include "ballet/subpartition.hpp"
#include "oracles.hpp"

using namespace ballet;

namespace {
SubPartition sp(std::vector<Label> labels) { return SubPartition(std::move(labels)); }
}  // namespace

TEST_CASE("labels are canonicalized by first appearance") {
  const auto c = sp({0, 7, 3, 7, 0, 3});
  CHECK(std::vector<Label>(c.labels().begin(), c.labels().end()) ==
        std::vector<Label>{0, 1, 2, 1, 0, 2});
  CHECK(c.num_clusters() == 2);
  CHECK(c.num_active() == 4);
  CHECK(c.cluster_sizes() == std::vector<std::size_t>{2, 2});
  CHECK(sp({5, 5}) == sp({1, 1}));
  CHECK_THROWS_AS(sp({0, -2}), ConfigError);
}

TEST_CASE("loss of identical sub-partitions is zero") {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto c = oracle::random_subpartition(9, 4, rng);
    CHECK(ia_binder_loss(c, c) == 0.0);
    CHECK(rescaled_distance(c, c).value == 0.0);
  }
}

TEST_CASE("loss hand examples") {
  // one disagreeing active pair
  const auto c1 = sp({1, 1, 0});
  const auto c2 = sp({1, 2, 0});
  CHECK(ia_binder_loss(c1, c2) == 1.0);
  CHECK(rescaled_distance(c1, c2).value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(pairwise_penalty_sum(c1, c2) == 1.0);
  // activity mismatch on the second point: (n - 1) m
  CHECK(ia_binder_loss(sp({1, 1}), sp({1, 0})) == 0.5);
  CHECK(pairwise_penalty_sum(sp({1, 1}), sp({1, 0})) == 0.5);
}

TEST_CASE("loss matches the set-form oracle and the pair sum") {
  Rng rng(2);
  const LossParams skew{0.7, 1.3, 0.4, 0.9};
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.uniform_index(12);
    const auto a = oracle::random_subpartition(n, 1 + rng.uniform_index(5), rng);
    const auto b = oracle::random_subpartition(n, 1 + rng.uniform_index(5), rng);
    CHECK(ia_binder_loss(a, b) == oracle::loss(a, b));
    CHECK(pairwise_penalty_sum(a, b) == ia_binder_loss(a, b));
    CHECK(ia_binder_loss(a, b, skew) == doctest::Approx(oracle::loss(a, b, skew)).epsilon(1e-12));
  }
}

TEST_CASE("loss is invariant under relabeling and consistent reordering") {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.uniform_index(10);
    const auto a = oracle::random_subpartition(n, 4, rng);
    const auto b = oracle::random_subpartition(n, 4, rng);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<Label> pa(n), pb(n), relabel(n);
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = a[perm[i]];
      pb[i] = b[perm[i]];
      relabel[i] = a[i] ? 10 - a[i] : 0;
    }
    CHECK(ia_binder_loss(sp(pa), sp(pb)) == ia_binder_loss(a, b));
    CHECK(ia_binder_loss(sp(relabel), b) == ia_binder_loss(a, b));
  }
}

TEST_CASE("rescaled distance flags parameters outside the metric regime") {
  CHECK(rescaled_distance(sp({1, 0}), sp({0, 1})).metric);
  CHECK_FALSE(rescaled_distance(sp({1, 0}), sp({0, 1}), {1.0, 1.0, 0.2, 0.2}).metric);
  CHECK(LossParams{}.is_metric());
  CHECK_FALSE(LossParams{1.0, 2.0, 0.5, 0.5}.is_metric());
}

TEST_CASE("meet and join on three points") {
  const auto c1 = sp({1, 1, 0});
  const auto c2 = sp({0, 1, 1});
  CHECK(meet(c1, c2) == sp({0, 1, 0}));
  CHECK(join(c1, c2) == sp({1, 1, 1}));
  CHECK(meet(c1, c1) == c1);
  CHECK(join(c2, c2) == c2);
  CHECK(meet(c1, SubPartition::all_noise(3)) == SubPartition::all_noise(3));
}

TEST_CASE("meet and join bound their arguments on every pair up to n = 4") {
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto all = enumerate_subpartitions(n);
    for (const auto& a : all) {
      for (const auto& b : all) {
        const auto lo = meet(a, b);
        const auto hi = join(a, b);
        CHECK(precedes(lo, a));
        CHECK(precedes(lo, b));
        CHECK(precedes(a, hi));
        CHECK(precedes(b, hi));
        // greatest / least among all bounds
        for (const auto& c : all) {
          if (precedes(c, a) && precedes(c, b)) CHECK(precedes(c, lo));
          if (precedes(a, c) && precedes(b, c)) CHECK(precedes(hi, c));
        }
      }
    }
  }
}

TEST_CASE("enumeration counts follow Bell(n + 1)") {
  const std::vector<std::size_t> bell = {1, 2, 5, 15, 52, 203, 877, 4140};
  for (std::size_t n = 1; n <= 7; ++n) {
    const auto all = enumerate_subpartitions(n);
    CHECK(all.size() == bell[n]);
    std::set<std::vector<Label>> distinct;
    for (const auto& c : all) distinct.insert({c.labels().begin(), c.labels().end()});
    CHECK(distinct.size() == all.size());
  }
  CHECK_THROWS_AS(enumerate_subpartitions(kMaxEnumerationSize + 1), InfeasibleError);
}

TEST_CASE("Hasse covers on n = 3 reproduce the lattice") {
  const auto all = enumerate_subpartitions(3);
  std::size_t edges_up = 0, edges_down = 0;
  for (const auto& c : all) {
    for (const auto& u : hasse_up(c)) {
      CHECK(precedes(c, u));
      CHECK_FALSE(u == c);
    }
    for (const auto& d : hasse_down(c)) CHECK(precedes(d, c));
    edges_up += hasse_up(c).size();
    edges_down += hasse_down(c).size();
  }
  CHECK(edges_up == edges_down);
  CHECK(all.size() == 15);
}
