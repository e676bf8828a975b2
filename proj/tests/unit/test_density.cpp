#include <cmath>
#include <memory>

#include "doctest.h"

#include "ballet/density.hpp"
#include "ballet/errors.hpp"
#include "ballet/levelset.hpp"
#include "oracles.hpp"

using namespace ballet;

namespace {

// Two components on the unit square with hand-placed cuts.
HistogramBins hand_bins() {
  return HistogramBins(Domain::unit_cube(2), 2, 2,
                       {{0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}, {0.0, 0.25, 1.0}, {0.0, 0.75, 1.0}});
}

}  // namespace

TEST_CASE("bin lookup closes the first bin only") {
  const auto bins = hand_bins();
  const std::vector<double> origin = {0.0, 0.0}, on_cut = {0.5, 0.5}, above = {0.5000001, 0.2},
                            corner = {1.0, 1.0};
  CHECK(bins.bin_of(0, origin) == 0);
  CHECK(bins.bin_of(0, on_cut) == 0);
  CHECK(bins.bin_of(0, above) == 1);
  CHECK(bins.bin_of(0, corner) == 3);
  CHECK(bins.bin_area(1, 1) == 0.5625);
}

TEST_CASE("posterior Dirichlet parameters on a hand fixture") {
  const auto bins = hand_bins();
  const PointSet data(2, {0.1, 0.1, 0.6, 0.2, 0.3, 0.8, 0.9, 0.9});
  const auto params = posterior_parameters(data, bins, 1.0);
  // N_km / K + A_km / A
  CHECK(params[0] == std::vector<double>{0.75, 0.75, 0.75, 0.75});
  CHECK(params[1] == std::vector<double>{0.6875, 1.0625, 0.0625, 1.1875});
}

TEST_CASE("points outside the domain are listed") {
  const auto bins = hand_bins();
  const PointSet data(2, {0.1, 0.1, 1.5, 0.2, 0.3, -0.1});
  try {
    posterior_parameters(data, bins, 1.0);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("2 observation(s)") != std::string::npos);
    CHECK(std::string(e.what()).find(" 1 2") != std::string::npos);
  }
}

TEST_CASE("a single bin gives the uniform density") {
  HistogramMixtureConfig cfg;
  cfg.components = 1;
  cfg.bins_per_axis = 1;
  const Domain domain{{0.0, 0.0}, {2.0, 1.0}};
  cfg.domain = domain;
  Rng rng(41);
  const auto bins = std::make_shared<const HistogramBins>(sample_bins(cfg, domain, rng));
  const auto cuts = bins->cuts(0, 0);
  CHECK(cuts[0] == 0.0);
  CHECK(cuts[1] == 2.0);
  const PointSet data(2, {0.5, 0.5, 1.9, 0.1});
  const auto f = posterior_draw(data, bins, 1.0, rng);
  const std::vector<double> x = {1.3, 0.7};
  CHECK(f(x) == 0.5);
  const auto ens = build_ensemble(data, cfg, 3, 7);
  for (double v : ens.values()) CHECK(v == 0.5);
}

TEST_CASE("sampled cuts are increasing and span the domain") {
  HistogramMixtureConfig cfg;
  cfg.components = 20;
  cfg.bins_per_axis = 7;
  const Domain domain{{-1.0, 2.0}, {3.0, 2.5}};
  Rng rng(42);
  const auto bins = sample_bins(cfg, domain, rng);
  for (std::size_t k = 0; k < 20; ++k) {
    for (std::size_t a = 0; a < 2; ++a) {
      const auto c = bins.cuts(k, a);
      CHECK(c.front() == domain.lo[a]);
      CHECK(c.back() == domain.hi[a]);
      for (std::size_t j = 1; j < c.size(); ++j) CHECK(c[j] > c[j - 1]);
    }
  }
}

TEST_CASE("concentrated cut fractions approach equal widths") {
  HistogramMixtureConfig cfg;
  cfg.components = 200;
  cfg.bins_per_axis = 5;
  cfg.bin_concentration = 1e4;
  Rng rng(43);
  const auto bins = sample_bins(cfg, Domain::unit_cube(1), rng);
  for (std::size_t j = 0; j < 5; ++j) {
    double mean = 0.0;
    for (std::size_t k = 0; k < 200; ++k) {
      const auto c = bins.cuts(k, 0);
      mean += c[j + 1] - c[j];
    }
    mean /= 200.0;
    CHECK(std::abs(mean - 0.2) < 0.02 * 0.2);
  }
}

TEST_CASE("every posterior draw is a proper density") {
  Rng rng(44);
  const auto data = oracle::random_points(300, 2, rng);
  HistogramMixtureConfig cfg;
  cfg.components = 10;
  cfg.bins_per_axis = 8;
  const auto bins =
      std::make_shared<const HistogramBins>(sample_bins(cfg, Domain::unit_cube(2), rng));
  for (int s = 0; s < 20; ++s) {
    const auto f = posterior_draw(data, bins, 1.0, rng);
    CHECK(std::abs(f.total_mass() - 1.0) <= 1e-12);
    for (std::size_t k = 0; k < 10; ++k) {
      for (double p : f.masses(k)) CHECK(p >= 0.0);
    }
  }
}

TEST_CASE("ensembles are reproducible and follow the data") {
  Rng rng(45);
  std::vector<double> coords;
  for (int i = 0; i < 400; ++i) {
    coords.push_back(0.2 + 0.05 * rng.uniform());
    coords.push_back(0.2 + 0.05 * rng.uniform());
  }
  coords.push_back(0.9);
  coords.push_back(0.9);
  const PointSet data(2, coords);
  HistogramMixtureConfig cfg;
  cfg.components = 10;
  cfg.bins_per_axis = 10;
  cfg.domain = Domain::unit_cube(2);
  const auto a = build_ensemble(data, cfg, 5, 9);
  const auto b = build_ensemble(data, cfg, 5, 9);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  const auto one = build_ensemble(data, cfg, 1, 9);
  CHECK(std::equal(one.row(0).begin(), one.row(0).end(), a.row(0).begin()));
  const auto mean = a.mean();
  CHECK(mean[0] > 10.0 * mean[400]);
}

TEST_CASE("uniform-kernel KDE") {
  const PointSet one(1, {0.3});
  const std::vector<double> x = {0.3};
  CHECK(kde_uniform(one, 0.25)(x) == 2.0);  // 1 / (2 δ)
  // quadrature of a 1-D KDE
  Rng rng(46);
  const auto ps = oracle::random_points(40, 1, rng);
  const auto f = kde_uniform(ps, 0.1);
  const double h = 1e-4;
  double integral = 0.0;
  for (double t = -0.5 + h / 2; t < 1.5; t += h) {
    const std::vector<double> at = {t};
    integral += f(at) * h;
  }
  CHECK(std::abs(integral - 1.0) < 1e-3);
}

TEST_CASE("k-NN density") {
  const PointSet ps(1, {0.0, 2.0, 5.0, 9.0});
  const std::vector<double> x = {2.5};
  CHECK(knn_density(ps, 1)(x) == 0.25);  // 1 / (4 * 2 * 0.5)
  // homogeneity: doubling the coordinates divides the density by 2^d
  Rng rng(47);
  const auto p2 = oracle::random_points(100, 2, rng);
  std::vector<double> doubled(p2.coords().begin(), p2.coords().end());
  for (auto& v : doubled) v *= 2.0;
  const auto f = knn_density(p2, 4).at_points();
  const auto g = knn_density(PointSet(2, doubled), 4).at_points();
  for (std::size_t i = 0; i < 100; ++i) CHECK(g[i] == doctest::Approx(f[i] / 4.0));
  CHECK(std::isinf(knn_density(p2, 1).at_points()[0]));
}

TEST_CASE("DBSCAN* as a level-set clustering of the uniform kernel and k-NN densities") {
  Rng rng(48);
  for (int t = 0; t < 10; ++t) {
    const auto ps = oracle::random_points(200, 2, rng);
    const double eps = rng.uniform(0.03, 0.12);
    const std::size_t mp = 1 + rng.uniform_index(8);
    const auto star = dbscan_star(ps, eps, mp);
    const auto kde = kde_uniform(ps, eps).at_points();
    const double level = uniform_kernel_level(mp, ps.size(), 2, eps);
    CHECK(surrogate_cluster(ps, kde, level, eps, EdgeRule::kClosed) == star);
    const auto knn = knn_density(ps, mp);
    CHECK(surrogate_cluster(ps, knn.at_points(), knn.level_at_radius(eps), eps,
                            EdgeRule::kClosed) == star);
  }
}
