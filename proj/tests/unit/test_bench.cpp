#include <cmath>

#include "doctest.h"

#include "ballet/bench.hpp"
#include "ballet/errors.hpp"
#include "ballet/io.hpp"

using namespace ballet;

namespace {
SubPartition sp(std::vector<Label> labels) { return SubPartition(std::move(labels)); }
}  // namespace

TEST_CASE("sky survey generator") {
  SkySurveySpec spec;
  spec.n = 500;
  spec.seed = 3;
  const auto a = generate_sky_survey(spec);
  CHECK(a.points.size() == 500);
  CHECK(a.targets.size() == 10);
  CHECK(a.blobs.size() == 10);
  for (std::size_t i = 0; i < 500; ++i) {
    CHECK(a.points[i][0] >= 0.0);
    CHECK(a.points[i][0] <= 1.0);
    CHECK(a.points[i][1] >= 0.0);
    CHECK(a.points[i][1] <= 1.0);
  }
  double w = 0.0;
  for (const auto& b : a.blobs) w += b.weight;
  CHECK(w == doctest::Approx(1.0));  // relative weights of the blobs
  const auto b = generate_sky_survey(spec);
  CHECK(io::points_to_csv(a.points) == io::points_to_csv(b.points));

  spec.noise_mass = 1.0;
  const auto flat = generate_sky_survey(spec);
  CHECK(flat.targets.size() == 10);
  for (int s : flat.source) CHECK(s == -1);
}

TEST_CASE("moons and circles") {
  const auto m = generate_two_moons(301, 0.05, 1);
  CHECK(m.size() == 301);
  CHECK(io::points_to_csv(m) == io::points_to_csv(generate_two_moons(301, 0.05, 1)));
  CHECK(io::points_to_csv(m) != io::points_to_csv(generate_two_moons(301, 0.05, 2)));
  const auto c = generate_noisy_circles(200, 0.0, 4);
  for (std::size_t i = 0; i < 200; ++i) {
    const double r = std::hypot(c[i][0], c[i][1]);
    CHECK((std::abs(r - 1.0) < 1e-12 || std::abs(r - 0.5) < 1e-12));
  }
}

TEST_CASE("enclosing ellipses") {
  const PointSet ps(2, {0.3, 0.4});
  const auto single = enclosing_ellipse(ps, {0});
  CHECK(single.major == kMinSemiAxis);
  CHECK(single.minor == kMinSemiAxis);
  CHECK(single.contains(0.3, 0.4));
  // collinear points: padded minor axis
  const PointSet line(2, {0.0, 0.0, 0.1, 0.0, 0.2, 0.0});
  const auto e = enclosing_ellipse(line, {0, 1, 2});
  CHECK(e.minor == kMinSemiAxis);
  // sample variance 0.01 along x, 95% radius
  CHECK(e.major == doctest::Approx(std::sqrt(0.01 * kEllipseChi2)));
  CHECK(e.contains(0.33, 0.0));
  CHECK_FALSE(e.contains(0.35, 0.0));
  CHECK_FALSE(e.contains(0.1, 0.01));
}

TEST_CASE("catalogue scores") {
  // two tight clusters; both targets sit in the first
  const PointSet ps(2, {0.10, 0.10, 0.11, 0.10, 0.10, 0.11, 0.80, 0.80, 0.81, 0.80, 0.80, 0.81});
  const PointSet targets(2, {0.103, 0.103, 0.105, 0.104});
  const auto r = evaluate(sp({1, 1, 1, 2, 2, 2}), ps, targets);
  CHECK(r.sensitivity == 1.0);
  CHECK(r.specificity == 0.5);
  CHECK(r.exact_match == 0.0);
  CHECK(r.targets_inside == std::vector<std::size_t>{2, 0});

  const auto none = evaluate(SubPartition::all_noise(6), ps, targets);
  CHECK(none.sensitivity == 0.0);
  CHECK(none.specificity == 0.0);
  CHECK(none.exact_match == 0.0);

  const PointSet own(2, {0.2, 0.2, 0.7, 0.7});
  const auto each = evaluate(sp({1, 2}), own, own);
  CHECK(each.sensitivity == 1.0);
  CHECK(each.specificity == 1.0);
  CHECK(each.exact_match == 1.0);
}

TEST_CASE("DBSCAN noise-fraction map") {
  const PointSet ps(1, {0, 1, 3, 7});
  // distances to the second nearest point counting the point itself: 1, 1, 2, 4
  CHECK(dbscan_eps_for_noise_fraction(ps, 2, 0.1) == 4.0);
  CHECK(dbscan_eps_for_noise_fraction(ps, 2, 0.25) == 2.0);
  CHECK(dbscan_eps_for_noise_fraction(ps, 2, 0.5) == 1.0);
}

TEST_CASE("a small study is deterministic and bounded") {
  SkySurveySpec spec;
  spec.n = 600;
  spec.components = 4;
  BalletStudyConfig ballet;
  ballet.draws = 20;
  ballet.model.components = 10;
  ballet.model.bins_per_axis = 15;
  ballet.search.n_restarts = 2;
  DbscanStudyConfig dbscan;
  dbscan.tuned_min_pts = 10;
  const auto a = run_simulation_study(1, spec, ballet, dbscan, 17);
  const auto b = run_simulation_study(1, spec, ballet, dbscan, 17);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.replicates_csv() == b.replicates_csv());
  CHECK(a.methods.size() == 6);
  for (const auto& s : a.mean) {
    CHECK(s.sensitivity >= 0.0);
    CHECK(s.sensitivity <= 1.0);
    CHECK(s.specificity <= 1.0);
    CHECK(s.exact_match <= s.specificity);
  }
  CHECK(a.to_csv().rfind("metric,", 0) == 0);
  CHECK_THROWS_AS(a.score("nope"), ConfigError);
}
