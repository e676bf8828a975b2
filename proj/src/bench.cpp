#include "ballet/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "ballet/credible.hpp"
#include "ballet/errors.hpp"
#include "ballet/levels.hpp"
#include "ballet/order_statistics.hpp"
#include "ballet/random.hpp"

namespace ballet {

void SkySurveySpec::validate() const {
  if (n < 1) throw ConfigError("sky survey needs n >= 1");
  if (!(noise_mass > 0.0 && noise_mass <= 1.0)) throw ConfigError("noise mass must lie in (0, 1]");
  if (components < 1 && noise_mass < 1.0) throw ConfigError("no blobs to place the cluster mass");
  if (!(weight_concentration > 0.0) || !(variance_shape > 0.0) || !(variance_scale > 0.0)) {
    throw ConfigError("sky survey prior parameters must be positive");
  }
}

SkySurvey generate_sky_survey(const SkySurveySpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "sky-survey"));
  SkySurvey out;
  const std::vector<double> conc(spec.components, spec.weight_concentration);
  const auto weights =
      spec.components > 0 ? rng.dirichlet(conc) : std::vector<double>{};
  std::vector<double> target_coords;
  for (std::size_t c = 0; c < spec.components; ++c) {
    GaussianBlob b;
    b.x = rng.uniform();
    b.y = rng.uniform();
    b.variance = spec.variance_scale / rng.gamma(spec.variance_shape);
    b.weight = weights[c];
    out.blobs.push_back(b);
    target_coords.push_back(b.x);
    target_coords.push_back(b.y);
  }
  std::vector<double> cumulative(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());

  std::vector<double> coords;
  coords.reserve(2 * spec.n);
  while (out.source.size() < spec.n) {
    double x, y;
    int src = -1;
    if (rng.uniform() < spec.noise_mass) {
      x = rng.uniform();
      y = rng.uniform();
    } else {
      const double u = rng.uniform() * cumulative.back();
      auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
      src = static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                      static_cast<std::ptrdiff_t>(weights.size()) - 1));
      const auto& b = out.blobs[static_cast<std::size_t>(src)];
      const double sd = std::sqrt(b.variance);
      x = rng.normal(b.x, sd);
      y = rng.normal(b.y, sd);
    }
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) continue;
    coords.push_back(x);
    coords.push_back(y);
    out.source.push_back(src);
  }
  out.points = PointSet(2, std::move(coords));
  out.targets = target_coords.empty() ? PointSet() : PointSet(2, std::move(target_coords));
  return out;
}

PointSet generate_two_moons(std::size_t n, double noise_sd, std::uint64_t seed) {
  if (n < 2) throw ConfigError("two moons needs n >= 2");
  Rng rng(derive_seed(seed, "two-moons"));
  std::vector<double> coords;
  coords.reserve(2 * n);
  const std::size_t upper = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::numbers::pi * rng.uniform();
    double x, y;
    if (i < upper) {
      x = std::cos(t);
      y = std::sin(t);
    } else {
      x = 1.0 - std::cos(t);
      y = 0.5 - std::sin(t);
    }
    coords.push_back(x + noise_sd * rng.normal());
    coords.push_back(y + noise_sd * rng.normal());
  }
  return PointSet(2, std::move(coords));
}

PointSet generate_noisy_circles(std::size_t n, double noise_sd, std::uint64_t seed,
                                double inner_radius) {
  if (n < 2) throw ConfigError("noisy circles needs n >= 2");
  if (!(inner_radius > 0.0 && inner_radius < 1.0)) {
    throw ConfigError("inner radius must lie in (0, 1)");
  }
  Rng rng(derive_seed(seed, "noisy-circles"));
  std::vector<double> coords;
  coords.reserve(2 * n);
  const std::size_t outer = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * rng.uniform();
    const double r = i < outer ? 1.0 : inner_radius;
    coords.push_back(r * std::cos(t) + noise_sd * rng.normal());
    coords.push_back(r * std::sin(t) + noise_sd * rng.normal());
  }
  return PointSet(2, std::move(coords));
}

// ---------------------------------------------------------------------------

bool Ellipse::contains(double x, double y) const {
  const double dx = x - cx;
  const double dy = y - cy;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double u = (c * dx + s * dy) / major;
  const double v = (-s * dx + c * dy) / minor;
  return u * u + v * v <= 1.0;
}

Ellipse enclosing_ellipse(const PointSet& points, const std::vector<std::size_t>& members) {
  if (points.dim() != 2) throw ConfigError("ellipses are defined for 2-D data only");
  if (members.empty()) throw ConfigError("ellipse of an empty cluster");
  Ellipse e;
  const double m = static_cast<double>(members.size());
  for (std::size_t i : members) {
    e.cx += points[i][0];
    e.cy += points[i][1];
  }
  e.cx /= m;
  e.cy /= m;
  e.major = e.minor = kMinSemiAxis;
  if (members.size() < 2) return e;

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i : members) {
    const double dx = points[i][0] - e.cx;
    const double dy = points[i][1] - e.cy;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  sxx /= m - 1.0;
  syy /= m - 1.0;
  sxy /= m - 1.0;
  const double half_trace = 0.5 * (sxx + syy);
  const double spread = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
  const double big = std::max(half_trace + spread, 0.0);
  const double small = std::max(half_trace - spread, 0.0);
  e.angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  e.major = std::max(std::sqrt(big * kEllipseChi2), kMinSemiAxis);
  e.minor = std::max(std::sqrt(small * kEllipseChi2), kMinSemiAxis);
  return e;
}

EvalReport evaluate(const SubPartition& clustering, const PointSet& points,
                    const PointSet& targets) {
  if (clustering.size() != points.size()) {
    throw AlignmentError("clustering does not match the point set");
  }
  if (points.dim() != 2 || (targets.size() > 0 && targets.dim() != 2)) {
    throw ConfigError("evaluation is defined for 2-D data only");
  }
  EvalReport report;
  report.target_hit.assign(targets.size(), 0);
  for (const auto& members : clustering.clusters()) {
    report.ellipses.push_back(enclosing_ellipse(points, members));
  }
  std::size_t with_target = 0, with_one = 0;
  for (const auto& e : report.ellipses) {
    std::size_t inside = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (e.contains(targets[t][0], targets[t][1])) {
        ++inside;
        report.target_hit[t] = 1;
      }
    }
    report.targets_inside.push_back(inside);
    with_target += inside >= 1 ? 1 : 0;
    with_one += inside == 1 ? 1 : 0;
  }
  if (report.ellipses.empty()) return report;
  const double k = static_cast<double>(report.ellipses.size());
  report.specificity = static_cast<double>(with_target) / k;
  report.exact_match = static_cast<double>(with_one) / k;
  if (targets.size() > 0) {
    const auto hits = std::count(report.target_hit.begin(), report.target_hit.end(), 1);
    report.sensitivity = static_cast<double>(hits) / static_cast<double>(targets.size());
  }
  return report;
}

// ---------------------------------------------------------------------------

double dbscan_eps_for_noise_fraction(const PointSet& points, std::size_t min_pts, double nu) {
  if (min_pts < 2) throw ConfigError("the Eps map needs MinPts >= 2");
  if (!(nu >= 0.0 && nu < 1.0)) throw ConfigError("noise fraction must lie in [0, 1)");
  // The min_pts-th nearest data point counting the point itself.
  const auto knn = knn_distance(points, min_pts - 1);
  return empirical_quantile(knn, 1.0 - nu);
}

const MethodScore& StudyTable::score(const std::string& method) const {
  for (const auto& s : mean) {
    if (s.method == method) return s;
  }
  throw ConfigError("no such method in the study table: " + method);
}

std::string StudyTable::to_csv() const {
  std::ostringstream out;
  out.precision(6);
  out << "metric";
  for (const auto& m : methods) out << ',' << m;
  out << '\n';
  auto row = [&](const char* name, double MethodScore::*field) {
    out << name;
    for (const auto& s : mean) out << ',' << s.*field;
    out << '\n';
  };
  row("sensitivity", &MethodScore::sensitivity);
  row("specificity", &MethodScore::specificity);
  row("exact_match", &MethodScore::exact_match);
  return out.str();
}

std::string StudyTable::replicates_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "replicate,seed,lambda,delta,eps,min_pts,risk,radius,method,sensitivity,specificity,"
         "exact_match\n";
  for (const auto& r : replicates) {
    for (const auto& s : r.scores) {
      out << r.replicate << ',' << r.seed << ',' << r.lambda << ',' << r.delta << ','
          << r.eps << ',' << r.min_pts << ',' << r.risk << ',' << r.radius << ',' << s.method
          << ',' << s.sensitivity << ',' << s.specificity << ',' << s.exact_match << '\n';
    }
  }
  return out.str();
}

std::string StudyTable::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["methods"] = methods;
  auto score_json = [](const MethodScore& s) {
    return nlohmann::json{{"method", s.method},
                          {"sensitivity", s.sensitivity},
                          {"specificity", s.specificity},
                          {"exact_match", s.exact_match}};
  };
  j["mean"] = nlohmann::json::array();
  for (const auto& s : mean) j["mean"].push_back(score_json(s));
  j["replicates"] = nlohmann::json::array();
  for (const auto& r : replicates) {
    nlohmann::json rec = {{"replicate", r.replicate}, {"seed", r.seed},   {"lambda", r.lambda},
                          {"delta", r.delta},         {"eps", r.eps},     {"min_pts", r.min_pts},
                          {"risk", r.risk},           {"radius", r.radius}};
    rec["scores"] = nlohmann::json::array();
    for (const auto& s : r.scores) rec["scores"].push_back(score_json(s));
    j["replicates"].push_back(std::move(rec));
  }
  return j.dump(2);
}

namespace {

MethodScore score_of(const std::string& method, const SubPartition& c, const SkySurvey& data) {
  const auto r = evaluate(c, data.points, data.targets);
  return {method, r.sensitivity, r.specificity, r.exact_match};
}

}  // namespace

StudyTable run_simulation_study(std::size_t reps, const SkySurveySpec& spec,
                                const BalletStudyConfig& ballet,
                                const DbscanStudyConfig& dbscan, std::uint64_t seed) {
  if (reps < 1) throw ConfigError("the study needs at least one replicate");
  spec.validate();
  StudyTable table;
  table.methods = {kMethodDbscan};
  if (dbscan.tuned_min_pts) table.methods.push_back(kMethodDbscanTuned);
  for (const auto& m : {kMethodLower, kMethodEstimate, kMethodUpper, kMethodPlugin}) {
    table.methods.push_back(m);
  }

  for (std::size_t r = 0; r < reps; ++r) {
    ReplicateRecord rec;
    rec.replicate = r;
    rec.seed = derive_seed(seed, static_cast<std::uint64_t>(r));

    SkySurveySpec rep_spec = spec;
    rep_spec.seed = derive_seed(rec.seed, "data");
    const SkySurvey data = generate_sky_survey(rep_spec);
    const PointSet& pts = data.points;
    const std::size_t n = pts.size();

    HistogramMixtureConfig model = ballet.model;
    if (!model.domain) model.domain = Domain::unit_cube(2);
    const auto ensemble = build_ensemble(pts, model, ballet.draws, derive_seed(rec.seed, "ensemble"));
    const auto mean = ensemble.mean();
    rec.lambda = noise_fraction_level(mean, ballet.nu);
    const auto active = active_indices(mean, rec.lambda);
    rec.delta = adaptive_delta(pts, active, ballet.delta);

    const NeighborhoodGraph graph(pts, rec.delta);
    const auto draws = draw_clusterings(graph, ensemble, rec.lambda);
    const CoClusteringStats stats(draws);
    SearchConfig search_cfg = ballet.search;
    search_cfg.seed = derive_seed(rec.seed, "search");
    const auto est = search(stats, ballet.loss, search_cfg, draws);
    rec.risk = est.risk;
    const auto ball = credible_ball(est.estimate, draws, graph, stats, ballet.loss, ballet.alpha);
    rec.radius = ball.radius;
    const SubPartition plugin = graph.cluster(mean, rec.lambda);

    rec.min_pts = dbscan.min_pts ? *dbscan.min_pts : default_min_pts(n);
    rec.eps = dbscan_eps_for_noise_fraction(pts, rec.min_pts, ballet.nu);
    rec.scores.push_back(score_of(kMethodDbscan, dbscan_classic(pts, rec.eps, rec.min_pts), data));
    if (dbscan.tuned_min_pts) {
      const double eps = dbscan_eps_for_noise_fraction(pts, *dbscan.tuned_min_pts, ballet.nu);
      rec.scores.push_back(
          score_of(kMethodDbscanTuned, dbscan_classic(pts, eps, *dbscan.tuned_min_pts), data));
    }
    rec.scores.push_back(score_of(kMethodLower, ball.lower.partition, data));
    rec.scores.push_back(score_of(kMethodEstimate, est.estimate, data));
    rec.scores.push_back(score_of(kMethodUpper, ball.upper.partition, data));
    rec.scores.push_back(score_of(kMethodPlugin, plugin, data));
    table.replicates.push_back(std::move(rec));
  }

  for (const auto& m : table.methods) {
    MethodScore avg{m};
    for (const auto& rec : table.replicates) {
      for (const auto& s : rec.scores) {
        if (s.method != m) continue;
        avg.sensitivity += s.sensitivity;
        avg.specificity += s.specificity;
        avg.exact_match += s.exact_match;
      }
    }
    const double k = static_cast<double>(table.replicates.size());
    avg.sensitivity /= k;
    avg.specificity /= k;
    avg.exact_match /= k;
    table.mean.push_back(avg);
  }
  return table;
}

}  // namespace ballet
