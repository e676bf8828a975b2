// Command-line front end: one binary, one subcommand per pipeline stage.
// Results go to <out>/<command>.json (plus CSV/DOT where useful); run
// metadata goes to <out>/provenance.json so result files stay reproducible.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <new>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ballet/bench.hpp"
#include "ballet/credible.hpp"
#include "ballet/density.hpp"
#include "ballet/errors.hpp"
#include "ballet/io.hpp"
#include "ballet/levels.hpp"
#include "ballet/levelset.hpp"
#include "ballet/random.hpp"
#include "ballet/risk.hpp"

#ifndef BALLET_VERSION
#define BALLET_VERSION "unknown"
#endif

namespace {

using json = nlohmann::json;
using namespace ballet;
namespace fs = std::filesystem;

constexpr int kSchemaVersion = 1;

struct Settings {
  std::string points;
  bool header = false;
  std::string ensemble;
  std::string partition;
  std::string targets;
  std::string out = ".";
  std::uint64_t seed = 0;

  double lambda = 0.0;
  double nu = 0.1;
  double c = 0.0;
  bool elbow = false;

  double delta = 0.0;
  std::size_t k = 0;
  double gamma = 0.01;
  double alpha = 0.05;

  double loss_a = 1.0;
  double loss_b = 1.0;
  double loss_m = 0.5;

  int restarts = 16;
  int sweeten_passes = 50;
  int zealous = 10;
  unsigned threads = 0;

  std::size_t draws = 100;
  std::size_t components = 50;
  std::size_t bins = 50;
  double bin_concentration = 5.0;
  double mass_concentration = 1.0;
  std::string domain = "bbox";
  std::string format = "binary";

  std::size_t min_pts = 0;
  double eps = 0.0;
  bool star = false;
  bool exclude_self = false;

  std::vector<double> levels;
  std::vector<double> c_levels;
  std::string estimator = "plugin";
  bool strict = false;

  std::string dataset = "sky";
  std::size_t n = 4000;
  std::size_t sky_components = 10;
  double noise_mass = 0.9;
  double weight_concentration = 0.5;
  double variance_shape = 5.0;
  double variance_scale = 0.0005;
  double noise_sd = 0.1;
  std::size_t reps = 10;
  std::size_t tuned_min_pts = 0;

  std::set<std::string> given;
  json effective = json::object();

  bool has(const std::string& key) const { return given.count(key) > 0; }
};

// Each option is known by its long name (without dashes); the same name is
// the key in the JSON config file.
struct Binding {
  std::string name;
  CLI::Option* option;
  std::function<void(const json&)> from_json;
  std::function<json()> to_json;
};

class Registry {
 public:
  explicit Registry(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* option(const std::string& name, T& var, const std::string& help) {
    auto* opt = app_->add_option("--" + name, var, help);
    bindings_.push_back({name, opt, [&var](const json& j) { var = j.get<T>(); },
                         [&var] { return json(var); }});
    return opt;
  }

  void flag(const std::string& name, bool& var, const std::string& help) {
    auto* opt = app_->add_flag("--" + name, var, help);
    bindings_.push_back({name, opt, [&var](const json& j) { var = j.get<bool>(); },
                         [&var] { return json(var); }});
  }

  // Options given on the command line win; the config file fills the rest.
  // For mutually exclusive groups, a choice on the command line discards
  // every config-file member of the group.
  void merge(Settings& s, const json& config,
             const std::vector<std::vector<std::string>>& groups) const {
    std::set<std::string> known;
    for (const auto& b : bindings_) known.insert(b.name);
    for (const auto& [key, value] : config.items()) {
      if (key == "config") continue;
      if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    std::set<std::string> drop;
    for (const auto& group : groups) {
      bool on_cli = false;
      for (const auto& b : bindings_) {
        if (b.option->count() > 0 &&
            std::find(group.begin(), group.end(), b.name) != group.end()) {
          on_cli = true;
        }
      }
      if (on_cli) drop.insert(group.begin(), group.end());
    }
    for (const auto& b : bindings_) {
      if (b.option->count() > 0) {
        s.given.insert(b.name);
      } else if (config.contains(b.name) && !drop.count(b.name)) {
        try {
          b.from_json(config[b.name]);
        } catch (const json::exception& e) {
          throw ConfigError("config key '" + b.name + "': " + e.what());
        }
        s.given.insert(b.name);
      }
    }
    for (const auto& b : bindings_) {
      if (s.given.count(b.name)) s.effective[b.name] = b.to_json();
    }
  }

 private:
  CLI::App* app_;
  std::vector<Binding> bindings_;
};

class Timings {
 public:
  template <class F>
  auto run(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(stage, t0);
    } else {
      auto result = f();
      record(stage, t0);
      return result;
    }
  }
  json to_json() const { return json(ms_); }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    ms_[stage] += std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  }
  std::map<std::string, double> ms_;
};

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

json partition_json(const SubPartition& c) {
  return {{"n", c.size()}, {"labels", std::vector<Label>(c.labels().begin(), c.labels().end())}};
}

void write_json(const Settings& s, const std::string& name, const json& j) {
  io::write_text(fs::path(s.out) / name, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Pipeline pieces shared by the subcommands.

PointSet load_points(const Settings& s) {
  if (s.points.empty()) throw ConfigError("--points is required");
  return io::read_points_csv(s.points, s.header);
}

HistogramMixtureConfig model_config(const Settings& s, const PointSet& points) {
  HistogramMixtureConfig cfg;
  cfg.components = s.components;
  cfg.bins_per_axis = s.bins;
  cfg.bin_concentration = s.bin_concentration;
  cfg.mass_concentration = s.mass_concentration;
  if (s.domain == "unit") {
    cfg.domain = Domain::unit_cube(points.dim());
  } else if (s.domain != "bbox") {
    throw ConfigError("--domain must be 'bbox' or 'unit'");
  }
  cfg.validate();
  return cfg;
}

Domain domain_of(const Settings& s, const PointSet& points) {
  return s.domain == "unit" ? Domain::unit_cube(points.dim()) : Domain::bounding_box(points);
}

DensityDrawEnsemble load_ensemble(const Settings& s, const PointSet& points, Timings& t) {
  if (!s.ensemble.empty()) {
    auto ens = t.run("read_ensemble", [&] { return io::read_ensemble(s.ensemble); });
    if (ens.size() != points.size()) {
      throw AlignmentError("ensemble has n = " + std::to_string(ens.size()) + " but there are " +
                           std::to_string(points.size()) + " points");
    }
    return ens;
  }
  const auto cfg = model_config(s, points);
  return t.run("build_ensemble", [&] {
    return build_ensemble(points, cfg, s.draws, derive_seed(s.seed, "model"));
  });
}

double resolve_lambda(const Settings& s, std::span<const double> mean, const PointSet& points) {
  int kinds = static_cast<int>(s.has("lambda")) + static_cast<int>(s.has("nu")) +
              static_cast<int>(s.has("c")) + static_cast<int>(s.elbow);
  if (kinds > 1) throw ConfigError("give exactly one of --lambda, --nu, --c, --elbow");
  if (s.elbow) return elbow_level(mean).lambda;
  if (s.has("lambda")) return resolve_level({LevelKind::kLambda, s.lambda});
  if (s.has("c")) {
    return resolve_level({LevelKind::kCosmoC, s.c}, {}, domain_of(s, points).volume());
  }
  return resolve_level({LevelKind::kNoiseFraction, s.nu}, mean);
}

double resolve_delta(const Settings& s, const PointSet& points, std::span<const double> mean,
                     double lambda) {
  if (s.has("delta")) {
    if (!(s.delta > 0.0)) throw ConfigError("--delta must be positive");
    return s.delta;
  }
  AdaptiveDeltaConfig cfg;
  if (s.has("k")) cfg.k = s.k;
  cfg.gamma = s.gamma;
  const auto active = active_indices(mean, lambda);
  if (active.empty()) throw InfeasibleError("no observation reaches the level");
  return adaptive_delta(points, active, cfg);
}

LossParams loss_params(const Settings& s) {
  return {s.loss_a, s.loss_b, s.loss_m, s.loss_m};
}

SearchConfig search_config(const Settings& s) {
  SearchConfig cfg;
  cfg.n_restarts = s.restarts;
  cfg.max_sweeten_passes = s.sweeten_passes;
  cfg.n_zealous_attempts = s.zealous;
  cfg.seed = derive_seed(s.seed, "search");
  cfg.threads = s.threads;
  cfg.validate();
  return cfg;
}

struct Fitted {
  PointSet points;
  DensityDrawEnsemble ensemble;
  std::vector<double> mean;
  double lambda = 0.0;
  double delta = 0.0;
};

Fitted fit(const Settings& s, Timings& t) {
  Fitted f;
  f.points = t.run("read_points", [&] { return load_points(s); });
  f.ensemble = load_ensemble(s, f.points, t);
  f.mean = f.ensemble.mean();
  f.lambda = resolve_lambda(s, f.mean, f.points);
  f.delta = t.run("delta", [&] { return resolve_delta(s, f.points, f.mean, f.lambda); });
  return f;
}

struct Estimated {
  Fitted fitted;
  NeighborhoodGraph graph;
  std::vector<SubPartition> draws;
  CoClusteringStats stats;
  SearchResult result;
};

Estimated estimate(const Settings& s, Timings& t) {
  Fitted f = fit(s, t);
  NeighborhoodGraph graph =
      t.run("graph", [&] { return NeighborhoodGraph(f.points, f.delta); });
  auto draws = t.run("draw_clusterings", [&] {
    return draw_clusterings(graph, f.ensemble, f.lambda);
  });
  CoClusteringStats stats = t.run("stats", [&] { return CoClusteringStats(draws); });
  const auto cfg = search_config(s);
  SearchResult result =
      t.run("search", [&] { return search(stats, loss_params(s), cfg, draws); });
  return {std::move(f), std::move(graph), std::move(draws), std::move(stats),
          std::move(result)};
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns the name of its main output file.

std::string cmd_ensemble(const Settings& s, Timings& t) {
  const auto points = t.run("read_points", [&] { return load_points(s); });
  const auto cfg = model_config(s, points);
  const auto ens = t.run("build_ensemble", [&] {
    return build_ensemble(points, cfg, s.draws, derive_seed(s.seed, "model"));
  });
  const std::string name = s.format == "csv" ? "ensemble.csv" : "ensemble.bin";
  if (s.format != "csv" && s.format != "binary") {
    throw ConfigError("--format must be 'binary' or 'csv'");
  }
  io::write_ensemble(fs::path(s.out) / name, ens);
  std::string mean;
  for (double v : ens.mean()) mean += io::format_double(v) + "\n";
  io::write_text(fs::path(s.out) / "mean_density.csv", mean);
  return name;
}

std::string cmd_cluster(const Settings& s, Timings& t) {
  auto e = estimate(s, t);
  json j = partition_json(e.result.estimate);
  j["schema_version"] = kSchemaVersion;
  j["num_clusters"] = e.result.estimate.num_clusters();
  j["risk"] = e.result.risk;
  j["restarts"] = e.result.restarts;
  j["seed"] = s.seed;
  j["lambda"] = e.fitted.lambda;
  j["delta"] = e.fitted.delta;
  j["num_draws"] = e.fitted.ensemble.num_draws();
  j["alpha"] = e.stats.alpha();
  write_json(s, "cluster.json", j);
  return "cluster.json";
}

std::string cmd_bounds(const Settings& s, Timings& t) {
  auto e = estimate(s, t);
  const auto ball = t.run("credible_ball", [&] {
    return credible_ball(e.result.estimate, e.draws, e.graph, e.stats, loss_params(s), s.alpha);
  });
  json j;
  j["schema_version"] = kSchemaVersion;
  j["epsilon_star"] = ball.radius;
  j["epsilon_star_rescaled"] = ball.radius_rescaled;
  j["alpha"] = ball.alpha;
  j["coverage"] = ball.coverage;
  j["risk"] = e.result.risk;
  j["lambda"] = e.fitted.lambda;
  j["delta"] = e.fitted.delta;
  j["center"] = partition_json(ball.center);
  j["lower"] = partition_json(ball.lower.partition);
  j["lower"]["loss"] = ball.lower.loss;
  j["upper"] = partition_json(ball.upper.partition);
  j["upper"]["loss"] = ball.upper.loss;
  write_json(s, "bounds.json", j);
  return "bounds.json";
}

std::string cmd_plugin(const Settings& s, Timings& t) {
  const Fitted f = fit(s, t);
  const auto c = t.run("plugin", [&] {
    return surrogate_cluster(f.points, f.mean, f.lambda, f.delta);
  });
  json j = partition_json(c);
  j["schema_version"] = kSchemaVersion;
  j["num_clusters"] = c.num_clusters();
  j["lambda"] = f.lambda;
  j["delta"] = f.delta;
  write_json(s, "plugin.json", j);
  return "plugin.json";
}

std::string cmd_dbscan(const Settings& s, Timings& t) {
  const auto points = t.run("read_points", [&] { return load_points(s); });
  const std::size_t min_pts = s.has("min-pts") ? s.min_pts : default_min_pts(points.size());
  if (min_pts < 1) throw ConfigError("--min-pts must be at least 1");
  const double eps = s.has("eps") ? s.eps : dbscan_eps_for_noise_fraction(points, min_pts, s.nu);
  if (!(eps > 0.0)) throw ConfigError("--eps must be positive");
  DbscanOptions opts;
  opts.count_self = !s.exclude_self;
  const auto c = t.run("dbscan", [&] {
    return s.star ? dbscan_star(points, eps, min_pts, opts)
                  : dbscan_classic(points, eps, min_pts, opts);
  });
  json j = partition_json(c);
  j["schema_version"] = kSchemaVersion;
  j["variant"] = s.star ? "dbscan_star" : "dbscan";
  j["num_clusters"] = c.num_clusters();
  j["eps"] = eps;
  j["min_pts"] = min_pts;
  write_json(s, "dbscan.json", j);
  return "dbscan.json";
}

ClusterTree tree_of(const Settings& s, Timings& t) {
  const auto points = t.run("read_points", [&] { return load_points(s); });
  const auto ens = load_ensemble(s, points, t);
  std::vector<double> levels = s.levels;
  if (!s.c_levels.empty()) {
    if (!levels.empty()) throw ConfigError("give --levels or --c-levels, not both");
    const double vol = domain_of(s, points).volume();
    for (double c : s.c_levels) levels.push_back(resolve_level({LevelKind::kCosmoC, c}, {}, vol));
  }
  if (levels.size() < 2) throw ConfigError("a tree needs at least two levels");
  TreeConfig cfg;
  if (s.estimator == "ballet") {
    cfg.estimator = TreeEstimator::kBallet;
  } else if (s.estimator != "plugin") {
    throw ConfigError("--estimator must be 'plugin' or 'ballet'");
  }
  cfg.loss = loss_params(s);
  cfg.search = search_config(s);
  const auto mean = ens.mean();
  const double lowest = *std::min_element(levels.begin(), levels.end());
  const double delta = t.run("delta", [&] { return resolve_delta(s, points, mean, lowest); });
  return t.run("tree", [&] { return build_cluster_tree(points, ens, levels, delta, cfg); });
}

std::string cmd_tree(const Settings& s, Timings& t) {
  const auto tree = tree_of(s, t);
  io::write_text(fs::path(s.out) / "tree.dot", tree.to_dot());
  io::write_text(fs::path(s.out) / "tree.json", tree.to_json() + "\n");
  return "tree.json";
}

std::string cmd_persist(const Settings& s, Timings& t) {
  const auto tree = tree_of(s, t);
  const auto ids = persistent_clusters(tree, s.strict);
  const std::size_t n = tree.partition(0).size();
  std::vector<Label> labels(n, kNoise);
  json nodes = json::array();
  for (std::size_t h = 0; h < ids.size(); ++h) {
    const auto& node = tree.nodes()[ids[h]];
    const auto& part = tree.partition(node.row);
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] == kNoise && part[i] == node.cluster) labels[i] = static_cast<Label>(h + 1);
    }
    nodes.push_back({{"id", ids[h]},
                     {"row", node.row},
                     {"level", tree.level(node.row)},
                     {"cluster", node.cluster},
                     {"size", node.size}});
  }
  json j = partition_json(SubPartition(labels));
  j["schema_version"] = kSchemaVersion;
  j["persistent"] = nodes;
  j["ambiguous_nodes"] = tree.ambiguous();
  write_json(s, "persist.json", j);
  return "persist.json";
}

std::string cmd_simulate(const Settings& s, Timings& t) {
  const fs::path out(s.out);
  if (s.dataset == "sky") {
    SkySurveySpec spec;
    spec.n = s.n;
    spec.components = s.sky_components;
    spec.noise_mass = s.noise_mass;
    spec.weight_concentration = s.weight_concentration;
    spec.variance_shape = s.variance_shape;
    spec.variance_scale = s.variance_scale;
    spec.seed = s.seed;
    const auto survey = t.run("simulate", [&] { return generate_sky_survey(spec); });
    io::write_text(out / "points.csv", io::points_to_csv(survey.points));
    io::write_text(out / "targets.csv", io::points_to_csv(survey.targets));
    std::string source;
    for (int v : survey.source) source += std::to_string(v) + "\n";
    io::write_text(out / "source.csv", source);
  } else if (s.dataset == "moons" || s.dataset == "circles") {
    const auto points = t.run("simulate", [&] {
      return s.dataset == "moons" ? generate_two_moons(s.n, s.noise_sd, s.seed)
                                  : generate_noisy_circles(s.n, s.noise_sd, s.seed);
    });
    io::write_text(out / "points.csv", io::points_to_csv(points));
  } else {
    throw ConfigError("--dataset must be 'sky', 'moons' or 'circles'");
  }
  return "points.csv";
}

std::string cmd_benchmark(const Settings& s, Timings& t) {
  SkySurveySpec spec;
  spec.n = s.n;
  spec.components = s.sky_components;
  spec.noise_mass = s.noise_mass;
  spec.weight_concentration = s.weight_concentration;
  spec.variance_shape = s.variance_shape;
  spec.variance_scale = s.variance_scale;
  BalletStudyConfig ballet;
  ballet.model.components = s.components;
  ballet.model.bins_per_axis = s.bins;
  ballet.model.bin_concentration = s.bin_concentration;
  ballet.model.mass_concentration = s.mass_concentration;
  ballet.draws = s.draws;
  ballet.nu = s.has("nu") ? s.nu : 0.9;
  if (s.has("k")) ballet.delta.k = s.k;
  ballet.delta.gamma = s.gamma;
  ballet.loss = loss_params(s);
  ballet.search = search_config(s);
  ballet.alpha = s.alpha;
  DbscanStudyConfig dbscan;
  if (s.has("min-pts")) dbscan.min_pts = s.min_pts;
  if (s.has("tuned-min-pts")) dbscan.tuned_min_pts = s.tuned_min_pts;
  const auto table = t.run("study", [&] {
    return run_simulation_study(s.reps, spec, ballet, dbscan, s.seed);
  });
  const fs::path out(s.out);
  io::write_text(out / "table.csv", table.to_csv());
  io::write_text(out / "replicates.csv", table.replicates_csv());
  io::write_text(out / "table.json", table.to_json() + "\n");
  return "table.csv";
}

std::string cmd_evaluate(const Settings& s, Timings& t) {
  if (s.partition.empty()) throw ConfigError("--partition is required");
  if (s.targets.empty()) throw ConfigError("--targets is required");
  const auto points = load_points(s);
  const auto targets = io::read_points_csv(s.targets, s.header);
  const auto c = io::read_partition(s.partition);
  if (c.size() != points.size()) {
    throw AlignmentError("partition has n = " + std::to_string(c.size()) + " but there are " +
                         std::to_string(points.size()) + " points");
  }
  const auto report = t.run("evaluate", [&] { return evaluate(c, points, targets); });
  json ellipses = json::array();
  for (std::size_t h = 0; h < report.ellipses.size(); ++h) {
    const auto& e = report.ellipses[h];
    ellipses.push_back({{"cx", e.cx},
                        {"cy", e.cy},
                        {"major", e.major},
                        {"minor", e.minor},
                        {"angle", e.angle},
                        {"targets_inside", report.targets_inside[h]}});
  }
  json j;
  j["schema_version"] = kSchemaVersion;
  j["sensitivity"] = report.sensitivity;
  j["specificity"] = report.specificity;
  j["exact_match"] = report.exact_match;
  j["ellipses"] = ellipses;
  j["target_hit"] = report.target_hit;
  write_json(s, "evaluate.json", j);
  return "evaluate.json";
}

// ---------------------------------------------------------------------------

struct Command {
  std::string name;
  std::string help;
  std::function<std::string(const Settings&, Timings&)> run;
  // Which option families the command accepts.
  bool data, model, level, delta, search, dbscan, tree, study;
};

void add_options(Registry& r, Settings& s, const Command& c) {
  if (c.data) {
    r.option("points", s.points, "CSV of observations, one row per point");
    r.flag("header", s.header, "input CSV files start with a header row");
  }
  if (c.model) {
    if (c.name != "ensemble") {
      r.option("ensemble", s.ensemble, "density draws at the points (binary or CSV)");
    }
    r.option("draws", s.draws, "posterior draws S when fitting the histogram mixture");
    r.option("components", s.components, "histogram mixture components K");
    r.option("bins", s.bins, "bins per axis M'");
    r.option("bin-concentration", s.bin_concentration, "Dirichlet parameter of the cut fractions");
    r.option("mass-concentration", s.mass_concentration, "prior mass spread over the bins");
    r.option("domain", s.domain, "histogram domain: bbox or unit");
  }
  if (c.level) {
    r.option("lambda", s.lambda, "density level");
    r.option("nu", s.nu, "fraction of observations left as noise");
    r.option("c", s.c, "level (1 + c) / Vol(domain)");
    r.flag("elbow", s.elbow, "level at the knee of the sorted log densities");
  }
  if (c.delta) {
    r.option("delta", s.delta, "fixed neighborhood radius");
    r.option("k", s.k, "neighbor rank for the adaptive radius");
    r.option("gamma", s.gamma, "tail fraction for the adaptive radius");
  }
  if (c.search) {
    r.option("alpha", s.alpha, "credible-ball level");
    r.option("loss-a", s.loss_a, "pair penalty: together in the estimate, apart in truth");
    r.option("loss-b", s.loss_b, "pair penalty: apart in the estimate, together in truth");
    r.option("loss-m", s.loss_m, "penalty per point active in exactly one argument");
    r.option("restarts", s.restarts, "search restarts");
    r.option("sweeten-passes", s.sweeten_passes, "maximum sweetening passes per restart");
    r.option("zealous", s.zealous, "destroy-and-rebuild attempts per restart");
    r.option("threads", s.threads, "worker threads (0 = all cores)");
  }
  if (c.dbscan) {
    r.option("min-pts", s.min_pts, "DBSCAN MinPts");
    r.option("eps", s.eps, "DBSCAN Eps; defaults to the quantile implied by --nu");
    r.flag("star", s.star, "DBSCAN* (no border points)");
    r.flag("exclude-self", s.exclude_self, "do not count a point in its own neighborhood");
  }
  if (c.tree) {
    r.option("levels", s.levels, "density levels of the tree rows")->delimiter(',');
    r.option("c-levels", s.c_levels, "c values of the tree rows")->delimiter(',');
    r.option("estimator", s.estimator, "plugin or ballet");
    r.flag("strict", s.strict, "fail on clusters overlapping several parents");
  }
  if (c.study) {
    r.option("dataset", s.dataset, "sky, moons or circles");
    r.option("n", s.n, "observations per data set");
    r.option("sky-components", s.sky_components, "Gaussian clusters in the sky survey");
    r.option("noise-mass", s.noise_mass, "background mass of the sky survey");
    r.option("weight-concentration", s.weight_concentration,
             "symmetric Dirichlet parameter of the cluster weights");
    r.option("variance-shape", s.variance_shape, "inverse-gamma shape of the cluster variances");
    r.option("variance-scale", s.variance_scale, "inverse-gamma scale of the cluster variances");
    r.option("noise-sd", s.noise_sd, "noise of the moons and circles data");
    r.option("reps", s.reps, "replicates");
    r.option("tuned-min-pts", s.tuned_min_pts, "adds a DBSCAN column with this MinPts");
  }
  if (c.name == "evaluate") {
    r.option("partition", s.partition, "clustering to score (JSON or CSV)");
    r.option("targets", s.targets, "CSV of 2-D target coordinates");
  }
  if (c.name == "ensemble") r.option("format", s.format, "binary or csv");
  r.option("out", s.out, "output directory");
  r.option("seed", s.seed, "master seed");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Command> commands = {
      {"ensemble", "fit the histogram mixture and write density draws", cmd_ensemble,
       true, true, false, false, false, false, false, false},
      {"cluster", "BALLET point estimate with risk and activity probabilities", cmd_cluster,
       true, true, true, true, true, false, false, false},
      {"bounds", "point estimate plus credible-ball bounds", cmd_bounds,
       true, true, true, true, true, false, false, false},
      {"plugin", "level-set clustering of the posterior mean density", cmd_plugin,
       true, true, true, true, false, false, false, false},
      {"dbscan", "DBSCAN or DBSCAN*", cmd_dbscan,
       true, false, true, false, false, true, false, false},
      {"tree", "cluster tree over a ladder of levels", cmd_tree,
       true, true, false, true, true, false, true, false},
      {"persist", "persistent clusters of the cluster tree", cmd_persist,
       true, true, false, true, true, false, true, false},
      {"simulate", "generate a synthetic data set", cmd_simulate,
       false, false, false, false, false, false, false, true},
      {"benchmark", "replicated sky-survey study against DBSCAN", cmd_benchmark,
       false, true, true, true, true, true, false, true},
      {"evaluate", "score a clustering against target coordinates", cmd_evaluate,
       true, false, false, false, false, false, false, false},
  };

  CLI::App app{"Bayesian level-set clustering"};
  app.set_version_flag("--version", BALLET_VERSION);
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::unique_ptr<Settings>> settings;
  std::vector<std::unique_ptr<Registry>> registries;
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "JSON config file; flags override it");
    settings.push_back(std::make_unique<Settings>());
    registries.push_back(std::make_unique<Registry>(sub));
    add_options(*registries.back(), *settings.back(), c);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::kConfig);
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  const Command& command = commands[which];
  Settings& s = *settings[which];

  try {
    json config = json::object();
    if (!config_path.empty()) {
      try {
        config = json::parse(io::read_text(config_path));
      } catch (const json::exception& e) {
        throw ConfigError("config file: " + std::string(e.what()));
      }
      if (!config.is_object()) throw ConfigError("config file must hold a JSON object");
    }
    registries[which]->merge(s, config, {{"lambda", "nu", "c", "elbow"}, {"levels", "c-levels"}});

    Timings timings;
    const auto t0 = std::chrono::steady_clock::now();
    const std::string output = command.run(s, timings);
    const double total = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

    json provenance;
    provenance["schema_version"] = kSchemaVersion;
    provenance["command"] = command.name;
    provenance["version"] = BALLET_VERSION;
    provenance["config"] = s.effective;
    provenance["config_hash"] = hex(fnv1a(command.name + s.effective.dump()));
    provenance["seed"] = s.seed;
    provenance["timings_ms"] = timings.to_json();
    provenance["total_ms"] = total;
    write_json(s, "provenance.json", provenance);
    std::cout << (fs::path(s.out) / output).string() << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kConfig);
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return static_cast<int>(ErrorKind::kInfeasible);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
