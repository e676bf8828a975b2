#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <vector>

#include "ballet/bench.hpp"
#include "ballet/credible.hpp"
#include "ballet/density.hpp"
#include "ballet/errors.hpp"
#include "ballet/levels.hpp"
#include "ballet/levelset.hpp"
#include "ballet/risk.hpp"
#include "ballet/subpartition.hpp"

namespace py = pybind11;
using namespace ballet;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<Label, py::array::c_style | py::array::forcecast>;

PointSet to_points(const DoubleArray& a) {
  if (a.ndim() == 1) {
    return PointSet(1, std::vector<double>(a.data(), a.data() + a.size()));
  }
  if (a.ndim() != 2) throw ConfigError("points must be a 1-D or 2-D array");
  return PointSet(static_cast<std::size_t>(a.shape(1)),
                  std::vector<double>(a.data(), a.data() + a.size()));
}

DoubleArray from_points(const PointSet& ps) {
  DoubleArray out({ps.size(), ps.dim()});
  std::copy(ps.coords().begin(), ps.coords().end(), out.mutable_data());
  return out;
}

SubPartition to_partition(const LabelArray& a) {
  return SubPartition(std::vector<Label>(a.data(), a.data() + a.size()));
}

LabelArray from_partition(const SubPartition& c) {
  LabelArray out(static_cast<py::ssize_t>(c.size()));
  std::copy(c.labels().begin(), c.labels().end(), out.mutable_data());
  return out;
}

DoubleArray from_vector(const std::vector<double>& v) {
  DoubleArray out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

DensityDrawEnsemble to_ensemble(const DoubleArray& a) {
  if (a.ndim() != 2) throw ConfigError("ensemble must be a (draws, n) array");
  return DensityDrawEnsemble(static_cast<std::size_t>(a.shape(0)),
                             static_cast<std::size_t>(a.shape(1)),
                             std::vector<double>(a.data(), a.data() + a.size()));
}

LossParams loss_params(double a, double b, double m) {
  LossParams p;
  p.a = a;
  p.b = b;
  p.m_ai = p.m_ia = m;
  p.validate();
  return p;
}

// λ from exactly one of lam / nu (default ν = 0.1), δ adaptive unless given.
std::pair<double, double> resolve(const PointSet& ps, const std::vector<double>& mean,
                                  std::optional<double> lam, std::optional<double> nu,
                                  std::optional<double> delta) {
  if (lam && nu) throw ConfigError("give at most one of lam and nu");
  const double lambda = lam ? resolve_level({LevelKind::kLambda, *lam})
                            : resolve_level({LevelKind::kNoiseFraction, nu.value_or(0.1)}, mean);
  const double d = delta ? *delta : adaptive_delta(ps, active_indices(mean, lambda));
  return {lambda, d};
}

py::dict bound_dict(const GreedyBound& b) {
  py::dict d;
  d["labels"] = from_partition(b.partition);
  d["loss"] = b.loss;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ballet, m) {
  m.doc() = "Bayesian level-set clustering";
  m.attr("__version__") = BALLET_VERSION;

  static py::exception<Error> base(m, "BalletError", PyExc_RuntimeError);
  static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
  static py::exception<IoError> io(m, "IoError", base.ptr());
  static py::exception<NumericError> numeric(m, "NumericError", base.ptr());
  static py::exception<InfeasibleError> infeasible(m, "InfeasibleError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config, e.what());
    } catch (const IoError& e) {
      py::set_error(io, e.what());
    } catch (const NumericError& e) {
      py::set_error(numeric, e.what());
    } catch (const InfeasibleError& e) {
      py::set_error(infeasible, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def(
      "loss",
      [](const LabelArray& c1, const LabelArray& c2, double a, double b, double mm) {
        return ia_binder_loss(to_partition(c1), to_partition(c2), loss_params(a, b, mm));
      },
      py::arg("c1"), py::arg("c2"), py::arg("a") = 1.0, py::arg("b") = 1.0, py::arg("m") = 0.5,
      "Inactive/Active Binder loss between two labelings (0 = noise).");
  m.def(
      "distance",
      [](const LabelArray& c1, const LabelArray& c2, double a, double b, double mm) {
        return rescaled_distance(to_partition(c1), to_partition(c2), loss_params(a, b, mm)).value;
      },
      py::arg("c1"), py::arg("c2"), py::arg("a") = 1.0, py::arg("b") = 1.0, py::arg("m") = 0.5,
      "The loss divided by n(n-1)/2.");

  m.def(
      "fit_ensemble",
      [](const DoubleArray& points, std::size_t draws, std::size_t components, std::size_t bins,
         std::uint64_t seed, bool unit_domain) {
        const auto ps = to_points(points);
        HistogramMixtureConfig cfg;
        cfg.components = components;
        cfg.bins_per_axis = bins;
        if (unit_domain) cfg.domain = Domain::unit_cube(ps.dim());
        const auto ens = build_ensemble(ps, cfg, draws, seed);
        DoubleArray out({ens.num_draws(), ens.size()});
        std::copy(ens.values().begin(), ens.values().end(), out.mutable_data());
        return out;
      },
      py::arg("points"), py::arg("draws") = 100, py::arg("components") = 50,
      py::arg("bins") = 50, py::arg("seed") = 0, py::arg("unit_domain") = false,
      "Posterior draws of the histogram mixture at the points, shape (draws, n).");

  m.def(
      "noise_fraction_level",
      [](const DoubleArray& density, double nu) {
        return noise_fraction_level({density.data(), static_cast<std::size_t>(density.size())},
                                    nu);
      },
      py::arg("density"), py::arg("nu"));
  m.def(
      "elbow_level",
      [](const DoubleArray& density) {
        const auto e = elbow_level({density.data(), static_cast<std::size_t>(density.size())});
        py::dict d;
        d["lambda"] = e.lambda;
        d["implied_nu"] = e.implied_nu;
        d["fallback"] = e.fallback;
        return d;
      },
      py::arg("density"));
  m.def(
      "adaptive_delta",
      [](const DoubleArray& points, const std::vector<std::size_t>& active,
         std::optional<std::size_t> k, double gamma) {
        AdaptiveDeltaConfig cfg;
        cfg.k = k;
        cfg.gamma = gamma;
        return adaptive_delta(to_points(points), active, cfg);
      },
      py::arg("points"), py::arg("active"), py::arg("k") = py::none(), py::arg("gamma") = 0.01);

  m.def(
      "cluster",
      [](const DoubleArray& points, const DoubleArray& ensemble, std::optional<double> lam,
         std::optional<double> nu, std::optional<double> delta, int restarts,
         std::uint64_t seed, std::optional<double> alpha) {
        const auto ps = to_points(points);
        const auto ens = to_ensemble(ensemble);
        if (ens.size() != ps.size()) throw AlignmentError("ensemble does not match the points");
        const auto mean = ens.mean();
        const auto [lambda, d] = resolve(ps, mean, lam, nu, delta);
        const NeighborhoodGraph graph(ps, d);
        const auto draws = draw_clusterings(graph, ens, lambda);
        const CoClusteringStats stats(draws);
        SearchConfig cfg;
        cfg.n_restarts = restarts;
        cfg.seed = seed;
        const auto r = search(stats, {}, cfg, draws);
        py::dict out;
        out["labels"] = from_partition(r.estimate);
        out["risk"] = r.risk;
        out["lambda"] = lambda;
        out["delta"] = d;
        out["activity"] = from_vector({stats.alpha().begin(), stats.alpha().end()});
        if (alpha) {
          const auto ball = credible_ball(r.estimate, draws, graph, stats, {}, *alpha);
          out["radius"] = ball.radius;
          out["coverage"] = ball.coverage;
          out["lower"] = bound_dict(ball.lower);
          out["upper"] = bound_dict(ball.upper);
        }
        return out;
      },
      py::arg("points"), py::arg("ensemble"), py::arg("lam") = py::none(),
      py::arg("nu") = py::none(), py::arg("delta") = py::none(), py::arg("restarts") = 16,
      py::arg("seed") = 0, py::arg("alpha") = py::none(),
      "BALLET point estimate; with alpha, also the credible-ball bounds.");
  m.def(
      "plugin",
      [](const DoubleArray& points, const DoubleArray& ensemble, std::optional<double> lam,
         std::optional<double> nu, std::optional<double> delta) {
        const auto ps = to_points(points);
        const auto ens = to_ensemble(ensemble);
        if (ens.size() != ps.size()) throw AlignmentError("ensemble does not match the points");
        const auto [lambda, d] = resolve(ps, ens.mean(), lam, nu, delta);
        return from_partition(plugin_estimate(ps, ens, lambda, d));
      },
      py::arg("points"), py::arg("ensemble"), py::arg("lam") = py::none(),
      py::arg("nu") = py::none(), py::arg("delta") = py::none());
  m.def(
      "level_set_clusters",
      [](const DoubleArray& points, const DoubleArray& density, double lam, double delta) {
        return from_partition(surrogate_cluster(
            to_points(points), {density.data(), static_cast<std::size_t>(density.size())}, lam,
            delta));
      },
      py::arg("points"), py::arg("density"), py::arg("lam"), py::arg("delta"),
      "Components of the delta-graph over the points with density >= lam.");
  m.def(
      "dbscan",
      [](const DoubleArray& points, double eps, std::size_t min_pts, bool star) {
        const auto ps = to_points(points);
        return from_partition(star ? dbscan_star(ps, eps, min_pts)
                                   : dbscan_classic(ps, eps, min_pts));
      },
      py::arg("points"), py::arg("eps"), py::arg("min_pts"), py::arg("star") = false);
  m.def(
      "kde_uniform",
      [](const DoubleArray& points, double delta) {
        return from_vector(kde_uniform(to_points(points), delta).at_points());
      },
      py::arg("points"), py::arg("delta"));
  m.def(
      "knn_density",
      [](const DoubleArray& points, std::size_t k) {
        return from_vector(knn_density(to_points(points), k).at_points());
      },
      py::arg("points"), py::arg("k"));

  m.def(
      "sky_survey",
      [](std::size_t n, std::size_t components, double noise_mass, std::uint64_t seed) {
        SkySurveySpec spec;
        spec.n = n;
        spec.components = components;
        spec.noise_mass = noise_mass;
        spec.seed = seed;
        const auto s = generate_sky_survey(spec);
        py::array_t<int> source(static_cast<py::ssize_t>(s.source.size()));
        std::copy(s.source.begin(), s.source.end(), source.mutable_data());
        return py::make_tuple(from_points(s.points), from_points(s.targets), source);
      },
      py::arg("n") = 4000, py::arg("components") = 10, py::arg("noise_mass") = 0.9,
      py::arg("seed") = 0, "Returns (points, targets, source); source is -1 for background.");
  m.def(
      "two_moons",
      [](std::size_t n, double noise_sd, std::uint64_t seed) {
        return from_points(generate_two_moons(n, noise_sd, seed));
      },
      py::arg("n"), py::arg("noise_sd") = 0.05, py::arg("seed") = 0);
  m.def(
      "evaluate",
      [](const LabelArray& labels, const DoubleArray& points, const DoubleArray& targets) {
        const auto r = evaluate(to_partition(labels), to_points(points), to_points(targets));
        py::dict d;
        d["sensitivity"] = r.sensitivity;
        d["specificity"] = r.specificity;
        d["exact_match"] = r.exact_match;
        return d;
      },
      py::arg("labels"), py::arg("points"), py::arg("targets"));
  m.def(
      "simulation_study",
      [](std::size_t reps, std::size_t n, std::size_t draws, std::uint64_t seed) {
        SkySurveySpec spec;
        spec.n = n;
        BalletStudyConfig ballet;
        ballet.draws = draws;
        const auto table = run_simulation_study(reps, spec, ballet, {}, seed);
        py::dict out;
        for (const auto& s : table.mean) {
          py::dict row;
          row["sensitivity"] = s.sensitivity;
          row["specificity"] = s.specificity;
          row["exact_match"] = s.exact_match;
          out[py::str(s.method)] = row;
        }
        return out;
      },
      py::arg("reps") = 10, py::arg("n") = 4000, py::arg("draws") = 100, py::arg("seed") = 0,
      "Mean scores per method over replicated sky surveys.");
}
