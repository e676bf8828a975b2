#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ballet/levelset.hpp"
#include "ballet/random.hpp"
#include "ballet/risk.hpp"

namespace ballet {

/// Axis-aligned box.
struct Domain {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  double volume() const;
  bool contains(std::span<const double> x) const;
  void validate() const;

  static Domain unit_cube(std::size_t d);
  /// Bounding box of the points, each side widened by `inflate` times its
  /// length (split evenly between both ends).
  static Domain bounding_box(const PointSet& points, double inflate = 0.01);
};

struct HistogramMixtureConfig {
  std::size_t components = 50;      ///< K
  std::size_t bins_per_axis = 50;   ///< M' (M = M'^d bins per component)
  double bin_concentration = 5.0;   ///< Dirichlet parameter for the cut fractions
  double mass_concentration = 1.0;  ///< prior weight spread over the bins by area
  std::optional<Domain> domain;     ///< defaults to the inflated bounding box

  void validate() const;
};

/// One draw of the per-component grids, shared by every posterior draw.
class HistogramBins {
 public:
  HistogramBins(Domain domain, std::size_t components, std::size_t bins_per_axis,
                std::vector<std::vector<double>> cuts);

  const Domain& domain() const { return domain_; }
  std::size_t components() const { return components_; }
  std::size_t bins_per_axis() const { return bins_per_axis_; }
  std::size_t bins() const { return bins_; }

  /// Cut points of component k along `axis`: M' + 1 increasing values from
  /// the lower to the upper domain edge.
  std::span<const double> cuts(std::size_t k, std::size_t axis) const;

  /// Flat bin index of x in component k. The first bin on each axis is
  /// closed, later bins are (u_{m-1}, u_m].
  std::size_t bin_of(std::size_t k, std::span<const double> x) const;
  double bin_area(std::size_t k, std::size_t m) const { return areas_[k * bins_ + m]; }

 private:
  Domain domain_;
  std::size_t components_;
  std::size_t bins_per_axis_;
  std::size_t bins_;
  std::vector<std::vector<double>> cuts_;  // [k * d + axis]
  std::vector<double> areas_;              // [k * M + m]
};

/// Draws the grids: per component and axis, cut fractions from a symmetric
/// Dirichlet(bin_concentration) over M' parts.
HistogramBins sample_bins(const HistogramMixtureConfig& cfg, const Domain& domain, Rng& rng);

/// Dirichlet parameters of the bin masses given the data:
/// N_km / K + mass_concentration * A_km / A, indexed [k][m].
std::vector<std::vector<double>> posterior_parameters(const PointSet& data,
                                                      const HistogramBins& bins,
                                                      double mass_concentration);

/// A histogram-mixture density with equal component weights.
class HistogramDensity {
 public:
  HistogramDensity(std::shared_ptr<const HistogramBins> bins,
                   std::vector<std::vector<double>> masses);

  double operator()(std::span<const double> x) const;
  /// Σ_k (1/K) Σ_m p_km, the exact integral of the density.
  double total_mass() const;

  const HistogramBins& bins() const { return *bins_; }
  std::span<const double> masses(std::size_t k) const { return masses_[k]; }

 private:
  std::shared_ptr<const HistogramBins> bins_;
  std::vector<std::vector<double>> masses_;
};

/// One posterior draw: p_k ~ Dirichlet(posterior_parameters) per component.
HistogramDensity posterior_draw(std::span<const std::vector<double>> parameters,
                                std::shared_ptr<const HistogramBins> bins, Rng& rng);
HistogramDensity posterior_draw(const PointSet& data, std::shared_ptr<const HistogramBins> bins,
                                double mass_concentration, Rng& rng);

/// S posterior draws of the histogram mixture evaluated at the data.
/// Deterministic given the seed; draw s uses its own derived stream.
DensityDrawEnsemble build_ensemble(const PointSet& data, const HistogramMixtureConfig& cfg,
                                   std::size_t num_draws, std::uint64_t seed);

/// n * v_d * δ^d, the normalizer shared by the uniform-kernel KDE and the
/// DBSCAN* level map.
double uniform_kernel_normalizer(std::size_t n, std::size_t d, double delta);

/// Density level matching a neighbor count: count / (n v_d δ^d).
double uniform_kernel_level(std::size_t count, std::size_t n, std::size_t d, double delta);

/// Uniform-kernel KDE: f(x) = #{i : ||x_i - x|| <= δ} / (n v_d δ^d).
class UniformKde {
 public:
  UniformKde(const PointSet& points, double delta);

  double operator()(std::span<const double> x) const;
  std::vector<double> at_points() const;

 private:
  std::shared_ptr<const PointSet> points_;
  std::shared_ptr<const GridIndex> grid_;
  double delta_;
};

UniformKde kde_uniform(const PointSet& points, double delta);

/// k-NN density: f(x) = k / (n v_d δ_k(x)^d), with δ_k(x) the distance to
/// the k-th nearest data point (a data point counts itself). Infinite where
/// δ_k(x) = 0.
class KnnDensity {
 public:
  KnnDensity(const PointSet& points, std::size_t k);

  double operator()(std::span<const double> x) const;
  std::vector<double> at_points() const;
  /// The level k / (n v_d r^d) that the density crosses at δ_k(x) = r.
  double level_at_radius(double r) const;

 private:
  std::shared_ptr<const PointSet> points_;
  std::size_t k_;
};

KnnDensity knn_density(const PointSet& points, std::size_t k);

}  // namespace ballet
