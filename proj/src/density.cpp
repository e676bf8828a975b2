#include "ballet/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "ballet/errors.hpp"

namespace ballet {

double Domain::volume() const {
  double v = 1.0;
  for (std::size_t a = 0; a < dim(); ++a) v *= hi[a] - lo[a];
  return v;
}

bool Domain::contains(std::span<const double> x) const {
  for (std::size_t a = 0; a < dim(); ++a) {
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  }
  return true;
}

void Domain::validate() const {
  if (lo.empty() || lo.size() != hi.size()) throw ConfigError("domain bounds are malformed");
  for (std::size_t a = 0; a < dim(); ++a) {
    if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]) || !(hi[a] > lo[a])) {
      throw ConfigError("domain side " + std::to_string(a) + " is empty or not finite");
    }
  }
}

Domain Domain::unit_cube(std::size_t d) {
  return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
}

Domain Domain::bounding_box(const PointSet& points, double inflate) {
  if (points.size() == 0) throw ConfigError("bounding box of an empty point set");
  const std::size_t d = points.dim();
  Domain box{std::vector<double>(d, std::numeric_limits<double>::infinity()),
             std::vector<double>(d, -std::numeric_limits<double>::infinity())};
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      box.lo[a] = std::min(box.lo[a], points[i][a]);
      box.hi[a] = std::max(box.hi[a], points[i][a]);
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    double pad = 0.5 * inflate * (box.hi[a] - box.lo[a]);
    if (!(pad > 0.0)) pad = 0.5;  // a flat side still needs positive width
    box.lo[a] -= pad;
    box.hi[a] += pad;
  }
  return box;
}

void HistogramMixtureConfig::validate() const {
  if (components < 1 || bins_per_axis < 1) {
    throw ConfigError("the histogram mixture needs at least one component and one bin");
  }
  if (!(bin_concentration > 0.0) || !(mass_concentration > 0.0)) {
    throw ConfigError("Dirichlet concentrations must be positive");
  }
  if (domain) domain->validate();
}

HistogramBins::HistogramBins(Domain domain, std::size_t components, std::size_t bins_per_axis,
                             std::vector<std::vector<double>> cuts)
    : domain_(std::move(domain)),
      components_(components),
      bins_per_axis_(bins_per_axis),
      cuts_(std::move(cuts)) {
  domain_.validate();
  const std::size_t d = domain_.dim();
  if (d > 3) throw InfeasibleError("the histogram mixture supports at most 3 dimensions");
  bins_ = 1;
  for (std::size_t a = 0; a < d; ++a) bins_ *= bins_per_axis_;
  if (cuts_.size() != components_ * d) throw AlignmentError("cut table has the wrong shape");
  for (const auto& c : cuts_) {
    if (c.size() != bins_per_axis_ + 1) throw AlignmentError("cut vector has the wrong length");
    for (std::size_t j = 1; j < c.size(); ++j) {
      if (!(c[j] > c[j - 1])) throw NumericError("bin cut points are not strictly increasing");
    }
  }
  areas_.resize(components_ * bins_);
  for (std::size_t k = 0; k < components_; ++k) {
    for (std::size_t m = 0; m < bins_; ++m) {
      std::size_t rest = m;
      double area = 1.0;
      for (std::size_t a = 0; a < d; ++a) {
        const std::size_t j = rest % bins_per_axis_;
        rest /= bins_per_axis_;
        const auto& c = cuts_[k * d + a];
        area *= c[j + 1] - c[j];
      }
      areas_[k * bins_ + m] = area;
    }
  }
}

std::span<const double> HistogramBins::cuts(std::size_t k, std::size_t axis) const {
  return cuts_[k * domain_.dim() + axis];
}

std::size_t HistogramBins::bin_of(std::size_t k, std::span<const double> x) const {
  const std::size_t d = domain_.dim();
  std::size_t m = 0;
  std::size_t stride = 1;
  for (std::size_t a = 0; a < d; ++a) {
    const auto& c = cuts_[k * d + a];
    // First cut at or above x among u_1..u_{M'}.
    auto it = std::lower_bound(c.begin() + 1, c.end(), x[a]);
    std::size_t j = static_cast<std::size_t>(it - (c.begin() + 1));
    if (j >= bins_per_axis_) j = bins_per_axis_ - 1;
    m += j * stride;
    stride *= bins_per_axis_;
  }
  return m;
}

HistogramBins sample_bins(const HistogramMixtureConfig& cfg, const Domain& domain, Rng& rng) {
  cfg.validate();
  domain.validate();
  const std::size_t d = domain.dim();
  const std::vector<double> shape(cfg.bins_per_axis, cfg.bin_concentration);
  std::vector<std::vector<double>> cuts;
  cuts.reserve(cfg.components * d);
  for (std::size_t k = 0; k < cfg.components; ++k) {
    for (std::size_t a = 0; a < d; ++a) {
      const auto fractions = rng.dirichlet(shape);
      std::vector<double> c(cfg.bins_per_axis + 1);
      const double width = domain.hi[a] - domain.lo[a];
      double acc = 0.0;
      c[0] = domain.lo[a];
      for (std::size_t j = 1; j < cfg.bins_per_axis; ++j) {
        acc += fractions[j - 1];
        c[j] = domain.lo[a] + width * acc;
      }
      c[cfg.bins_per_axis] = domain.hi[a];
      cuts.push_back(std::move(c));
    }
  }
  return HistogramBins(domain, cfg.components, cfg.bins_per_axis, std::move(cuts));
}

namespace {

void require_inside(const PointSet& data, const Domain& domain) {
  if (data.dim() != domain.dim()) throw AlignmentError("data and domain dimensions differ");
  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!domain.contains(data[i])) outside.push_back(i);
  }
  if (outside.empty()) return;
  std::ostringstream msg;
  msg << outside.size() << " observation(s) fall outside the histogram domain:";
  for (std::size_t t = 0; t < std::min<std::size_t>(outside.size(), 10); ++t) {
    msg << ' ' << outside[t];
  }
  if (outside.size() > 10) msg << " ...";
  throw ConfigError(msg.str());
}

}  // namespace

std::vector<std::vector<double>> posterior_parameters(const PointSet& data,
                                                      const HistogramBins& bins,
                                                      double mass_concentration) {
  require_inside(data, bins.domain());
  const std::size_t K = bins.components();
  const double total_area = bins.domain().volume();
  std::vector<std::vector<double>> params(K, std::vector<double>(bins.bins(), 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<std::size_t> counts(bins.bins(), 0);
    for (std::size_t i = 0; i < data.size(); ++i) ++counts[bins.bin_of(k, data[i])];
    for (std::size_t m = 0; m < bins.bins(); ++m) {
      params[k][m] = static_cast<double>(counts[m]) / static_cast<double>(K) +
                     mass_concentration * bins.bin_area(k, m) / total_area;
    }
  }
  return params;
}

HistogramDensity::HistogramDensity(std::shared_ptr<const HistogramBins> bins,
                                   std::vector<std::vector<double>> masses)
    : bins_(std::move(bins)), masses_(std::move(masses)) {
  if (masses_.size() != bins_->components()) throw AlignmentError("mass table has wrong shape");
  for (const auto& p : masses_) {
    if (p.size() != bins_->bins()) throw AlignmentError("mass vector has the wrong length");
  }
}

double HistogramDensity::operator()(std::span<const double> x) const {
  if (!bins_->domain().contains(x)) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < masses_.size(); ++k) {
    const std::size_t m = bins_->bin_of(k, x);
    total += masses_[k][m] / bins_->bin_area(k, m);
  }
  return total / static_cast<double>(masses_.size());
}

double HistogramDensity::total_mass() const {
  double total = 0.0;
  for (const auto& p : masses_) {
    double component = 0.0;
    for (double v : p) component += v;
    total += component;
  }
  return total / static_cast<double>(masses_.size());
}

HistogramDensity posterior_draw(std::span<const std::vector<double>> parameters,
                                std::shared_ptr<const HistogramBins> bins, Rng& rng) {
  std::vector<std::vector<double>> masses;
  masses.reserve(parameters.size());
  for (const auto& alpha : parameters) masses.push_back(rng.dirichlet(alpha));
  return HistogramDensity(std::move(bins), std::move(masses));
}

HistogramDensity posterior_draw(const PointSet& data, std::shared_ptr<const HistogramBins> bins,
                                double mass_concentration, Rng& rng) {
  const auto params = posterior_parameters(data, *bins, mass_concentration);
  return posterior_draw(params, std::move(bins), rng);
}

DensityDrawEnsemble build_ensemble(const PointSet& data, const HistogramMixtureConfig& cfg,
                                   std::size_t num_draws, std::uint64_t seed) {
  cfg.validate();
  if (num_draws < 1) throw ConfigError("the ensemble needs at least one draw");
  const Domain domain = cfg.domain ? *cfg.domain : Domain::bounding_box(data);
  Rng bin_rng(derive_seed(seed, "bins"));
  const HistogramBins bins = sample_bins(cfg, domain, bin_rng);
  const auto params = posterior_parameters(data, bins, cfg.mass_concentration);

  const std::size_t n = data.size();
  const std::size_t K = bins.components();
  std::vector<std::uint32_t> bin_index(K * n);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      bin_index[k * n + i] = static_cast<std::uint32_t>(bins.bin_of(k, data[i]));
    }
  }

  const std::uint64_t draw_seed = derive_seed(seed, "draws");
  std::vector<double> values(num_draws * n, 0.0);
  std::vector<double> height(bins.bins());
  for (std::size_t s = 0; s < num_draws; ++s) {
    Rng rng(derive_seed(draw_seed, static_cast<std::uint64_t>(s)));
    double* row = values.data() + s * n;
    for (std::size_t k = 0; k < K; ++k) {
      const auto p = rng.dirichlet(params[k]);
      for (std::size_t m = 0; m < height.size(); ++m) height[m] = p[m] / bins.bin_area(k, m);
      const std::uint32_t* idx = bin_index.data() + k * n;
      for (std::size_t i = 0; i < n; ++i) row[i] += height[idx[i]];
    }
    for (std::size_t i = 0; i < n; ++i) row[i] /= static_cast<double>(K);
  }
  return DensityDrawEnsemble(num_draws, n, std::move(values));
}

// ---------------------------------------------------------------------------

double uniform_kernel_normalizer(std::size_t n, std::size_t d, double delta) {
  if (!(delta > 0.0)) throw ConfigError("kernel radius must be positive");
  return static_cast<double>(n) * unit_ball_volume(d) * std::pow(delta, static_cast<double>(d));
}

double uniform_kernel_level(std::size_t count, std::size_t n, std::size_t d, double delta) {
  return static_cast<double>(count) / uniform_kernel_normalizer(n, d, delta);
}

UniformKde::UniformKde(const PointSet& points, double delta)
    : points_(std::make_shared<const PointSet>(points)), delta_(delta) {
  if (points.size() == 0) throw ConfigError("KDE of an empty point set");
  if (!(delta > 0.0)) throw ConfigError("kernel radius must be positive");
  grid_ = std::make_shared<const GridIndex>(*points_, delta);
}

double UniformKde::operator()(std::span<const double> x) const {
  std::size_t count = 0;
  grid_->for_each_within(x, delta_, EdgeRule::kClosed, [&](std::size_t, double) { ++count; });
  return uniform_kernel_level(count, points_->size(), points_->dim(), delta_);
}

std::vector<double> UniformKde::at_points() const {
  std::vector<double> out(points_->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)((*points_)[i]);
  return out;
}

UniformKde kde_uniform(const PointSet& points, double delta) { return UniformKde(points, delta); }

KnnDensity::KnnDensity(const PointSet& points, std::size_t k)
    : points_(std::make_shared<const PointSet>(points)), k_(k) {
  if (k < 1 || k > points.size()) throw ConfigError("k must lie in [1, n]");
}

double KnnDensity::level_at_radius(double r) const {
  const double n = static_cast<double>(points_->size());
  const double volume = unit_ball_volume(points_->dim()) *
                        std::pow(r, static_cast<double>(points_->dim()));
  if (volume == 0.0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(k_) / (n * volume);
}

double KnnDensity::operator()(std::span<const double> x) const {
  std::vector<double> dist(points_->size());
  for (std::size_t j = 0; j < dist.size(); ++j) dist[j] = distance(x, (*points_)[j]);
  auto nth = dist.begin() + static_cast<std::ptrdiff_t>(k_ - 1);
  std::nth_element(dist.begin(), nth, dist.end());
  return level_at_radius(*nth);
}

std::vector<double> KnnDensity::at_points() const {
  std::vector<double> out(points_->size());
  if (k_ == 1) {
    // The nearest data point to a data point is itself.
    std::fill(out.begin(), out.end(), std::numeric_limits<double>::infinity());
    return out;
  }
  const auto knn = knn_distance(*points_, k_ - 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = level_at_radius(knn[i]);
  return out;
}

KnnDensity knn_density(const PointSet& points, std::size_t k) { return KnnDensity(points, k); }

}  // namespace ballet
