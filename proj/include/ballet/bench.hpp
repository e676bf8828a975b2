#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ballet/density.hpp"
#include "ballet/levelset.hpp"
#include "ballet/risk.hpp"
#include "ballet/subpartition.hpp"

namespace ballet {

/// Synthetic sky survey: a uniform background on the unit square plus
/// isotropic Gaussian blobs.
struct SkySurveySpec {
  std::size_t n = 4000;
  std::size_t components = 10;
  double noise_mass = 0.9;
  /// Symmetric Dirichlet parameter of the blob weights (1 = uniform on the
  /// simplex; smaller values give more uneven blob sizes).
  double weight_concentration = 0.5;
  /// Inverse-gamma prior on each blob's per-axis variance.
  double variance_shape = 5.0;
  double variance_scale = 0.0005;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GaussianBlob {
  double x = 0.0;
  double y = 0.0;
  double variance = 0.0;
  double weight = 0.0;
};

struct SkySurvey {
  PointSet points;
  PointSet targets;  ///< blob means
  std::vector<GaussianBlob> blobs;
  std::vector<int> source;  ///< blob index per point, -1 for background
};

/// Draws from the mixture, resampling any draw that falls outside the unit
/// square until n points are kept.
SkySurvey generate_sky_survey(const SkySurveySpec& spec);

PointSet generate_two_moons(std::size_t n, double noise_sd, std::uint64_t seed);
PointSet generate_noisy_circles(std::size_t n, double noise_sd, std::uint64_t seed,
                                double inner_radius = 0.5);

/// Ellipse {x : (x - c)' R diag(1/a^2) R' (x - c) <= 1}.
struct Ellipse {
  double cx = 0.0, cy = 0.0;
  double major = 0.0, minor = 0.0;  ///< semi-axes
  double angle = 0.0;               ///< of the major axis, radians

  bool contains(double x, double y) const;
};

/// Radius^2 of the 95% chi-square region with two degrees of freedom.
inline constexpr double kEllipseChi2 = 5.991464547107979;
inline constexpr double kMinSemiAxis = 0.005;

/// Mean/covariance ellipse scaled to the 95% chi-square radius, with each
/// semi-axis at least kMinSemiAxis. A singleton gets the minimum circle.
Ellipse enclosing_ellipse(const PointSet& points, const std::vector<std::size_t>& members);

struct EvalReport {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double exact_match = 0.0;
  std::vector<Ellipse> ellipses;
  std::vector<std::size_t> targets_inside;  ///< per ellipse
  std::vector<std::uint8_t> target_hit;     ///< per target
};

/// Catalogue-style scores of a 2-D clustering against target points.
/// With no clusters every score is 0.
EvalReport evaluate(const SubPartition& clustering, const PointSet& points,
                    const PointSet& targets);

struct BalletStudyConfig {
  HistogramMixtureConfig model;
  std::size_t draws = 100;
  double nu = 0.9;
  AdaptiveDeltaConfig delta;
  LossParams loss;
  SearchConfig search;
  double alpha = 0.05;  ///< credible-ball level for the bounds
};

struct DbscanStudyConfig {
  std::optional<std::size_t> min_pts;        ///< defaults to ceil(log2 n)
  std::optional<std::size_t> tuned_min_pts;  ///< adds a second DBSCAN column
};

struct MethodScore {
  std::string method;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double exact_match = 0.0;
};

struct ReplicateRecord {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double delta = 0.0;
  double eps = 0.0;
  std::size_t min_pts = 0;
  double risk = 0.0;
  double radius = 0.0;
  std::vector<MethodScore> scores;
};

struct StudyTable {
  std::vector<std::string> methods;
  std::vector<MethodScore> mean;  ///< per method, averaged over replicates
  std::vector<ReplicateRecord> replicates;

  const MethodScore& score(const std::string& method) const;
  /// Rows sensitivity / specificity / exact_match, one column per method.
  std::string to_csv() const;
  std::string replicates_csv() const;
  std::string to_json() const;
};

inline const std::string kMethodDbscan = "dbscan";
inline const std::string kMethodDbscanTuned = "dbscan_tuned";
inline const std::string kMethodLower = "ballet_lower";
inline const std::string kMethodEstimate = "ballet_estimate";
inline const std::string kMethodUpper = "ballet_upper";
inline const std::string kMethodPlugin = "ballet_plugin";

/// Replicates of: generate a survey, fit the histogram mixture, resolve λ
/// from ν and δ from the k-NN distances, score the BALLET estimate, its
/// credible-ball bounds and the plugin estimate, and classic DBSCAN with
/// MinPts = k0 and Eps the (1 - ν) quantile of the k0-NN distances.
StudyTable run_simulation_study(std::size_t reps, const SkySurveySpec& spec,
                                const BalletStudyConfig& ballet,
                                const DbscanStudyConfig& dbscan, std::uint64_t seed);

/// The DBSCAN parameter map: Eps = (1 - ν) quantile of the distances to the
/// min_pts-th nearest data point, the point itself included.
double dbscan_eps_for_noise_fraction(const PointSet& points, std::size_t min_pts, double nu);

}  // namespace ballet
