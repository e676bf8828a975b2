#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ballet/levelset.hpp"
#include "ballet/risk.hpp"
#include "ballet/subpartition.hpp"

namespace ballet::io {

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Comma-separated points, one row each. Blank lines are skipped.
PointSet parse_points_csv(const std::string& text, bool header = false);
PointSet read_points_csv(const std::filesystem::path& path, bool header = false);
std::string points_to_csv(const PointSet& points);

/// Single-column densities aligned to the row order of the points.
std::vector<double> read_density_csv(const std::filesystem::path& path);

/// Binary ensemble: one JSON header line
///   {"format":"ballet-ensemble","version":1,"S":..,"n":..,"dtype":"float64-le"}
/// followed by S * n little-endian doubles, draw-major.
inline constexpr const char* kEnsembleFormat = "ballet-ensemble";
std::string ensemble_to_binary(const DensityDrawEnsemble& ensemble);
DensityDrawEnsemble parse_ensemble_binary(const std::string& bytes);
/// S rows of n comma-separated values.
std::string ensemble_to_csv(const DensityDrawEnsemble& ensemble);
DensityDrawEnsemble parse_ensemble_csv(const std::string& text);
/// Binary when the file starts with a JSON header, CSV otherwise.
DensityDrawEnsemble read_ensemble(const std::filesystem::path& path);
void write_ensemble(const std::filesystem::path& path, const DensityDrawEnsemble& ensemble);

/// {"n": .., "labels": [..]} with noise 0.
std::string partition_to_json(const SubPartition& c);
SubPartition partition_from_json(const std::string& text);
/// One label per line.
std::string partition_to_csv(const SubPartition& c);
SubPartition partition_from_csv(const std::string& text);
/// JSON or CSV, chosen by the first non-blank character.
SubPartition read_partition(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace ballet::io
