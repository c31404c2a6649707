#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "knockoff/pipeline.hpp"

namespace knockoff {

/// File names written by emit_report.
inline constexpr const char* kArtifactFile = "artifact.json";
inline constexpr const char* kTimingsFile = "timings.json";
inline constexpr const char* kHistogramFile = "histogram.csv";
inline constexpr const char* kWaterfallFile = "waterfall.csv";
inline constexpr const char* kCdfFile = "cdf.csv";
inline constexpr const char* kTopFile = "top_features.csv";
inline constexpr const char* kBottomFile = "bottom_features.csv";

inline constexpr int kHistogramBins = 50;

/// Artifact document. Timings are excluded so that equal runs serialize to
/// identical bytes; see timings_to_json.
nlohmann::ordered_json artifact_to_json(const RunArtifact& artifact);
nlohmann::ordered_json timings_to_json(const RunArtifact& artifact);

/// Inverse of artifact_to_json. Throws DataError on schema violations.
RunArtifact artifact_from_json(const nlohmann::ordered_json& doc);

/// Schema and internal-consistency problems of an artifact document: required
/// fields and types, aligned per-feature arrays, activation rates in [0, 1],
/// selected ids drawn from column_ids, n_selected matching, the selected set
/// reconstructed from w and tau, tau equal to the recomputed knockoff+
/// threshold, and the knockoff+ inequality at a finite tau.
std::vector<std::string> validate_artifact(const nlohmann::ordered_json& doc);

struct FeatureRow {
  int rank = 0;
  LatentId latent = 0;
  double w = 0.0;
  double activation_rate = 0.0;
  double energy = 0.0;
  bool selected = false;
};

/// Highest w first; ties go to the lower latent id.
std::vector<FeatureRow> top_features(const RunArtifact& artifact, std::size_t count);
/// Most negative w first; ties go to the lower latent id.
std::vector<FeatureRow> bottom_features(const RunArtifact& artifact, std::size_t count);

/// bin_left,bin_right,count over kHistogramBins equal bins spanning
/// [min w, max w] (widened by 0.5 on each side when all w are equal).
std::string histogram_csv(const std::vector<double>& w);
/// rank,latent,w,selected sorted by descending w.
std::string waterfall_csv(const std::vector<double>& w, const std::vector<LatentId>& ids, double tau);
/// w,fraction sorted ascending; the last fraction is exactly 1.
std::string cdf_csv(const std::vector<double>& w);

/// Writes the artifact, timings, plot data and tables into out_dir (created
/// if needed). Files already written are removed if a later write fails.
std::vector<std::filesystem::path> emit_report(const RunArtifact& artifact, const std::filesystem::path& out_dir);

}  // namespace knockoff
