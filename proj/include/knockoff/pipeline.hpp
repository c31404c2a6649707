#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "knockoff/config.hpp"
#include "knockoff/datamodel.hpp"
#include "knockoff/filter.hpp"

namespace knockoff {

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// Everything a run produces. Per-feature vectors are aligned with
/// column_ids, which hold the reduced latents in descending-energy order.
struct RunArtifact {
  RunConfig config;
  Eigen::Index n_used = 0;        ///< rows that entered the fit
  Eigen::Index n_input_rows = 0;
  Eigen::Index n_input_columns = 0;
  int eigen_threads = 1;

  std::vector<LatentId> column_ids;
  std::vector<double> w;
  std::vector<double> energy;
  std::vector<double> activation_rate;

  double tau = 0.0;
  std::vector<LatentId> selected_ids;
  SummaryMetrics summary;

  double accuracy = 0.0;
  double logloss = 0.0;

  double knockoff_s = 0.0;
  double knockoff_jitter = 0.0;
  Eigen::Index knockoff_clipped = 0;

  double intercept = 0.0;
  bool converged = false;
  int iterations = 0;
  double final_objective = 0.0;
  double kkt_residual = 0.0;

  std::vector<StageTiming> timings;
};

/// reduce -> knockoffs -> augmented L1 logistic fit -> knockoff+ selection.
/// Stage failures are rethrown with the stage name prefixed, keeping the
/// error type (ConfigError / DataError / NumericalError).
RunArtifact run_pipeline(const RunConfig& config, const FeatureMatrix& features, const LabelVector& labels);

/// Loads the inputs (format from config) and runs the pipeline.
RunArtifact run_pipeline(const RunConfig& config, const std::filesystem::path& features_path,
                         const std::filesystem::path& labels_path);

/// Fraction of rows with activation > 0, per column.
Eigen::VectorXd activation_rate(const FeatureMatrix& x);

/// Divides every column by its sample standard deviation (columns with zero
/// spread are left as is).
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& m);

}  // namespace knockoff
