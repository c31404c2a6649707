#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "knockoff/datamodel.hpp"
#include "knockoff/sparse_logit.hpp"

namespace knockoff {

struct KnockoffStatistics {
  Eigen::VectorXd w;
  std::vector<LatentId> column_ids;
};

struct SummaryMetrics {
  Eigen::Index n_selected = 0;
  std::optional<double> mean_w_selected;
  std::optional<double> sd_w_selected;
  std::optional<double> mean_w_rejected;
  std::optional<double> mean_abs_w_rejected;
  std::optional<double> snr;
  std::optional<double> cohens_d;
  double positive_fraction = 0.0;
  double w_min = 0.0;
  double w_max = 0.0;
  double w_mean = 0.0;
  double w_median = 0.0;
};

struct SelectionResult {
  double tau = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> selected;  ///< positions into w, ascending
  double q = 0.0;
  SummaryMetrics summary;

  bool tau_finite() const noexcept { return tau != std::numeric_limits<double>::infinity(); }
};

/// w_j = |beta_j| - |beta_{p+j}| for an augmented fit of width 2p.
/// Throws DataError when the coefficient count is odd or ids do not match p.
KnockoffStatistics knockoff_statistics(const LogisticModel& model, const std::vector<LatentId>& column_ids);
Eigen::VectorXd knockoff_statistics(const Eigen::VectorXd& coefficients);

/// Smallest t in {|w_j| : |w_j| > 0} with
///   (1 + #{w_j <= -t}) / max(1, #{w_j >= t}) <= q,
/// or +infinity when no candidate qualifies.
double knockoff_plus_threshold(std::span<const double> w, double q);

/// Left-hand side of the knockoff+ inequality at threshold t.
double knockoff_plus_ratio(std::span<const double> w, double t);

/// Threshold, selection {j : w_j >= tau} and summary metrics.
SelectionResult select(const KnockoffStatistics& stats, double q);

SummaryMetrics summarize(std::span<const double> w, double tau);

/// (mean(a) - mean(b)) / pooled sample SD. Empty when either group has fewer
/// than two members or the pooled SD is zero.
std::optional<double> cohens_d(std::span<const double> selected, std::span<const double> rejected);

/// mean W of the selected set over mean |W| of the rejected set.
std::optional<double> signal_to_noise(std::optional<double> mean_w_selected,
                                      std::optional<double> mean_abs_w_rejected);

}  // namespace knockoff
