#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "knockoff/datamodel.hpp"
#include "knockoff/sparse_logit.hpp"

namespace knockoff {

enum class CovarianceFamily { identity, equicorrelated, ar1 };

CovarianceFamily parse_covariance_family(const std::string& name);
std::string to_string(CovarianceFamily family);

/// Synthetic logistic design with a known support.
struct SimDesign {
  Eigen::Index n = 1000;
  Eigen::Index p = 200;
  CovarianceFamily covariance = CovarianceFamily::identity;
  double rho = 0.0;
  Eigen::Index n_nonnull = 30;
  double amplitude = 2.0;  ///< |beta*_j| on the support, log-odds scale
  double sign_mix = 0.5;   ///< fraction of negative coefficients on the support
  std::uint64_t seed = 2025;

  /// All violated constraints, empty when valid.
  std::vector<std::string> problems() const;
  /// Throws ConfigError listing every problem.
  void validate() const;
};

/// Knockoff and fit settings used inside each replicate.
struct PipelineParams {
  double ridge = 0.002;
  double s_max = 0.95;
  double c = 1.0;
  PenaltyScale penalty_scale = PenaltyScale::mean;
  int max_iter = 4000;
  double tol = 1e-7;
};

struct SimData {
  FeatureMatrix x;
  LabelVector y;
  Eigen::VectorXd beta;                 ///< true coefficients
  std::vector<Eigen::Index> support;    ///< {j : beta_j != 0}, ascending
};

/// Population covariance of the design family.
Eigen::MatrixXd design_covariance(const SimDesign& d);

/// X rows i.i.d. N(0, Sigma); support of size n_nonnull drawn uniformly with
/// round(sign_mix * n_nonnull) negative signs; y_i ~ Bernoulli(sigmoid(x_i^T beta)).
/// Deterministic given d.seed.
SimData generate_design(const SimDesign& d);

struct SimOutcome {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  double fdp = 0.0;
  double power = 0.0;
  Eigen::Index n_selected = 0;
  double tau = 0.0;
  bool converged = false;
};

/// FDP and power of a selection against a known support.
/// fdp = |S & nulls| / max(1, |S|); power = |S & support| / |support| (0 when
/// the support is empty).
std::pair<double, double> fdp_and_power(const std::vector<Eigen::Index>& selected,
                                        const std::vector<Eigen::Index>& support);

/// One end-to-end run: design, knockoffs, augmented fit, knockoff+ selection.
SimOutcome run_replicate(const SimDesign& d, double q, const PipelineParams& params);

struct StudyResult {
  double q = 0.0;
  double mean_fdp = 0.0;
  double fdp_se = 0.0;
  std::optional<double> fdp_ci_halfwidth;  ///< 1.96 * SE, empty for one replicate
  double mean_power = 0.0;
  double mean_selected = 0.0;
  bool fdr_controlled = false;  ///< mean_fdp <= q + 2 * SE
  std::vector<SimOutcome> replicates;
};

/// Replicate r uses seed d.seed + r. Replicates run on up to worker_count
/// threads; outcomes do not depend on worker_count.
StudyResult run_study(const SimDesign& d, double q, std::size_t replicates, std::size_t worker_count,
                      const PipelineParams& params);

/// csv columns: replicate,seed,tau,n_selected,fdp,power
std::string study_csv(const StudyResult& result);
std::string study_summary(const StudyResult& result);

}  // namespace knockoff
