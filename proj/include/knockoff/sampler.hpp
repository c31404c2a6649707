#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "knockoff/datamodel.hpp"

namespace knockoff {

/// Fitted equi-correlated Gaussian knockoff sampler (S = s I).
struct KnockoffModel {
  Eigen::VectorXd mean;             ///< column means of the training matrix
  Eigen::MatrixXd sigma;            ///< sample covariance + ridge * I
  double s = 0.0;                   ///< equi-correlation scalar
  Eigen::MatrixXd mean_multiplier;  ///< I - sigma^{-1} s
  Eigen::MatrixXd knockoff_cov;     ///< repaired 2sI - s^2 sigma^{-1}
  Eigen::MatrixXd chol_factor;      ///< lower triangular, L L^T = knockoff_cov
  double jitter = 0.0;              ///< diagonal jitter the repair had to add
  Eigen::Index clipped_eigenvalues = 0;

  Eigen::Index dim() const noexcept { return mean.size(); }
};

struct KnockoffPair {
  FeatureMatrix original;
  FeatureMatrix knockoff;
};

/// Column means and sigma = (1/(n-1)) Xc^T Xc + ridge I.
/// Throws DataError when n < 2 and ConfigError when ridge < 0.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> estimate_covariance(const FeatureMatrix& x, double ridge);

/// s = min(2 lambda_min(sigma), s_max). Throws NumericalError when sigma is
/// not positive definite.
double compute_s(const Eigen::MatrixXd& sigma, double s_max);

/// Smallest eigenvalue below which a covariance counts as singular, relative
/// to its largest eigenvalue.
inline constexpr double kSingularRelTol = 1e-12;

/// Eigenvalue floor and jitter schedule of the positive-definiteness repair.
inline constexpr double kRepairEigenFloor = 1e-10;
inline constexpr double kRepairJitterStart = 1e-10;
inline constexpr double kRepairJitterCap = 1e-6;

/// Symmetrizes, clips eigenvalues below kRepairEigenFloor, then factors.
/// If the factorization still fails, adds kRepairJitterStart * I, doubling up
/// to kRepairJitterCap before giving up with NumericalError. Returns the
/// repaired matrix and its lower Cholesky factor.
struct RepairedFactor {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd lower;
  double jitter = 0.0;
  Eigen::Index clipped = 0;
};
RepairedFactor repair_and_factor(const Eigen::MatrixXd& m);

/// Estimates the covariance and precomputes everything sample_knockoffs needs.
/// Logs a warning when n <= p.
KnockoffModel fit_knockoff_model(const FeatureMatrix& x, double ridge, double s_max);

/// knockoff = (x - mean) * mean_multiplier + U * chol_factor^T + mean, with U
/// drawn row by row from Rng(seed). Knockoff columns carry the original ids.
KnockoffPair sample_knockoffs(const FeatureMatrix& x, const KnockoffModel& model, std::uint64_t seed);

}  // namespace knockoff
