#include "knockoff/sampler.hpp"

#include <algorithm>
#include <string>

#include <spdlog/spdlog.h>

#include "knockoff/errors.hpp"
#include "knockoff/rng.hpp"

namespace knockoff {

std::pair<Eigen::VectorXd, Eigen::MatrixXd> estimate_covariance(const FeatureMatrix& x, double ridge) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw DataError("covariance estimation needs at least 2 rows, got " + std::to_string(n));
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be non-negative");

  Eigen::VectorXd mean = x.values().colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.values().rowwise() - mean.transpose();
  Eigen::MatrixXd sigma = (centered.transpose() * centered) / static_cast<double>(n - 1);
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  sigma.diagonal().array() += ridge;
  return {std::move(mean), std::move(sigma)};
}

double compute_s(const Eigen::MatrixXd& sigma, double s_max) {
  if (!(s_max > 0.0 && s_max < 1.0)) throw ConfigError("s_max must lie in (0, 1)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of covariance failed");
  const double lambda_min = eig.eigenvalues().minCoeff();
  const double lambda_max = eig.eigenvalues().maxCoeff();
  if (!(lambda_min > kSingularRelTol * std::max(1.0, lambda_max)))
    throw NumericalError("covariance is not positive definite (lambda_min = " + std::to_string(lambda_min) + ")");
  return std::min(2.0 * lambda_min, s_max);
}

RepairedFactor repair_and_factor(const Eigen::MatrixXd& m) {
  RepairedFactor out;
  out.matrix = 0.5 * (m + m.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of knockoff covariance failed");
  Eigen::VectorXd values = eig.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < kRepairEigenFloor) {
      values[i] = kRepairEigenFloor;
      ++out.clipped;
    }
  }
  if (out.clipped > 0) {
    const auto& vectors = eig.eigenvectors();
    out.matrix = vectors * values.asDiagonal() * vectors.transpose();
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  }

  Eigen::LLT<Eigen::MatrixXd> llt(out.matrix);
  double jitter = kRepairJitterStart;
  while (llt.info() != Eigen::Success) {
    if (jitter > kRepairJitterCap)
      throw NumericalError("knockoff covariance is not positive definite after jitter up to " +
                           std::to_string(kRepairJitterCap));
    Eigen::MatrixXd jittered = out.matrix;
    jittered.diagonal().array() += jitter;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) {
      out.matrix = std::move(jittered);
      out.jitter = jitter;
    }
    jitter *= 2.0;
  }
  out.lower = llt.matrixL();
  return out;
}

KnockoffModel fit_knockoff_model(const FeatureMatrix& x, double ridge, double s_max) {
  const Eigen::Index p = x.cols();
  if (x.rows() <= p)
    spdlog::warn("knockoff model: n = {} <= p = {}; covariance estimate is unstable", x.rows(), p);

  KnockoffModel model;
  std::tie(model.mean, model.sigma) = estimate_covariance(x, ridge);
  model.s = compute_s(model.sigma, s_max);

  Eigen::LLT<Eigen::MatrixXd> sigma_llt(model.sigma);
  if (sigma_llt.info() != Eigen::Success) throw NumericalError("covariance is not invertible");

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p, p);
  // sigma^{-1} S with S = sI
  Eigen::MatrixXd precision_s = sigma_llt.solve(model.s * identity);
  precision_s = 0.5 * (precision_s + precision_s.transpose()).eval();
  model.mean_multiplier = identity - precision_s;

  const Eigen::MatrixXd raw_cov = 2.0 * model.s * identity - model.s * precision_s;
  auto repaired = repair_and_factor(raw_cov);
  model.knockoff_cov = std::move(repaired.matrix);
  model.chol_factor = std::move(repaired.lower);
  model.jitter = repaired.jitter;
  model.clipped_eigenvalues = repaired.clipped;
  return model;
}

KnockoffPair sample_knockoffs(const FeatureMatrix& x, const KnockoffModel& model, std::uint64_t seed) {
  if (x.cols() != model.dim())
    throw DataError("knockoff sampling: matrix has " + std::to_string(x.cols()) + " columns, model has " +
                    std::to_string(model.dim()));
  Rng rng(seed);
  const Eigen::MatrixXd noise = rng.normal_matrix(x.rows(), x.cols());
  const Eigen::MatrixXd centered = x.values().rowwise() - model.mean.transpose();
  Eigen::MatrixXd knock = centered * model.mean_multiplier + noise * model.chol_factor.transpose();
  knock.rowwise() += model.mean.transpose();
  return KnockoffPair{x, FeatureMatrix(std::move(knock), x.column_ids())};
}

}  // namespace knockoff
