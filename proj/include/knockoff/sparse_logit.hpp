#pragma once

#include <functional>
#include <string_view>

#include <Eigen/Dense>

#include "knockoff/datamodel.hpp"

namespace knockoff {

using DesignRef = Eigen::Ref<const Eigen::MatrixXd>;

/// L1-penalized logistic regression fit. Coefficients follow the design
/// column order; for an augmented design [X | X~] the first half are the
/// originals and the second half their knockoffs.
struct LogisticModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  bool converged = false;
  int iterations = 0;
  double final_objective = 0.0;
  double kkt_residual = 0.0;
};

/// How a configured C maps onto the objective's (1/C) |beta|_1 term.
///   mean: C is used as is.
///   sum:  C weights the summed loss (liblinear/sklearn convention), so the
///         objective sees n * C.
enum class PenaltyScale { mean, sum };

PenaltyScale parse_penalty_scale(std::string_view name);
std::string_view to_string(PenaltyScale scale);
double effective_c(double c, PenaltyScale scale, Eigen::Index n);

struct FitOptions {
  double c = 1.0;  ///< inverse penalty strength, penalty = (1/c) * |beta|_1
  int max_iter = 4000;
  double tol = 1e-7;  ///< KKT residual tolerance
  bool accelerate = true;
  /// Called once per iteration with (iteration, objective of the kept iterate).
  std::function<void(int, double)> on_iteration;
};

/// (1/n) sum_i log(1 + exp(-y_i (b0 + x_i^T beta))) + (1/c) |beta|_1 with
/// labels mapped 0 -> -1, 1 -> +1. Evaluated without overflow.
double objective(DesignRef design, const LabelVector& y, double intercept, const Eigen::VectorXd& beta, double c);

/// Gradient of the smooth part: element 0 is d/d intercept, then d/d beta.
Eigen::VectorXd smooth_gradient(DesignRef design, const LabelVector& y, double intercept,
                                const Eigen::VectorXd& beta);

/// Largest violation of the optimality conditions:
///   |g_0|, |g_j + sign(beta_j)/c| for beta_j != 0, max(0, |g_j| - 1/c) otherwise.
double kkt_residual(DesignRef design, const LabelVector& y, double intercept, const Eigen::VectorXd& beta,
                    double c);

/// Proximal gradient with backtracking (FISTA momentum with monotone
/// safeguard and function-value restart when accelerate is set). Stops when
/// the KKT residual drops to tol.
/// Throws DataError on single-class labels, size mismatch or non-finite design.
LogisticModel fit_logistic(DesignRef design, const LabelVector& y, const FitOptions& options);

/// sigma(b0 + x^T beta) per row, kept strictly inside (0, 1).
Eigen::VectorXd predict_proba(const LogisticModel& model, DesignRef design);

struct ClassifierMetrics {
  double accuracy = 0.0;
  double logloss = 0.0;
};

/// Accuracy with the rule proba >= 0.5 -> 1, log-loss with probabilities
/// clamped to [1e-15, 1 - 1e-15].
ClassifierMetrics evaluate(const LogisticModel& model, DesignRef design, const LabelVector& y);
ClassifierMetrics evaluate_probabilities(const Eigen::VectorXd& proba, const LabelVector& y);

}  // namespace knockoff
