#pragma once

#include <Eigen/Dense>

#include "knockoff/datamodel.hpp"

namespace knockoff {

/// Mean absolute activation per column, e_j = (1/n) sum_i |z_ij|.
Eigen::VectorXd compute_energy(const FeatureMatrix& z);

/// Keeps the k columns with the largest energy, ordered by descending energy.
/// Ties go to the lower latent id. column_ids follow the columns.
/// Throws ConfigError unless 1 <= k <= z.cols().
FeatureMatrix select_top_k(const FeatureMatrix& z, const Eigen::VectorXd& energy, Eigen::Index k);

/// Column positions picked by select_top_k, in output order.
std::vector<Eigen::Index> top_k_positions(const Eigen::VectorXd& energy, const std::vector<LatentId>& ids,
                                          Eigen::Index k);

}  // namespace knockoff
