#include "knockoff/reducer.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "knockoff/errors.hpp"

namespace knockoff {

Eigen::VectorXd compute_energy(const FeatureMatrix& z) {
  return z.values().cwiseAbs().colwise().mean().transpose();
}

std::vector<Eigen::Index> top_k_positions(const Eigen::VectorXd& energy, const std::vector<LatentId>& ids,
                                          Eigen::Index k) {
  const Eigen::Index m = energy.size();
  if (static_cast<Eigen::Index>(ids.size()) != m) throw DataError("energy and column id lengths differ");
  if (k < 1 || k > m)
    throw ConfigError("top_k must be in [1, " + std::to_string(m) + "], got " + std::to_string(k));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  // equal energies: lower latent id first
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (energy[a] != energy[b]) return energy[a] > energy[b];
    return ids[static_cast<std::size_t>(a)] < ids[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

FeatureMatrix select_top_k(const FeatureMatrix& z, const Eigen::VectorXd& energy, Eigen::Index k) {
  if (energy.size() != z.cols())
    throw DataError("energy length " + std::to_string(energy.size()) + " != column count " +
                    std::to_string(z.cols()));
  const auto positions = top_k_positions(energy, z.column_ids(), k);
  Eigen::MatrixXd values(z.rows(), k);
  std::vector<LatentId> ids;
  ids.reserve(positions.size());
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto src = positions[static_cast<std::size_t>(c)];
    values.col(c) = z.values().col(src);
    ids.push_back(z.column_ids()[static_cast<std::size_t>(src)]);
  }
  return FeatureMatrix(std::move(values), std::move(ids));
}

}  // namespace knockoff
