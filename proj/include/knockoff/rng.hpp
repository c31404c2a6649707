#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace knockoff {

/// Seedable generator with a fully specified output sequence.
///
/// Bits come from std::mt19937_64, whose sequence the standard pins down for
/// every seed. Uniforms and normals are derived here rather than through the
/// <random> distributions, which are implementation-defined:
///   uniform() = (bits >> 11) * 2^-53                      in [0, 1)
///   normal()  = Box-Muller on u1 = ((bits >> 11) + 1) * 2^-53 in (0, 1] and
///               u2 = uniform(); returns r*cos(2*pi*u2) then r*sin(2*pi*u2)
///               with r = sqrt(-2 ln u1).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  /// Uniform integer in [0, bound) by rejection sampling.
  std::uint64_t below(std::uint64_t bound);

  /// rows x cols standard normal draws, filled row by row.
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Independent stream seed derived from (base, stream) with splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace knockoff
