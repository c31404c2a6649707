#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "knockoff/datamodel.hpp"
#include "knockoff/simulator.hpp"
#include "knockoff/sparse_logit.hpp"

namespace knockoff {

/// Pipeline configuration. Defaults are the reference experiment: 4096
/// samples, top 512 latents, ridge 0.002, s_max 0.95, C = 1, 4000
/// iterations, q = 0.1, seed 2025.
struct RunConfig {
  std::int64_t n_samples = 4096;  ///< leading rows used; fewer rows in the file are used as is
  std::int64_t top_k = 512;
  double ridge = 0.002;
  double s_max = 0.95;
  double c_inverse_penalty = 1.0;
  PenaltyScale penalty_scale = PenaltyScale::mean;
  std::int64_t max_iter = 4000;
  double tol = 1e-7;
  double q = 0.1;
  std::uint64_t seed = 2025;
  bool standardize = false;
  MatrixFormat format = MatrixFormat::csv;
  std::int64_t top_n = 10;
  std::int64_t bottom_n = 5;

  std::vector<std::string> problems() const;
  void validate() const;  ///< ConfigError listing every problem
};

struct SimConfig {
  SimDesign design;
  PipelineParams params;
  double q = 0.1;
  std::int64_t replicates = 100;
  std::int64_t workers = 1;

  std::vector<std::string> problems() const;
  void validate() const;
};

/// Reads a flat "key: value" file. Unknown keys and malformed values are
/// collected and reported together as one ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
SimConfig load_sim_config(const std::filesystem::path& path);

/// Applies one "key: value" pair; the same keys as the file format.
void set_run_field(RunConfig& config, const std::string& key, const std::string& value);
void set_sim_field(SimConfig& config, const std::string& key, const std::string& value);

/// key/value pairs in a fixed order, values formatted for round-tripping.
std::vector<std::pair<std::string, std::string>> run_config_fields(const RunConfig& config);
std::vector<std::pair<std::string, std::string>> sim_config_fields(const SimConfig& config);

}  // namespace knockoff
