#include "knockoff/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>

#include <yaml-cpp/yaml.h>

#include "knockoff/errors.hpp"
#include "knockoff/format.hpp"

namespace knockoff {

namespace {

template <class T>
T parse_scalar(const std::string& key, const std::string& text) {
  T out{};
  std::string_view view(text);
  if (!view.empty() && view.front() == '+') view.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(view.data(), view.data() + view.size(), out);
  if (ec != std::errc() || ptr != view.data() + view.size() || view.empty())
    throw ConfigError(key + ": cannot parse '" + text + "'");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) throw ConfigError(key + ": value must be finite");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::string join_problems(const std::string& title, const std::vector<std::string>& problems) {
  std::string msg = title;
  for (const auto& p : problems) msg += "\n  - " + p;
  return msg;
}

template <class Config>
Config load_flat(const std::filesystem::path& path,
                 const std::function<void(Config&, const std::string&, const std::string&)>& set) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot open config file " + path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  Config config;
  if (root.IsNull()) return config;
  if (!root.IsMap()) throw ConfigError("config file " + path.string() + " must contain key: value pairs");

  std::vector<std::string> problems;
  for (const auto& entry : root) {
    const auto key = entry.first.as<std::string>();
    if (!entry.second.IsScalar()) {
      problems.push_back(key + ": expected a scalar value");
      continue;
    }
    try {
      set(config, key, entry.second.as<std::string>());
    } catch (const ConfigError& e) {
      problems.push_back(e.what());
    }
  }
  const auto invalid = config.problems();
  problems.insert(problems.end(), invalid.begin(), invalid.end());
  if (!problems.empty()) throw ConfigError(join_problems("invalid config " + path.string() + ":", problems));
  return config;
}

}  // namespace

std::vector<std::string> RunConfig::problems() const {
  std::vector<std::string> out;
  if (n_samples < 1) out.push_back("n_samples must be at least 1");
  if (top_k < 1) out.push_back("top_k must be at least 1");
  if (top_k > n_samples) out.push_back("top_k must not exceed n_samples");
  if (!(ridge >= 0.0)) out.push_back("ridge must be non-negative");
  if (!(s_max > 0.0 && s_max < 1.0)) out.push_back("s_max must lie in (0, 1)");
  if (!(c_inverse_penalty > 0.0)) out.push_back("c must be positive");
  if (max_iter < 0) out.push_back("max_iter must be non-negative");
  if (!(tol > 0.0)) out.push_back("tol must be positive");
  if (!(q > 0.0 && q < 1.0)) out.push_back("q must lie in (0, 1)");
  if (top_n < 0) out.push_back("top_n must be non-negative");
  if (bottom_n < 0) out.push_back("bottom_n must be non-negative");
  return out;
}

void RunConfig::validate() const {
  const auto issues = problems();
  if (!issues.empty()) throw ConfigError(join_problems("invalid run config:", issues));
}

std::vector<std::string> SimConfig::problems() const {
  std::vector<std::string> out = design.problems();
  if (!(q > 0.0 && q < 1.0)) out.push_back("q must lie in (0, 1)");
  if (replicates < 1) out.push_back("replicates must be at least 1");
  if (workers < 1) out.push_back("workers must be at least 1");
  if (!(params.ridge >= 0.0)) out.push_back("ridge must be non-negative");
  if (!(params.s_max > 0.0 && params.s_max < 1.0)) out.push_back("s_max must lie in (0, 1)");
  if (!(params.c > 0.0)) out.push_back("c must be positive");
  if (params.max_iter < 0) out.push_back("max_iter must be non-negative");
  if (!(params.tol > 0.0)) out.push_back("tol must be positive");
  return out;
}

void SimConfig::validate() const {
  const auto issues = problems();
  if (!issues.empty()) throw ConfigError(join_problems("invalid simulation config:", issues));
}

void set_run_field(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "n_samples") c.n_samples = parse_scalar<std::int64_t>(key, value);
  else if (key == "top_k") c.top_k = parse_scalar<std::int64_t>(key, value);
  else if (key == "ridge") c.ridge = parse_scalar<double>(key, value);
  else if (key == "s_max") c.s_max = parse_scalar<double>(key, value);
  else if (key == "c" || key == "c_inverse_penalty") c.c_inverse_penalty = parse_scalar<double>(key, value);
  else if (key == "penalty_scale") c.penalty_scale = parse_penalty_scale(value);
  else if (key == "max_iter") c.max_iter = parse_scalar<std::int64_t>(key, value);
  else if (key == "tol") c.tol = parse_scalar<double>(key, value);
  else if (key == "q") c.q = parse_scalar<double>(key, value);
  else if (key == "seed") c.seed = parse_scalar<std::uint64_t>(key, value);
  else if (key == "standardize") c.standardize = parse_bool(key, value);
  else if (key == "format") c.format = parse_matrix_format(value);
  else if (key == "top_n") c.top_n = parse_scalar<std::int64_t>(key, value);
  else if (key == "bottom_n") c.bottom_n = parse_scalar<std::int64_t>(key, value);
  else throw ConfigError("unknown key '" + key + "'");
}

void set_sim_field(SimConfig& c, const std::string& key, const std::string& value) {
  auto& d = c.design;
  auto& p = c.params;
  if (key == "n") d.n = parse_scalar<std::int64_t>(key, value);
  else if (key == "p") d.p = parse_scalar<std::int64_t>(key, value);
  else if (key == "covariance") d.covariance = parse_covariance_family(value);
  else if (key == "rho") d.rho = parse_scalar<double>(key, value);
  else if (key == "n_nonnull") d.n_nonnull = parse_scalar<std::int64_t>(key, value);
  else if (key == "amplitude") d.amplitude = parse_scalar<double>(key, value);
  else if (key == "sign_mix") d.sign_mix = parse_scalar<double>(key, value);
  else if (key == "seed") d.seed = parse_scalar<std::uint64_t>(key, value);
  else if (key == "q") c.q = parse_scalar<double>(key, value);
  else if (key == "replicates") c.replicates = parse_scalar<std::int64_t>(key, value);
  else if (key == "workers") c.workers = parse_scalar<std::int64_t>(key, value);
  else if (key == "ridge") p.ridge = parse_scalar<double>(key, value);
  else if (key == "s_max") p.s_max = parse_scalar<double>(key, value);
  else if (key == "c" || key == "c_inverse_penalty") p.c = parse_scalar<double>(key, value);
  else if (key == "penalty_scale") p.penalty_scale = parse_penalty_scale(value);
  else if (key == "max_iter") p.max_iter = static_cast<int>(parse_scalar<std::int64_t>(key, value));
  else if (key == "tol") p.tol = parse_scalar<double>(key, value);
  else throw ConfigError("unknown key '" + key + "'");
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return load_flat<RunConfig>(path, set_run_field);
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  return load_flat<SimConfig>(path, set_sim_field);
}

std::vector<std::pair<std::string, std::string>> run_config_fields(const RunConfig& c) {
  return {
      {"n_samples", std::to_string(c.n_samples)},
      {"top_k", std::to_string(c.top_k)},
      {"ridge", format_number(c.ridge)},
      {"s_max", format_number(c.s_max)},
      {"c", format_number(c.c_inverse_penalty)},
      {"penalty_scale", std::string(to_string(c.penalty_scale))},
      {"max_iter", std::to_string(c.max_iter)},
      {"tol", format_number(c.tol)},
      {"q", format_number(c.q)},
      {"seed", std::to_string(c.seed)},
      {"standardize", c.standardize ? "true" : "false"},
      {"format", std::string(to_string(c.format))},
      {"top_n", std::to_string(c.top_n)},
      {"bottom_n", std::to_string(c.bottom_n)},
  };
}

std::vector<std::pair<std::string, std::string>> sim_config_fields(const SimConfig& c) {
  return {
      {"n", std::to_string(c.design.n)},
      {"p", std::to_string(c.design.p)},
      {"covariance", to_string(c.design.covariance)},
      {"rho", format_number(c.design.rho)},
      {"n_nonnull", std::to_string(c.design.n_nonnull)},
      {"amplitude", format_number(c.design.amplitude)},
      {"sign_mix", format_number(c.design.sign_mix)},
      {"seed", std::to_string(c.design.seed)},
      {"q", format_number(c.q)},
      {"replicates", std::to_string(c.replicates)},
      {"workers", std::to_string(c.workers)},
      {"ridge", format_number(c.params.ridge)},
      {"s_max", format_number(c.params.s_max)},
      {"c", format_number(c.params.c)},
      {"penalty_scale", std::string(to_string(c.params.penalty_scale))},
      {"max_iter", std::to_string(c.params.max_iter)},
      {"tol", format_number(c.params.tol)},
  };
}

}  // namespace knockoff
