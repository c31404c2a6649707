// knockoff-select: energy reduction, Gaussian knockoffs, L1 logistic
// importance and knockoff+ selection, plus the synthetic FDR study.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "knockoff/config.hpp"
#include "knockoff/errors.hpp"
#include "knockoff/format.hpp"
#include "knockoff/pipeline.hpp"
#include "knockoff/report.hpp"
#include "knockoff/simulator.hpp"

namespace fs = std::filesystem;
using namespace knockoff;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kNumerical = 4 };

// Flag values are kept as text and routed through the config setters so that
// flags and config files share one parser and one set of error messages.
struct Overrides {
  std::map<std::string, std::string> values;

  void add(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option(flag, values[key], help);
  }

  template <class Config, class Setter>
  void apply(Config& config, CLI::App* cmd, Setter set) const {
    std::vector<std::string> problems;
    for (const auto& [key, text] : values) {
      const auto* opt = cmd->get_option_no_throw("--" + flag_name(key));
      if (opt == nullptr || opt->count() == 0) continue;
      try {
        set(config, key, text);
      } catch (const ConfigError& e) {
        problems.push_back(e.what());
      }
    }
    if (!problems.empty()) {
      std::string msg = "invalid command-line values:";
      for (const auto& p : problems) msg += "\n  - " + p;
      throw ConfigError(msg);
    }
  }

  static std::string flag_name(std::string key) {
    for (auto& ch : key)
      if (ch == '_') ch = '-';
    return key;
  }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

nlohmann::ordered_json parse_json(const fs::path& path) {
  try {
    return nlohmann::ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

fs::path artifact_path(const fs::path& given) {
  return fs::is_directory(given) ? given / kArtifactFile : given;
}

void print_run_summary(const RunArtifact& a, const fs::path& out_dir) {
  const auto& s = a.summary;
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("n/a"); };
  std::cout << "features: " << a.n_used << " samples, " << a.n_input_columns << " latents, " << a.column_ids.size()
            << " kept\n"
            << "tau: " << (std::isfinite(a.tau) ? format_number(a.tau) : std::string("none")) << "\n"
            << "selected: " << a.selected_ids.size() << " (q = " << format_number(a.config.q) << ")\n"
            << "snr: " << opt(s.snr) << ", cohens_d: " << opt(s.cohens_d) << "\n"
            << "accuracy: " << format_number(a.accuracy) << ", logloss: " << format_number(a.logloss) << "\n"
            << "fit: " << (a.converged ? "converged" : "not converged") << " after " << a.iterations
            << " iterations\n"
            << "written to " << out_dir.string() << "\n";
}

int cmd_run(CLI::App* cmd, const std::string& config_path, const Overrides& overrides, const std::string& features,
            const std::string& labels, const std::string& out) {
  RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  overrides.apply(config, cmd, set_run_field);
  config.validate();
  const RunArtifact artifact = run_pipeline(config, features, labels);
  emit_report(artifact, out);
  print_run_summary(artifact, out);
  return kOk;
}

int cmd_report(const std::string& artifact_arg, const std::string& out) {
  const fs::path path = artifact_path(artifact_arg);
  RunArtifact artifact = artifact_from_json(parse_json(path));
  const fs::path timings = path.parent_path() / kTimingsFile;
  if (fs::exists(timings)) {
    const auto doc = parse_json(timings);
    for (const auto& t : doc.value("timings", nlohmann::ordered_json::array()))
      artifact.timings.push_back({t.at("stage").get<std::string>(), t.at("seconds").get<double>()});
  }
  for (const auto& file : emit_report(artifact, out)) std::cout << file.string() << "\n";
  return kOk;
}

int cmd_validate(const std::string& artifact_arg) {
  const fs::path path = artifact_path(artifact_arg);
  const auto problems = validate_artifact(parse_json(path));
  if (problems.empty()) {
    std::cout << path.string() << ": valid\n";
    return kOk;
  }
  std::cout << path.string() << ": " << problems.size() << " problem(s)\n";
  for (const auto& p : problems) std::cout << "  - " << p << "\n";
  return kData;
}

int cmd_simulate(CLI::App* cmd, const std::string& config_path, const Overrides& overrides, const std::string& out) {
  SimConfig config = load_sim_config(config_path);
  overrides.apply(config, cmd, set_sim_field);
  config.validate();
  const StudyResult result =
      run_study(config.design, config.q, static_cast<std::size_t>(config.replicates),
                static_cast<std::size_t>(config.workers), config.params);
  const fs::path csv(out);
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  write_file(csv, study_csv(result));
  fs::path summary_path = csv;
  summary_path.replace_extension(".summary.txt");
  const std::string summary = study_summary(result);
  write_file(summary_path, summary);
  std::cout << summary;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knockoff+ feature selection with finite-sample FDR control"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::string config_path, features, labels, out, artifact;

  auto* run = app.add_subcommand("run", "Run the selection pipeline and write the artifact");
  run->add_option("--config", config_path, "flat key: value config file");
  run->add_option("--features", features, "feature matrix")->required();
  run->add_option("--labels", labels, "label file, one 0/1 per line")->required();
  run->add_option("--out", out, "output directory")->required();
  Overrides run_overrides;
  run_overrides.add(run, "--q", "q", "target FDR");
  run_overrides.add(run, "--top-k", "top_k", "latents kept by energy");
  run_overrides.add(run, "--ridge", "ridge", "covariance ridge");
  run_overrides.add(run, "--s-max", "s_max", "cap on the equi-correlation s");
  run_overrides.add(run, "--c", "c", "inverse L1 penalty");
  run_overrides.add(run, "--max-iter", "max_iter", "solver iteration cap");
  run_overrides.add(run, "--seed", "seed", "knockoff sampling seed");
  run_overrides.add(run, "--format", "format", "csv or raw-f32");

  auto* report = app.add_subcommand("report", "Re-emit plot data and tables from an artifact");
  report->add_option("--artifact", artifact, "artifact.json or the directory holding it")->required();
  report->add_option("--out", out, "output directory")->required();

  auto* validate = app.add_subcommand("validate", "Check an artifact's schema and internal consistency");
  validate->add_option("artifact", artifact, "artifact.json or the directory holding it")->required();

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo FDR study on synthetic data");
  simulate->add_option("--config", config_path, "flat key: value study config")->required();
  simulate->add_option("--out", out, "study csv; the summary goes next to it")->required();
  Overrides sim_overrides;
  sim_overrides.add(simulate, "--q", "q", "target FDR");
  sim_overrides.add(simulate, "--ridge", "ridge", "covariance ridge");
  sim_overrides.add(simulate, "--s-max", "s_max", "cap on the equi-correlation s");
  sim_overrides.add(simulate, "--c", "c", "inverse L1 penalty");
  sim_overrides.add(simulate, "--max-iter", "max_iter", "solver iteration cap");
  sim_overrides.add(simulate, "--seed", "seed", "base seed");
  sim_overrides.add(simulate, "--replicates", "replicates", "number of replicates");
  sim_overrides.add(simulate, "--workers", "workers", "worker threads");

  for (auto* sub : {run, report, validate, simulate}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  spdlog::set_default_logger(spdlog::stderr_color_st("knockoff"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run) return cmd_run(run, config_path, run_overrides, features, labels, out);
    if (*report) return cmd_report(artifact, out);
    if (*validate) return cmd_validate(artifact);
    if (*simulate) return cmd_simulate(simulate, config_path, sim_overrides, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
