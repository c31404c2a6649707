#include "knockoff/pipeline.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "knockoff/errors.hpp"
#include "knockoff/reducer.hpp"
#include "knockoff/sampler.hpp"
#include "knockoff/sparse_logit.hpp"

namespace knockoff {

namespace {

template <class F>
auto run_stage(const char* name, std::vector<StageTiming>& timings, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    timings.push_back({name, elapsed.count()});
    spdlog::info("stage {} done in {:.3f}s", name, elapsed.count());
  };
  try {
    auto result = body();
    record();
    return result;
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("stage ") + name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string("stage ") + name + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("stage ") + name + ": " + e.what());
  }
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

Eigen::VectorXd activation_rate(const FeatureMatrix& x) {
  return (x.values().array() > 0.0).cast<double>().colwise().mean().transpose();
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  if (m.rows() < 2) return out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double mean = m.col(j).mean();
    const double sd = std::sqrt((m.col(j).array() - mean).square().sum() / static_cast<double>(m.rows() - 1));
    if (sd > 0.0) out.col(j) /= sd;
  }
  return out;
}

RunArtifact run_pipeline(const RunConfig& config, const FeatureMatrix& features, const LabelVector& labels) {
  config.validate();
  try {
    check_aligned(features, labels);
  } catch (const DataError& e) {
    throw DataError(std::string("stage load: ") + e.what());
  }

  RunArtifact art;
  art.config = config;
  art.n_input_rows = features.rows();
  art.n_input_columns = features.cols();
  art.eigen_threads = Eigen::nbThreads();

  // leading rows only
  const Eigen::Index n = std::min<Eigen::Index>(features.rows(), config.n_samples);
  if (n < features.rows())
    spdlog::info("using the first {} of {} rows", n, features.rows());
  else if (n < config.n_samples)
    spdlog::warn("input has {} rows, fewer than n_samples = {}", n, config.n_samples);
  art.n_used = n;

  const FeatureMatrix z(features.values().topRows(n), features.column_ids());
  const LabelVector y(std::vector<int>(labels.values().begin(), labels.values().begin() + n));
  if (!y.has_both_classes()) throw DataError("stage load: labels contain a single class");
  if (config.top_k > n)
    throw ConfigError("stage reduce: top_k = " + std::to_string(config.top_k) + " exceeds the " +
                      std::to_string(n) + " samples used");

  const auto reduced = run_stage("reduce", art.timings, [&] {
    const Eigen::VectorXd energy = compute_energy(z);
    const auto positions = top_k_positions(energy, z.column_ids(), config.top_k);
    Eigen::VectorXd kept(config.top_k);
    for (Eigen::Index c = 0; c < config.top_k; ++c) kept[c] = energy[positions[static_cast<std::size_t>(c)]];
    return std::make_pair(select_top_k(z, energy, config.top_k), kept);
  });
  const FeatureMatrix& x = reduced.first;
  art.column_ids = x.column_ids();
  art.energy = to_std(reduced.second);
  art.activation_rate = to_std(activation_rate(x));

  const auto pair = run_stage("knockoffs", art.timings, [&] {
    const KnockoffModel model = fit_knockoff_model(x, config.ridge, config.s_max);
    art.knockoff_s = model.s;
    art.knockoff_jitter = model.jitter;
    art.knockoff_clipped = model.clipped_eigenvalues;
    return sample_knockoffs(x, model, config.seed);
  });

  const Eigen::Index p = x.cols();
  Eigen::MatrixXd design(n, 2 * p);
  design << pair.original.values(), pair.knockoff.values();
  if (config.standardize) design = standardize_columns(design);

  const LogisticModel fit = run_stage("fit", art.timings, [&] {
    FitOptions options;
    options.c = effective_c(config.c_inverse_penalty, config.penalty_scale, n);
    options.max_iter = static_cast<int>(config.max_iter);
    options.tol = config.tol;
    return fit_logistic(design, y, options);
  });
  if (!fit.converged)
    spdlog::warn("logistic fit stopped at max_iter = {} with KKT residual {:.3g}", config.max_iter,
                 fit.kkt_residual);
  art.intercept = fit.intercept;
  art.converged = fit.converged;
  art.iterations = fit.iterations;
  art.final_objective = fit.final_objective;
  art.kkt_residual = fit.kkt_residual;

  const SelectionResult selection = run_stage("filter", art.timings, [&] {
    return select(knockoff_statistics(fit, x.column_ids()), config.q);
  });
  art.w = to_std(knockoff_statistics(fit.coefficients));
  art.tau = selection.tau;
  art.summary = selection.summary;
  for (auto j : selection.selected) art.selected_ids.push_back(x.column_ids()[static_cast<std::size_t>(j)]);

  const ClassifierMetrics metrics = run_stage("evaluate", art.timings, [&] { return evaluate(fit, design, y); });
  art.accuracy = metrics.accuracy;
  art.logloss = metrics.logloss;

  spdlog::info("selected {}/{} features (tau = {})", art.selected_ids.size(), p, art.tau);
  return art;
}

RunArtifact run_pipeline(const RunConfig& config, const std::filesystem::path& features_path,
                         const std::filesystem::path& labels_path) {
  std::vector<StageTiming> timings;
  const auto inputs = run_stage("load", timings, [&] {
    return std::make_pair(load_matrix(features_path, config.format), load_labels(labels_path));
  });
  RunArtifact art = run_pipeline(config, inputs.first, inputs.second);
  art.timings.insert(art.timings.begin(), timings.begin(), timings.end());
  return art;
}

}  // namespace knockoff
