#include "knockoff/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "knockoff/errors.hpp"
#include "knockoff/format.hpp"
#include "knockoff/filter.hpp"
#include "knockoff/rng.hpp"
#include "knockoff/sampler.hpp"
#include "knockoff/sparse_logit.hpp"

namespace knockoff {

namespace {

constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kKnockoffStream = 2;

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

CovarianceFamily parse_covariance_family(const std::string& name) {
  if (name == "identity") return CovarianceFamily::identity;
  if (name == "equicorrelated") return CovarianceFamily::equicorrelated;
  if (name == "ar1") return CovarianceFamily::ar1;
  throw ConfigError("unknown covariance family '" + name + "' (expected identity, equicorrelated or ar1)");
}

std::string to_string(CovarianceFamily family) {
  switch (family) {
    case CovarianceFamily::identity: return "identity";
    case CovarianceFamily::equicorrelated: return "equicorrelated";
    case CovarianceFamily::ar1: return "ar1";
  }
  return "?";
}

std::vector<std::string> SimDesign::problems() const {
  std::vector<std::string> out;
  if (n < 2) out.push_back("n must be at least 2");
  if (p < 1) out.push_back("p must be at least 1");
  if (n_nonnull < 0 || n_nonnull > p) out.push_back("n_nonnull must lie in [0, p]");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) out.push_back("amplitude must be finite and non-negative");
  if (!(sign_mix >= 0.0 && sign_mix <= 1.0)) out.push_back("sign_mix must lie in [0, 1]");
  if (covariance != CovarianceFamily::identity && !(rho > -1.0 && rho < 1.0))
    out.push_back("rho must lie in (-1, 1)");
  if (covariance == CovarianceFamily::equicorrelated && p > 1 &&
      !(rho > -1.0 / static_cast<double>(p - 1)))
    out.push_back("equicorrelated rho must exceed -1/(p-1) for positive definiteness");
  return out;
}

void SimDesign::validate() const {
  const auto issues = problems();
  if (issues.empty()) return;
  std::string msg = "invalid simulation design:";
  for (const auto& issue : issues) msg += "\n  - " + issue;
  throw ConfigError(msg);
}

Eigen::MatrixXd design_covariance(const SimDesign& d) {
  const Eigen::Index p = d.p;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
  switch (d.covariance) {
    case CovarianceFamily::identity:
      break;
    case CovarianceFamily::equicorrelated:
      sigma.setConstant(d.rho);
      sigma.diagonal().setOnes();
      break;
    case CovarianceFamily::ar1:
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
          sigma(i, j) = std::pow(d.rho, static_cast<double>(std::abs(i - j)));
      break;
  }
  return sigma;
}

SimData generate_design(const SimDesign& d) {
  d.validate();
  Rng rng(derive_seed(d.seed, kDesignStream));

  Eigen::MatrixXd x = rng.normal_matrix(d.n, d.p);
  if (d.covariance != CovarianceFamily::identity) {
    Eigen::LLT<Eigen::MatrixXd> llt(design_covariance(d));
    if (llt.info() != Eigen::Success) throw ConfigError("design covariance is not positive definite");
    x = x * llt.matrixL().transpose();
  }

  // partial Fisher-Yates: the first n_nonnull entries form the support
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d.p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < d.n_nonnull; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d.p - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  const auto n_negative = static_cast<Eigen::Index>(std::llround(d.sign_mix * static_cast<double>(d.n_nonnull)));

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d.p);
  for (Eigen::Index i = 0; i < d.n_nonnull; ++i)
    beta[order[static_cast<std::size_t>(i)]] = i < n_negative ? -d.amplitude : d.amplitude;

  const Eigen::VectorXd eta = x * beta;
  std::vector<int> labels(static_cast<std::size_t>(d.n));
  for (Eigen::Index i = 0; i < d.n; ++i) labels[static_cast<std::size_t>(i)] = rng.uniform() < sigmoid(eta[i]) ? 1 : 0;

  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < d.p; ++j)
    if (beta[j] != 0.0) support.push_back(j);

  return SimData{FeatureMatrix(std::move(x)), LabelVector(std::move(labels)), std::move(beta), std::move(support)};
}

std::pair<double, double> fdp_and_power(const std::vector<Eigen::Index>& selected,
                                        const std::vector<Eigen::Index>& support) {
  std::size_t hits = 0;
  for (auto j : selected)
    if (std::binary_search(support.begin(), support.end(), j)) ++hits;
  const std::size_t false_hits = selected.size() - hits;
  const double fdp = static_cast<double>(false_hits) / static_cast<double>(std::max<std::size_t>(1, selected.size()));
  const double power = support.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(support.size());
  return {fdp, power};
}

SimOutcome run_replicate(const SimDesign& d, double q, const PipelineParams& params) {
  const SimData data = generate_design(d);
  const KnockoffModel model = fit_knockoff_model(data.x, params.ridge, params.s_max);
  const KnockoffPair pair = sample_knockoffs(data.x, model, derive_seed(d.seed, kKnockoffStream));

  Eigen::MatrixXd design(d.n, 2 * d.p);
  design << pair.original.values(), pair.knockoff.values();
  FitOptions options;
  options.c = effective_c(params.c, params.penalty_scale, d.n);
  options.max_iter = params.max_iter;
  options.tol = params.tol;
  const LogisticModel fit = fit_logistic(design, data.y, options);

  const KnockoffStatistics stats = knockoff_statistics(fit, data.x.column_ids());
  const SelectionResult selection = select(stats, q);

  SimOutcome out;
  out.seed = d.seed;
  std::tie(out.fdp, out.power) = fdp_and_power(selection.selected, data.support);
  out.n_selected = static_cast<Eigen::Index>(selection.selected.size());
  out.tau = selection.tau;
  out.converged = fit.converged;
  return out;
}

StudyResult run_study(const SimDesign& d, double q, std::size_t replicates, std::size_t worker_count,
                      const PipelineParams& params) {
  if (replicates < 1) throw ConfigError("replicates must be at least 1");
  d.validate();
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("q must lie in (0, 1)");

  StudyResult result;
  result.q = q;
  result.replicates.resize(replicates);
  std::vector<std::exception_ptr> errors(replicates);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t r = next++; r < replicates; r = next++) {
      try {
        SimDesign rd = d;
        rd.seed = d.seed + r;
        SimOutcome outcome = run_replicate(rd, q, params);
        outcome.replicate = r;
        result.replicates[r] = outcome;
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(worker_count, 1, replicates);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const auto count = static_cast<double>(replicates);
  double fdp_sum = 0.0, power_sum = 0.0, selected_sum = 0.0;
  for (const auto& o : result.replicates) {
    fdp_sum += o.fdp;
    power_sum += o.power;
    selected_sum += static_cast<double>(o.n_selected);
  }
  result.mean_fdp = fdp_sum / count;
  result.mean_power = power_sum / count;
  result.mean_selected = selected_sum / count;
  if (replicates >= 2) {
    double ss = 0.0;
    for (const auto& o : result.replicates) ss += (o.fdp - result.mean_fdp) * (o.fdp - result.mean_fdp);
    result.fdp_se = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
    result.fdp_ci_halfwidth = 1.96 * result.fdp_se;
  }
  result.fdr_controlled = result.mean_fdp <= q + 2.0 * result.fdp_se;
  return result;
}

std::string study_csv(const StudyResult& result) {
  std::ostringstream out;
  out << "replicate,seed,tau,n_selected,fdp,power\n";
  for (const auto& o : result.replicates)
    out << o.replicate << ',' << o.seed << ',' << format_number(o.tau) << ',' << o.n_selected << ','
        << format_number(o.fdp) << ',' << format_number(o.power) << '\n';
  return out.str();
}

std::string study_summary(const StudyResult& result) {
  std::ostringstream out;
  out << "replicates=" << result.replicates.size() << " q=" << format_number(result.q)
      << " mean_fdp=" << format_number(result.mean_fdp) << " fdp_se=" << format_number(result.fdp_se)
      << " fdp_ci_halfwidth=" << (result.fdp_ci_halfwidth ? format_number(*result.fdp_ci_halfwidth) : "null")
      << " mean_power=" << format_number(result.mean_power) << " mean_selected=" << format_number(result.mean_selected)
      << " FDR controlled: " << (result.fdr_controlled ? "yes" : "no") << "\n";
  return out.str();
}

}  // namespace knockoff
