#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "knockoff/errors.hpp"
#include "knockoff/pipeline.hpp"
#include "knockoff/report.hpp"

using namespace knockoff;

namespace {

// Sparse non-negative activations; the label depends on the first two columns.
std::pair<FeatureMatrix, LabelVector> toy_inputs(int n, int p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Eigen::MatrixXd z(n, p);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(i, j) = std::max(0.0, normal(gen) + 0.2 * j / p);
    const double m = 2.5 * z(i, 0) - 2.0 * z(i, 1);
    y[static_cast<std::size_t>(i)] = unif(gen) < 1.0 / (1.0 + std::exp(-m)) ? 1 : 0;
  }
  std::vector<LatentId> ids(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) ids[static_cast<std::size_t>(j)] = 100 + 3 * j;
  return {FeatureMatrix(z, ids), LabelVector(y)};
}

RunConfig toy_config() {
  RunConfig c;
  c.top_k = 6;
  c.penalty_scale = PenaltyScale::sum;
  return c;
}

template <class Error>
std::string error_of(const RunConfig& c, const FeatureMatrix& x, const LabelVector& y) {
  try {
    run_pipeline(c, x, y);
  } catch (const Error& e) {
    return e.what();
  }
  return "no error of the expected type";
}

}  // namespace

TEST_CASE("smoke run on a small synthetic input") {
  const auto [x, y] = toy_inputs(64, 8, 1);
  const auto art = run_pipeline(toy_config(), x, y);
  CHECK(art.column_ids.size() == 6);
  CHECK(art.w.size() == 6);
  CHECK(art.n_used == 64);
  CHECK(art.converged);
  CHECK(art.summary.n_selected == static_cast<Eigen::Index>(art.selected_ids.size()));
  for (double r : art.activation_rate) {
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  for (std::size_t j = 1; j < art.energy.size(); ++j) CHECK(art.energy[j - 1] >= art.energy[j]);
  CHECK(art.accuracy > 0.5);
  CHECK(validate_artifact(artifact_to_json(art)).empty());

  std::vector<std::string> stages;
  for (const auto& t : art.timings) stages.push_back(t.stage);
  CHECK(stages == std::vector<std::string>{"reduce", "knockoffs", "fit", "filter", "evaluate"});
}

TEST_CASE("identical inputs give byte-identical artifacts") {
  const auto [x, y] = toy_inputs(64, 8, 2);
  const auto a = artifact_to_json(run_pipeline(toy_config(), x, y)).dump(2);
  const auto b = artifact_to_json(run_pipeline(toy_config(), x, y)).dump(2);
  CHECK(a == b);
  RunConfig other = toy_config();
  other.seed = 2026;
  CHECK(artifact_to_json(run_pipeline(other, x, y)).dump(2) != a);
}

TEST_CASE("q close to one selects when some statistic is positive") {
  const auto [x, y] = toy_inputs(64, 8, 3);
  RunConfig c = toy_config();
  c.q = 0.999;
  const auto art = run_pipeline(c, x, y);
  REQUIRE(std::any_of(art.w.begin(), art.w.end(), [](double v) { return v > 0.0; }));
  CHECK_FALSE(art.selected_ids.empty());
}

TEST_CASE("leading rows and reduction") {
  const auto [x, y] = toy_inputs(80, 8, 4);
  RunConfig c = toy_config();
  c.n_samples = 50;
  const auto art = run_pipeline(c, x, y);
  CHECK(art.n_used == 50);
  CHECK(art.n_input_rows == 80);

  const FeatureMatrix head(x.values().topRows(50), x.column_ids());
  const LabelVector yhead(std::vector<int>(y.values().begin(), y.values().begin() + 50));
  RunConfig all = toy_config();
  all.n_samples = 50;
  CHECK(artifact_to_json(run_pipeline(all, head, yhead)).at("features") == artifact_to_json(art).at("features"));

  RunConfig standardized = toy_config();
  standardized.standardize = true;
  CHECK(run_pipeline(standardized, x, y).converged);
}

TEST_CASE("stage errors keep their type and name the stage") {
  const auto [x, y] = toy_inputs(64, 8, 5);
  RunConfig big = toy_config();
  big.top_k = 9;
  CHECK(error_of<ConfigError>(big, x, y).find("stage reduce") != std::string::npos);

  big.top_k = 70;
  big.n_samples = 100;
  CHECK(error_of<ConfigError>(big, x, y).find("top_k") != std::string::npos);

  const LabelVector ones(std::vector<int>(64, 1));
  CHECK(error_of<DataError>(toy_config(), x, ones).find("stage load") != std::string::npos);
  const LabelVector shorter(std::vector<int>(y.values().begin(), y.values().end() - 1));
  CHECK(error_of<DataError>(toy_config(), x, shorter).find("stage load") != std::string::npos);

  // duplicated columns with no ridge leave the covariance singular
  Eigen::MatrixXd dup(64, 2);
  dup << x.values().col(0), x.values().col(0);
  RunConfig singular = toy_config();
  singular.top_k = 2;
  singular.ridge = 0.0;
  CHECK(error_of<NumericalError>(singular, FeatureMatrix(dup), y).find("stage knockoffs") != std::string::npos);

  RunConfig bad = toy_config();
  bad.q = 0.0;
  CHECK_THROWS_AS(run_pipeline(bad, x, y), ConfigError);
}

TEST_CASE("file inputs in both formats") {
  testing::TempDir dir;
  const auto [x, y] = toy_inputs(64, 8, 6);
  const FeatureMatrix xf(x.values().cast<float>().cast<double>(), x.column_ids());
  save_matrix(xf, dir / "z.bin", MatrixFormat::raw_f32);
  save_matrix(xf, dir / "z.csv", MatrixFormat::csv);
  save_labels(y, dir / "y.txt");
  RunConfig raw = toy_config();
  raw.format = MatrixFormat::raw_f32;
  const auto a = run_pipeline(raw, dir / "z.bin", dir / "y.txt");
  const auto b = run_pipeline(toy_config(), dir / "z.csv", dir / "y.txt");
  CHECK(a.w == b.w);
  CHECK(a.column_ids == b.column_ids);
  CHECK(a.timings.front().stage == "load");
  CHECK_THROWS_AS(run_pipeline(toy_config(), dir / "missing.csv", dir / "y.txt"), DataError);
}
