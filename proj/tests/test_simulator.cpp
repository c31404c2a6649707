#include <doctest.h>

#include <cmath>

#include "knockoff/errors.hpp"
#include "knockoff/simulator.hpp"
#include "oracles.hpp"

using namespace knockoff;

namespace {

SimDesign small_design() {
  SimDesign d;
  d.n = 200;
  d.p = 20;
  d.n_nonnull = 5;
  d.amplitude = 2.0;
  d.seed = 77;
  return d;
}

PipelineParams summed_penalty() {
  PipelineParams params;
  params.penalty_scale = PenaltyScale::sum;
  return params;
}

}  // namespace

TEST_CASE("design covariance families") {
  SimDesign d;
  d.p = 4;
  d.covariance = CovarianceFamily::ar1;
  d.rho = 0.3;
  const auto ar = design_covariance(d);
  CHECK(ar(0, 3) == doctest::Approx(0.027).epsilon(1e-12));
  CHECK(ar(2, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(ar(1, 1) == 1.0);

  d.covariance = CovarianceFamily::equicorrelated;
  d.rho = 0.5;
  const auto eq = design_covariance(d);
  CHECK(eq(0, 3) == 0.5);
  CHECK(eq(2, 2) == 1.0);

  d.rho = -0.5;  // below -1/(p-1)
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d.covariance = CovarianceFamily::ar1;
  d.rho = 1.0;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  SimDesign too_many;
  too_many.p = 5;
  too_many.n_nonnull = 6;
  CHECK_THROWS_AS(too_many.validate(), ConfigError);
  CHECK(parse_covariance_family("ar1") == CovarianceFamily::ar1);
  CHECK_THROWS_AS(parse_covariance_family("toeplitz"), ConfigError);
}

TEST_CASE("generated designs are reproducible and carry the stated support") {
  const SimDesign d = small_design();
  const auto a = generate_design(d);
  const auto b = generate_design(d);
  CHECK(a.x.values() == b.x.values());
  CHECK(a.y.values() == b.y.values());
  CHECK(a.support == b.support);

  CHECK(a.support.size() == 5);
  int negative = 0;
  for (Eigen::Index j = 0; j < d.p; ++j) {
    const bool on_support = std::find(a.support.begin(), a.support.end(), j) != a.support.end();
    CHECK((a.beta[j] != 0.0) == on_support);
    if (on_support) CHECK(std::abs(a.beta[j]) == 2.0);
    negative += a.beta[j] < 0.0;
  }
  CHECK(negative == 3);  // round(0.5 * 5)

  SimDesign other = d;
  other.seed = 78;
  CHECK(generate_design(other).x.values() != a.x.values());

  SimDesign null = d;
  null.amplitude = 0.0;
  const auto z = generate_design(null);
  CHECK(z.beta.isZero());
  CHECK(z.support.empty());
}

TEST_CASE("identity design has unit sample covariance") {
  SimDesign d;
  d.n = 100000;
  d.p = 5;
  d.n_nonnull = 1;
  const auto data = generate_design(d);
  const Eigen::MatrixXd cov = oracle::sample_covariance(data.x.values());
  CHECK((cov - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("fdp and power") {
  const std::vector<Eigen::Index> support{1, 3, 5};
  CHECK(fdp_and_power({}, support) == std::pair<double, double>{0.0, 0.0});
  CHECK(fdp_and_power({1, 2}, support) == std::pair<double, double>{0.5, 1.0 / 3.0});
  CHECK(fdp_and_power({1, 3, 5}, support) == std::pair<double, double>{0.0, 1.0});
  CHECK(fdp_and_power({0, 2}, {}) == std::pair<double, double>{1.0, 0.0});
}

TEST_CASE("studies do not depend on the worker count") {
  const SimDesign d = small_design();
  const auto one = run_study(d, 0.2, 6, 1, summed_penalty());
  const auto many = run_study(d, 0.2, 6, 8, summed_penalty());
  CHECK(study_csv(one) == study_csv(many));
  REQUIRE(one.replicates.size() == 6);
  for (std::size_t r = 0; r < 6; ++r) {
    CHECK(one.replicates[r].replicate == r);
    CHECK(one.replicates[r].seed == d.seed + r);
  }
  CHECK(one.fdp_ci_halfwidth.has_value());
  CHECK(*one.fdp_ci_halfwidth == doctest::Approx(1.96 * one.fdp_se));

  // a replicate depends only on its own seed
  SimDesign shifted = d;
  shifted.seed = d.seed + 2;
  const auto later = run_replicate(shifted, 0.2, summed_penalty());
  CHECK(later.fdp == one.replicates[2].fdp);
  CHECK(later.n_selected == one.replicates[2].n_selected);
  CHECK(later.tau == one.replicates[2].tau);
}

TEST_CASE("single replicate reports no interval") {
  const auto r = run_study(small_design(), 0.1, 1, 1, summed_penalty());
  CHECK_FALSE(r.fdp_ci_halfwidth.has_value());
  CHECK(r.fdp_se == 0.0);
  CHECK(study_summary(r).find("fdp_ci_halfwidth=null") != std::string::npos);
  CHECK_THROWS_AS(run_study(small_design(), 0.1, 0, 1, summed_penalty()), ConfigError);
}

TEST_CASE("empty selections count as zero false discovery proportion") {
  SimDesign d = small_design();
  d.amplitude = 0.0;
  // C = 1 on the mean loss keeps every coefficient at zero on null data
  const auto literal = run_replicate(d, 0.1, PipelineParams{});
  CHECK(literal.n_selected == 0);
  CHECK(std::isinf(literal.tau));
  CHECK(literal.fdp == 0.0);
  CHECK(literal.power == 0.0);
}

TEST_CASE("strong signal gives high power") {
  SimDesign d;
  d.n = 1000;
  d.p = 100;
  d.n_nonnull = 20;
  d.amplitude = 3.0;
  const auto r = run_study(d, 0.1, 50, 1, summed_penalty());
  MESSAGE("mean power " << r.mean_power << ", mean fdp " << r.mean_fdp);
  CHECK(r.mean_power > 0.5);
}
