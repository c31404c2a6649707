#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "knockoff/errors.hpp"
#include "knockoff/filter.hpp"
#include "oracles.hpp"

using namespace knockoff;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> random_w(std::mt19937_64& gen) {
  const int p = std::uniform_int_distribution<int>(1, 50)(gen);
  const int style = std::uniform_int_distribution<int>(0, 2)(gen);
  std::normal_distribution<double> normal(0.3, 1.0);
  std::uniform_int_distribution<int> small(-4, 6);
  std::vector<double> w(static_cast<std::size_t>(p));
  for (auto& v : w) {
    if (style == 0) v = normal(gen);
    else if (style == 1) v = small(gen);  // ties and zeros
    else v = small(gen) * 0.25 + (small(gen) > 3 ? normal(gen) : 0.0);
  }
  return w;
}

std::vector<Eigen::Index> selected_at(const std::vector<double>& w, double q) {
  KnockoffStatistics stats;
  stats.w = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  stats.column_ids.resize(w.size());
  return select(stats, q).selected;
}

}  // namespace

TEST_CASE("statistics from augmented coefficients") {
  Eigen::VectorXd beta(4);
  beta << 0.5, -0.2, 0.1, -0.2;
  const auto w = knockoff_statistics(beta);
  CHECK(w[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(w[1] == 0.0);
  CHECK(knockoff_statistics(Eigen::VectorXd::Zero(6)).isZero());

  Eigen::VectorXd swapped(4);
  swapped << 0.1, -0.2, 0.5, -0.2;
  CHECK(knockoff_statistics(swapped)[0] == -w[0]);

  CHECK_THROWS_AS(knockoff_statistics(Eigen::VectorXd::Zero(3)), DataError);
  LogisticModel model;
  model.coefficients = beta;
  CHECK_THROWS_AS(knockoff_statistics(model, {1, 2, 3}), DataError);
  CHECK(knockoff_statistics(model, {8, 9}).column_ids == std::vector<LatentId>{8, 9});
}

TEST_CASE("knockoff+ threshold examples") {
  const std::vector<double> w{3, 2, 1, -1};
  CHECK(knockoff_plus_threshold(w, 0.5) == 2.0);
  CHECK(knockoff_plus_ratio(w, 1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(knockoff_plus_ratio(w, 2.0) == 0.5);

  CHECK(knockoff_plus_threshold(std::vector<double>{-1, -2, -0.5}, 0.9) == kInf);
  CHECK(knockoff_plus_threshold(std::vector<double>{0, 0, 0}, 0.5) == kInf);

  const std::vector<double> ones{1, 1, 1, 1, 1};
  CHECK(knockoff_plus_threshold(ones, 0.2) == 1.0);
  CHECK(knockoff_plus_ratio(ones, 1.0) == 0.2);
  CHECK(selected_at(ones, 0.2).size() == 5);
}

TEST_CASE("selection and summary") {
  KnockoffStatistics stats;
  stats.w = Eigen::Vector4d(3, 2, 1, -1);
  stats.column_ids = {40, 41, 42, 43};
  const auto sel = select(stats, 0.5);
  CHECK(sel.tau == 2.0);
  CHECK(sel.tau_finite());
  CHECK(sel.selected == std::vector<Eigen::Index>{0, 1});
  CHECK(sel.summary.n_selected == 2);
  CHECK(*sel.summary.mean_w_selected == 2.5);
  CHECK(*sel.summary.mean_w_rejected == 0.0);
  CHECK(*sel.summary.mean_abs_w_rejected == 1.0);
  CHECK(*sel.summary.snr == 2.5);
  CHECK(sel.summary.positive_fraction == 0.75);
  CHECK(sel.summary.w_min == -1.0);
  CHECK(sel.summary.w_max == 3.0);
  CHECK(sel.summary.w_median == 1.5);

  stats.w = Eigen::Vector4d(-3, -2, 1, -1);
  const auto none = select(stats, 0.1);
  CHECK_FALSE(none.tau_finite());
  CHECK(none.selected.empty());
  CHECK(none.summary.n_selected == 0);
  CHECK_FALSE(none.summary.snr.has_value());
  CHECK_FALSE(none.summary.cohens_d.has_value());

  CHECK_THROWS_AS(select(stats, 0.0), ConfigError);
  CHECK_THROWS_AS(select(stats, 1.0), ConfigError);
}

TEST_CASE("signal to noise and effect size") {
  // the ratio is reported as computed, 0.363 / 0.067 = 5.41791...
  CHECK(*signal_to_noise(0.363, 0.067) == 0.363 / 0.067);
  CHECK_FALSE(signal_to_noise(std::nullopt, 0.1).has_value());
  CHECK_FALSE(signal_to_noise(0.3, std::nullopt).has_value());

  const std::vector<double> a{1, 1}, b{0, 0};
  CHECK_FALSE(cohens_d(a, b).has_value());
  const std::vector<double> c{2, 4}, d{0, 2};
  CHECK(*cohens_d(c, d) == doctest::Approx(1.41421356).epsilon(1e-8));
  CHECK(*cohens_d(c, c) == 0.0);
  CHECK_FALSE(cohens_d(std::vector<double>{1}, d).has_value());
}

TEST_CASE("property: threshold equals the brute-force scan") {
  std::mt19937_64 gen(101);
  const double qs[] = {0.05, 0.1, 0.2, 0.3, 0.5, 0.9};
  for (int trial = 0; trial < 1000; ++trial) {
    const auto w = random_w(gen);
    for (double q : qs) {
      const double tau = knockoff_plus_threshold(w, q);
      REQUIRE(tau == oracle::threshold(w, q));
      if (tau != kInf) CHECK(knockoff_plus_ratio(w, tau) <= q);
    }
  }
}

TEST_CASE("property: selection grows with q and ignores positive rescaling") {
  std::mt19937_64 gen(202);
  for (int trial = 0; trial < 300; ++trial) {
    const auto w = random_w(gen);
    std::vector<Eigen::Index> prev;
    for (double q : {0.05, 0.1, 0.2, 0.4, 0.8, 0.999}) {
      const auto cur = selected_at(w, q);
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
    // powers of two scale without rounding
    for (double scale : {0.25, 8.0}) {
      std::vector<double> scaled = w;
      for (auto& v : scaled) v *= scale;
      CHECK(selected_at(scaled, 0.2) == selected_at(w, 0.2));
    }
    const double factor = std::uniform_real_distribution<double>(0.01, 100.0)(gen);
    std::vector<double> scaled = w;
    for (auto& v : scaled) v *= factor;
    CHECK(selected_at(scaled, 0.3) == selected_at(w, 0.3));
  }
}

TEST_CASE("q close to one selects once positives outnumber negatives by two") {
  // (1 + neg) / pos <= 0.999 holds exactly when pos >= neg + 2 for these sizes,
  // so a single positive w on its own is never enough.
  std::mt19937_64 gen(303);
  int nonempty = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto w = random_w(gen);
    REQUIRE(w.size() < 998);
    bool expected = false;
    for (double t : w) {
      if (t == 0.0) continue;
      const double m = std::abs(t);
      const auto pos = std::count_if(w.begin(), w.end(), [&](double v) { return v >= m; });
      const auto neg = std::count_if(w.begin(), w.end(), [&](double v) { return v <= -m; });
      expected = expected || pos >= neg + 2;
    }
    const auto s = selected_at(w, 0.999);
    CHECK(s.empty() == !expected);
    nonempty += !s.empty();
  }
  CHECK(nonempty > 0);

  CHECK(selected_at({0.5, -0.1, 0.0}, 0.999).empty());
  CHECK(selected_at({0.5, 0.4, -0.1}, 0.999).size() == 2);
}

TEST_CASE("swapping an original with its knockoff and refitting flips w") {
  std::mt19937_64 gen(404);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 80, p = 4;
    const Eigen::MatrixXd x = oracle::gaussian(gen, n, 2 * p);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = unif(gen) < 1.0 / (1.0 + std::exp(-2.0 * x(i, 0))) ? 1 : 0;
    y[0] = 0;
    y[1] = 1;
    FitOptions opt;
    opt.c = 10.0;
    opt.tol = 1e-10;
    const auto fit = fit_logistic(x, LabelVector(y), opt);
    const int j = trial % p;
    Eigen::MatrixXd swapped = x;
    swapped.col(j).swap(swapped.col(p + j));
    const auto refit = fit_logistic(swapped, LabelVector(y), opt);
    const auto w = knockoff_statistics(fit.coefficients);
    const auto ws = knockoff_statistics(refit.coefficients);
    CHECK(std::abs(ws[j] + w[j]) <= 1e-6);
    for (int k = 0; k < p; ++k)
      if (k != j) CHECK(std::abs(ws[k] - w[k]) <= 1e-6);
  }
}
