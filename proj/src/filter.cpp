#include "knockoff/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "knockoff/errors.hpp"

namespace knockoff {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

Eigen::VectorXd knockoff_statistics(const Eigen::VectorXd& coefficients) {
  if (coefficients.size() % 2 != 0)
    throw DataError("augmented coefficient vector has odd length " + std::to_string(coefficients.size()));
  const Eigen::Index p = coefficients.size() / 2;
  return coefficients.head(p).cwiseAbs() - coefficients.tail(p).cwiseAbs();
}

KnockoffStatistics knockoff_statistics(const LogisticModel& model, const std::vector<LatentId>& column_ids) {
  Eigen::VectorXd w = knockoff_statistics(model.coefficients);
  if (static_cast<Eigen::Index>(column_ids.size()) != w.size())
    throw DataError("expected " + std::to_string(w.size()) + " column ids, got " + std::to_string(column_ids.size()));
  return KnockoffStatistics{std::move(w), column_ids};
}

double knockoff_plus_ratio(std::span<const double> w, double t) {
  std::size_t below = 0, above = 0;
  for (double v : w) {
    below += v <= -t;
    above += v >= t;
  }
  return (1.0 + static_cast<double>(below)) / static_cast<double>(std::max<std::size_t>(1, above));
}

double knockoff_plus_threshold(std::span<const double> w, double q) {
  std::vector<double> sorted(w.begin(), w.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> candidates;
  candidates.reserve(sorted.size());
  for (double v : sorted)
    if (v != 0.0) candidates.push_back(std::abs(v));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  for (double t : candidates) {
    // counts from the sorted statistics
    const auto below = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), -t) - sorted.begin());
    const auto above = static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
    const double ratio =
        (1.0 + static_cast<double>(below)) / static_cast<double>(std::max<std::size_t>(1, above));
    if (ratio <= q) return t;
  }
  return std::numeric_limits<double>::infinity();
}

std::optional<double> cohens_d(std::span<const double> selected, std::span<const double> rejected) {
  if (selected.size() < 2 || rejected.size() < 2) return std::nullopt;
  const double m1 = mean_of(selected);
  const double m2 = mean_of(rejected);
  const auto n1 = static_cast<double>(selected.size());
  const auto n2 = static_cast<double>(rejected.size());
  const double pooled =
      std::sqrt(((n1 - 1.0) * sample_variance(selected, m1) + (n2 - 1.0) * sample_variance(rejected, m2)) /
                (n1 + n2 - 2.0));
  if (!(pooled > 0.0)) return std::nullopt;
  return (m1 - m2) / pooled;
}

std::optional<double> signal_to_noise(std::optional<double> mean_w_selected,
                                      std::optional<double> mean_abs_w_rejected) {
  if (!mean_w_selected || !mean_abs_w_rejected || !(*mean_abs_w_rejected > 0.0)) return std::nullopt;
  return *mean_w_selected / *mean_abs_w_rejected;
}

SummaryMetrics summarize(std::span<const double> w, double tau) {
  SummaryMetrics s;
  if (w.empty()) return s;
  std::vector<double> sel, rej, abs_rej;
  for (double v : w) {
    if (v >= tau) {
      sel.push_back(v);
    } else {
      rej.push_back(v);
      abs_rej.push_back(std::abs(v));
    }
  }
  s.n_selected = static_cast<Eigen::Index>(sel.size());
  if (!sel.empty()) s.mean_w_selected = mean_of(sel);
  if (sel.size() >= 2) s.sd_w_selected = std::sqrt(sample_variance(sel, *s.mean_w_selected));
  if (!rej.empty()) {
    s.mean_w_rejected = mean_of(rej);
    s.mean_abs_w_rejected = mean_of(abs_rej);
  }
  s.snr = signal_to_noise(s.mean_w_selected, s.mean_abs_w_rejected);
  s.cohens_d = cohens_d(sel, rej);

  const auto positives = std::count_if(w.begin(), w.end(), [](double v) { return v > 0.0; });
  s.positive_fraction = static_cast<double>(positives) / static_cast<double>(w.size());
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  s.w_min = *lo;
  s.w_max = *hi;
  s.w_mean = mean_of(w);
  s.w_median = median_of(std::vector<double>(w.begin(), w.end()));
  return s;
}

SelectionResult select(const KnockoffStatistics& stats, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("q must lie in (0, 1)");
  const std::span<const double> w(stats.w.data(), static_cast<std::size_t>(stats.w.size()));
  SelectionResult out;
  out.q = q;
  out.tau = knockoff_plus_threshold(w, q);
  for (Eigen::Index j = 0; j < stats.w.size(); ++j)
    if (stats.w[j] >= out.tau) out.selected.push_back(j);
  out.summary = summarize(w, out.tau);
  return out;
}

}  // namespace knockoff
