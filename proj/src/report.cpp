#include "knockoff/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "knockoff/errors.hpp"
#include "knockoff/filter.hpp"
#include "knockoff/format.hpp"

namespace knockoff {

using Json = nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> read_optional(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

Json config_to_json(const RunConfig& c) {
  Json out;
  out["n_samples"] = c.n_samples;
  out["top_k"] = c.top_k;
  out["ridge"] = c.ridge;
  out["s_max"] = c.s_max;
  out["c"] = c.c_inverse_penalty;
  out["penalty_scale"] = std::string(to_string(c.penalty_scale));
  out["max_iter"] = c.max_iter;
  out["tol"] = c.tol;
  out["q"] = c.q;
  out["seed"] = c.seed;
  out["standardize"] = c.standardize;
  out["format"] = std::string(to_string(c.format));
  out["top_n"] = c.top_n;
  out["bottom_n"] = c.bottom_n;
  return out;
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_string()) text = value.get<std::string>();
    else if (value.is_boolean()) text = value.get<bool>() ? "true" : "false";
    else if (value.is_number()) text = value.dump();
    else throw DataError("artifact config field '" + key + "' has an unsupported type");
    try {
      set_run_field(c, key, text);
    } catch (const ConfigError& e) {
      throw DataError(std::string("artifact config: ") + e.what());
    }
  }
  return c;
}

std::vector<std::size_t> ranked(const RunArtifact& a, bool descending) {
  std::vector<std::size_t> order(a.w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (a.w[x] != a.w[y]) return descending ? a.w[x] > a.w[y] : a.w[x] < a.w[y];
    return a.column_ids[x] < a.column_ids[y];
  });
  return order;
}

std::vector<FeatureRow> rows_for(const RunArtifact& a, const std::vector<std::size_t>& order, std::size_t count) {
  std::vector<FeatureRow> out;
  for (std::size_t r = 0; r < std::min(count, order.size()); ++r) {
    const auto i = order[r];
    FeatureRow row;
    row.rank = static_cast<int>(r + 1);
    row.latent = a.column_ids[i];
    row.w = a.w[i];
    row.activation_rate = a.activation_rate[i];
    row.energy = a.energy[i];
    row.selected = a.w[i] >= a.tau;
    out.push_back(row);
  }
  return out;
}

std::string table_csv(const std::vector<FeatureRow>& rows) {
  std::ostringstream out;
  out << "rank,latent,w,activation_rate,energy,status\n";
  for (const auto& r : rows)
    out << r.rank << ',' << r.latent << ',' << format_number(r.w) << ',' << format_number(r.activation_rate) << ','
        << format_number(r.energy) << ',' << (r.selected ? "selected" : "rejected") << '\n';
  return out.str();
}

Json rows_json(const std::vector<FeatureRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows)
    out.push_back({{"rank", r.rank},
                   {"latent", r.latent},
                   {"w", r.w},
                   {"activation_rate", r.activation_rate},
                   {"energy", r.energy},
                   {"status", r.selected ? "selected" : "rejected"}});
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace

Json artifact_to_json(const RunArtifact& a) {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["config"] = config_to_json(a.config);
  doc["data"] = {{"n_input_rows", a.n_input_rows},
                 {"n_input_columns", a.n_input_columns},
                 {"n_used", a.n_used},
                 {"p", a.column_ids.size()}};
  doc["runtime"] = {{"eigen_threads", a.eigen_threads}};
  doc["knockoffs"] = {{"s", a.knockoff_s}, {"jitter", a.knockoff_jitter}, {"clipped_eigenvalues", a.knockoff_clipped}};
  doc["fit"] = {{"intercept", a.intercept},
                {"converged", a.converged},
                {"iterations", a.iterations},
                {"final_objective", a.final_objective},
                {"kkt_residual", a.kkt_residual},
                {"accuracy", a.accuracy},
                {"logloss", a.logloss}};
  doc["features"] = {{"column_ids", a.column_ids},
                     {"w", a.w},
                     {"energy", a.energy},
                     {"activation_rate", a.activation_rate}};
  doc["selection"] = {{"q", a.config.q},
                      {"tau", std::isfinite(a.tau) ? Json(a.tau) : Json(nullptr)},
                      {"n_selected", a.selected_ids.size()},
                      {"selected_ids", a.selected_ids}};
  const auto& s = a.summary;
  doc["summary"] = {{"n_selected", s.n_selected},
                    {"mean_w_selected", optional_number(s.mean_w_selected)},
                    {"sd_w_selected", optional_number(s.sd_w_selected)},
                    {"mean_w_rejected", optional_number(s.mean_w_rejected)},
                    {"mean_abs_w_rejected", optional_number(s.mean_abs_w_rejected)},
                    {"snr", optional_number(s.snr)},
                    {"cohens_d", optional_number(s.cohens_d)},
                    {"positive_fraction", s.positive_fraction},
                    {"w_min", s.w_min},
                    {"w_max", s.w_max},
                    {"w_mean", s.w_mean},
                    {"w_median", s.w_median}};
  doc["top_features"] = rows_json(top_features(a, static_cast<std::size_t>(a.config.top_n)));
  doc["bottom_features"] = rows_json(bottom_features(a, static_cast<std::size_t>(a.config.bottom_n)));
  return doc;
}

Json timings_to_json(const RunArtifact& a) {
  Json out = Json::array();
  for (const auto& t : a.timings) out.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  return Json{{"timings", out}};
}

std::vector<std::string> validate_artifact(const Json& doc) {
  std::vector<std::string> problems;
  auto require = [&](const Json& parent, const char* path, const char* key, auto check, const char* type) {
    if (!parent.is_object() || !parent.contains(key)) {
      problems.push_back(std::string("missing field ") + path + key);
      return false;
    }
    if (!check(parent.at(key))) {
      problems.push_back(std::string("field ") + path + key + " must be " + type);
      return false;
    }
    return true;
  };
  const auto is_obj = [](const Json& j) { return j.is_object(); };
  const auto is_num = [](const Json& j) { return j.is_number(); };
  const auto is_int = [](const Json& j) { return j.is_number_integer(); };
  const auto is_bool = [](const Json& j) { return j.is_boolean(); };
  const auto is_num_or_null = [](const Json& j) { return j.is_number() || j.is_null(); };
  const auto num_array = [](const Json& j) {
    return j.is_array() && std::all_of(j.begin(), j.end(), [](const Json& v) { return v.is_number(); });
  };
  const auto int_array = [](const Json& j) {
    return j.is_array() && std::all_of(j.begin(), j.end(), [](const Json& v) { return v.is_number_integer(); });
  };

  if (!doc.is_object()) return {"artifact is not a JSON object"};
  require(doc, "", "format_version", is_int, "an integer");
  const bool has_config = require(doc, "", "config", is_obj, "an object");
  require(doc, "", "fit", is_obj, "an object");
  const bool has_features = require(doc, "", "features", is_obj, "an object");
  const bool has_selection = require(doc, "", "selection", is_obj, "an object");
  const bool has_summary = require(doc, "", "summary", is_obj, "an object");
  require(doc, "", "top_features", [](const Json& j) { return j.is_array(); }, "an array");
  require(doc, "", "bottom_features", [](const Json& j) { return j.is_array(); }, "an array");
  if (doc.contains("fit") && doc["fit"].is_object()) {
    for (const char* key : {"intercept", "final_objective", "kkt_residual", "accuracy", "logloss"})
      require(doc["fit"], "fit.", key, is_num, "a number");
    require(doc["fit"], "fit.", "converged", is_bool, "a boolean");
    require(doc["fit"], "fit.", "iterations", is_int, "an integer");
  }
  if (has_config) {
    try {
      config_from_json(doc["config"]);
    } catch (const std::exception& e) {
      problems.push_back(e.what());
    }
  }
  if (!has_features || !has_selection) return problems;

  const Json& f = doc["features"];
  const Json& sel = doc["selection"];
  bool ok = require(f, "features.", "column_ids", int_array, "an integer array");
  ok &= require(f, "features.", "w", num_array, "a number array");
  ok &= require(f, "features.", "energy", num_array, "a number array");
  ok &= require(f, "features.", "activation_rate", num_array, "a number array");
  ok &= require(sel, "selection.", "q", is_num, "a number");
  ok &= require(sel, "selection.", "tau", is_num_or_null, "a number or null");
  ok &= require(sel, "selection.", "n_selected", is_int, "an integer");
  ok &= require(sel, "selection.", "selected_ids", int_array, "an integer array");
  if (has_summary) {
    require(doc["summary"], "summary.", "n_selected", is_int, "an integer");
    for (const char* key : {"mean_w_selected", "sd_w_selected", "mean_w_rejected", "mean_abs_w_rejected", "snr",
                            "cohens_d"})
      require(doc["summary"], "summary.", key, is_num_or_null, "a number or null");
    for (const char* key : {"positive_fraction", "w_min", "w_max", "w_mean", "w_median"})
      require(doc["summary"], "summary.", key, is_num, "a number");
  }
  if (!ok) return problems;

  const auto ids = f["column_ids"].get<std::vector<LatentId>>();
  const auto w = f["w"].get<std::vector<double>>();
  const auto rates = f["activation_rate"].get<std::vector<double>>();
  const auto energy = f["energy"].get<std::vector<double>>();
  const auto selected = sel["selected_ids"].get<std::vector<LatentId>>();
  const double q = sel["q"].get<double>();
  const double tau = sel["tau"].is_null() ? std::numeric_limits<double>::infinity() : sel["tau"].get<double>();

  if (w.size() != ids.size() || rates.size() != ids.size() || energy.size() != ids.size())
    problems.push_back("per-feature arrays have different lengths");
  if (std::set<LatentId>(ids.begin(), ids.end()).size() != ids.size()) problems.push_back("column_ids are not unique");
  for (std::size_t i = 0; i < rates.size(); ++i)
    if (!(rates[i] >= 0.0 && rates[i] <= 1.0))
      problems.push_back("activation_rate[" + std::to_string(i) + "] outside [0, 1]");
  const std::set<LatentId> id_set(ids.begin(), ids.end());
  for (auto id : selected)
    if (!id_set.count(id)) problems.push_back("selected id " + std::to_string(id) + " is not a column id");
  const auto n_selected = sel["n_selected"].get<std::int64_t>();
  if (n_selected != static_cast<std::int64_t>(selected.size()))
    problems.push_back("selection.n_selected does not match selected_ids");
  if (has_summary && doc["summary"].contains("n_selected") && doc["summary"]["n_selected"].is_number_integer() &&
      doc["summary"]["n_selected"].get<std::int64_t>() != static_cast<std::int64_t>(selected.size()))
    problems.push_back("summary.n_selected does not match selected_ids");
  if (w.size() != ids.size()) return problems;

  std::set<LatentId> rebuilt;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] >= tau) rebuilt.insert(ids[i]);
  if (rebuilt != std::set<LatentId>(selected.begin(), selected.end()))
    problems.push_back("selected_ids differ from {j : w_j >= tau}");
  if (!(q > 0.0 && q < 1.0)) {
    problems.push_back("selection.q outside (0, 1)");
    return problems;
  }
  const double recomputed = knockoff_plus_threshold(w, q);
  if (recomputed != tau) problems.push_back("tau differs from the knockoff+ threshold recomputed from w");
  if (std::isfinite(tau) && !(knockoff_plus_ratio(w, tau) <= q))
    problems.push_back("knockoff+ inequality fails at tau");
  return problems;
}

RunArtifact artifact_from_json(const Json& doc) {
  const auto problems = validate_artifact(doc);
  if (!problems.empty()) {
    std::string msg = "invalid artifact:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw DataError(msg);
  }
  RunArtifact a;
  a.config = config_from_json(doc["config"]);
  const Json& data = doc.value("data", Json::object());
  a.n_input_rows = data.value("n_input_rows", Eigen::Index{0});
  a.n_input_columns = data.value("n_input_columns", Eigen::Index{0});
  a.n_used = data.value("n_used", Eigen::Index{0});
  a.eigen_threads = doc.value("runtime", Json::object()).value("eigen_threads", 1);
  const Json& ko = doc.value("knockoffs", Json::object());
  a.knockoff_s = ko.value("s", 0.0);
  a.knockoff_jitter = ko.value("jitter", 0.0);
  a.knockoff_clipped = ko.value("clipped_eigenvalues", Eigen::Index{0});

  const Json& fit = doc["fit"];
  a.intercept = fit["intercept"].get<double>();
  a.converged = fit["converged"].get<bool>();
  a.iterations = fit["iterations"].get<int>();
  a.final_objective = fit["final_objective"].get<double>();
  a.kkt_residual = fit["kkt_residual"].get<double>();
  a.accuracy = fit["accuracy"].get<double>();
  a.logloss = fit["logloss"].get<double>();

  const Json& f = doc["features"];
  a.column_ids = f["column_ids"].get<std::vector<LatentId>>();
  a.w = f["w"].get<std::vector<double>>();
  a.energy = f["energy"].get<std::vector<double>>();
  a.activation_rate = f["activation_rate"].get<std::vector<double>>();

  const Json& sel = doc["selection"];
  a.tau = sel["tau"].is_null() ? std::numeric_limits<double>::infinity() : sel["tau"].get<double>();
  a.selected_ids = sel["selected_ids"].get<std::vector<LatentId>>();

  const Json& s = doc["summary"];
  a.summary.n_selected = s["n_selected"].get<Eigen::Index>();
  a.summary.mean_w_selected = read_optional(s["mean_w_selected"]);
  a.summary.sd_w_selected = read_optional(s["sd_w_selected"]);
  a.summary.mean_w_rejected = read_optional(s["mean_w_rejected"]);
  a.summary.mean_abs_w_rejected = read_optional(s["mean_abs_w_rejected"]);
  a.summary.snr = read_optional(s["snr"]);
  a.summary.cohens_d = read_optional(s["cohens_d"]);
  a.summary.positive_fraction = s["positive_fraction"].get<double>();
  a.summary.w_min = s["w_min"].get<double>();
  a.summary.w_max = s["w_max"].get<double>();
  a.summary.w_mean = s["w_mean"].get<double>();
  a.summary.w_median = s["w_median"].get<double>();
  return a;
}

std::vector<FeatureRow> top_features(const RunArtifact& a, std::size_t count) {
  return rows_for(a, ranked(a, true), count);
}

std::vector<FeatureRow> bottom_features(const RunArtifact& a, std::size_t count) {
  return rows_for(a, ranked(a, false), count);
}

std::string histogram_csv(const std::vector<double>& w) {
  std::ostringstream out;
  out << "bin_left,bin_right,count\n";
  if (w.empty()) return out.str();
  const auto [lo_it, hi_it] = std::minmax_element(w.begin(), w.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / kHistogramBins;
  std::vector<std::size_t> counts(kHistogramBins, 0);
  for (double v : w) {
    auto bin = static_cast<int>(std::floor((v - lo) / width));
    counts[static_cast<std::size_t>(std::clamp(bin, 0, kHistogramBins - 1))]++;
  }
  for (int b = 0; b < kHistogramBins; ++b) {
    const double left = lo + width * b;
    const double right = b + 1 == kHistogramBins ? hi : lo + width * (b + 1);
    out << format_number(left) << ',' << format_number(right) << ',' << counts[static_cast<std::size_t>(b)] << '\n';
  }
  return out.str();
}

std::string waterfall_csv(const std::vector<double>& w, const std::vector<LatentId>& ids, double tau) {
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (w[a] != w[b]) return w[a] > w[b];
    return ids[a] < ids[b];
  });
  std::ostringstream out;
  out << "rank,latent,w,selected\n";
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto i = order[r];
    out << r + 1 << ',' << ids[i] << ',' << format_number(w[i]) << ',' << (w[i] >= tau ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string cdf_csv(const std::vector<double>& w) {
  std::vector<double> sorted = w;
  std::sort(sorted.begin(), sorted.end());
  std::ostringstream out;
  out << "w,fraction\n";
  const auto n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out << format_number(sorted[i]) << ',' << format_number(static_cast<double>(i + 1) / n) << '\n';
  return out.str();
}

std::vector<std::filesystem::path> emit_report(const RunArtifact& a, const std::filesystem::path& out_dir) {
  const bool existed = std::filesystem::exists(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  const std::vector<std::pair<const char*, std::string>> files = {
      {kArtifactFile, artifact_to_json(a).dump(2) + "\n"},
      {kTimingsFile, timings_to_json(a).dump(2) + "\n"},
      {kHistogramFile, histogram_csv(a.w)},
      {kWaterfallFile, waterfall_csv(a.w, a.column_ids, a.tau)},
      {kCdfFile, cdf_csv(a.w)},
      {kTopFile, table_csv(top_features(a, static_cast<std::size_t>(a.config.top_n)))},
      {kBottomFile, table_csv(bottom_features(a, static_cast<std::size_t>(a.config.bottom_n)))},
  };

  std::vector<std::filesystem::path> written;
  try {
    for (const auto& [name, content] : files) {
      const auto path = out_dir / name;
      write_text(path, content);
      written.push_back(path);
    }
  } catch (...) {
    for (const auto& path : written) std::filesystem::remove(path, ec);
    if (!existed) std::filesystem::remove(out_dir, ec);
    throw;
  }
  return written;
}

}  // namespace knockoff
