#include "ctxrerank/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "ctxrerank/errors.hpp"
#include "json.hpp"

namespace ctxrerank {

namespace {

using nlohmann::json;

HourBuckets buckets_from_json(const json& j) {
  HourBuckets b;
  b.dimension.name = j.value("name", "time_of_day");
  if (!j.contains("hours")) {
    if (b.dimension.name == "time_of_day") return HourBuckets::default_time_of_day();
    throw ValidationError("dimension config: non-default dimension needs hours");
  }
  const auto& hours = j.at("hours");
  for (auto it = hours.begin(); it != hours.end(); ++it) {
    b.dimension.conditions.push_back(it.key());
  }
  validate_dimension(b.dimension);
  std::array<bool, 24> covered{};
  for (auto it = hours.begin(); it != hours.end(); ++it) {
    const std::size_t idx = b.dimension.condition_index(it.key());
    for (const auto& h : it.value()) {
      const int hour = h.get<int>();
      if (hour < 0 || hour > 23) {
        throw ValidationError("dimension config: hour out of range");
      }
      if (covered[static_cast<std::size_t>(hour)]) {
        throw ValidationError("dimension config: hour assigned twice: " +
                              std::to_string(hour));
      }
      covered[static_cast<std::size_t>(hour)] = true;
      b.condition_by_hour[static_cast<std::size_t>(hour)] = idx;
    }
  }
  for (int h = 0; h < 24; ++h) {
    if (!covered[static_cast<std::size_t>(h)]) {
      throw ValidationError("dimension config: hour unassigned: " +
                            std::to_string(h));
    }
  }
  return b;
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("config parse error: " + std::string(e.what()));
  }

  PipelineConfig cfg;
  if (j.contains("catalog")) {
    cfg.catalog_path = j["catalog"].value("path", "");
    cfg.catalog_normalized = j["catalog"].value("normalized", true);
  }
  if (j.contains("events")) cfg.events_path = j["events"].value("path", "");
  if (j.contains("dimension")) cfg.buckets = buckets_from_json(j["dimension"]);
  if (j.contains("filter")) {
    const auto& f = j["filter"];
    cfg.min_song_plays = f.value("min_song_plays", 0u);
    cfg.min_user_events = f.value("min_user_events", 0u);
    cfg.filter_fixpoint = f.value("fixpoint", false);
  }
  if (j.contains("recommender")) {
    const auto& r = j["recommender"];
    if (r.contains("algorithms")) {
      cfg.algorithms = r["algorithms"].get<std::vector<std::string>>();
    }
    cfg.bpr.factors = r.value("factors", cfg.bpr.factors);
    cfg.bpr.learning_rate = r.value("learning_rate", cfg.bpr.learning_rate);
    cfg.bpr.regularization =
        r.value("regularization", cfg.bpr.regularization);
    cfg.bpr.epochs = r.value("epochs", cfg.bpr.epochs);
    cfg.bpr.negative_samples =
        r.value("negative_samples", cfg.bpr.negative_samples);
  }
  if (j.contains("external_lists")) {
    for (const auto& e : j["external_lists"]) {
      cfg.external_lists.push_back(
          {e.value("name", "external"), e.at("path").get<std::string>()});
    }
  }
  if (j.contains("list_sizes")) {
    cfg.list_sizes = j["list_sizes"].get<std::vector<std::size_t>>();
  }
  if (j.contains("lambda_grid")) {
    cfg.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
  }
  if (j.contains("k_values")) {
    cfg.k_values = j["k_values"].get<std::vector<std::size_t>>();
  }
  if (j.contains("modes")) {
    cfg.modes = j["modes"].get<std::vector<std::string>>();
  }
  cfg.folds = j.value("folds", 5u);
  cfg.seed = j.value("seed", 42ull);
  cfg.jobs = j.value("jobs", 1u);
  cfg.output_dir = j.value("output", "out");
  if (j.contains("analysis")) {
    PlaylistAnalysisConfig a;
    const auto& ja = j["analysis"];
    if (ja.contains("corpora")) {
      for (auto it = ja["corpora"].begin(); it != ja["corpora"].end(); ++it) {
        a.corpus_paths[it.key()] = it.value().get<std::string>();
      }
    }
    a.alpha = ja.value("alpha", 0.05);
    a.welch = ja.value("welch", true);
    cfg.analysis = std::move(a);
  }
  if (j.contains("feature_mask")) {
    cfg.feature_mask = j["feature_mask"].get<std::vector<std::string>>();
  }
  return cfg;
}

void validate_config(const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  auto need_file = [](const std::string& p, const std::string& what) {
    if (p.empty()) throw ValidationError("config: missing " + what + " path");
    if (!fs::exists(p)) {
      throw ValidationError("config: " + what + " path does not exist: " + p);
    }
  };
  need_file(cfg.catalog_path, "catalog");
  need_file(cfg.events_path, "events");
  for (const auto& e : cfg.external_lists) need_file(e.path, e.name);
  if (cfg.analysis) {
    for (const auto& [dim, p] : cfg.analysis->corpus_paths) {
      need_file(p, "corpus for " + dim);
    }
  }
  for (double l : cfg.lambda_grid) {
    if (l < 0.0 || l > 1.0) {
      throw ValidationError("config: lambda out of [0,1]");
    }
  }
  if (cfg.lambda_grid.empty()) throw ValidationError("config: empty lambda grid");
  if (cfg.k_values.empty()) throw ValidationError("config: empty k values");
  if (cfg.list_sizes.empty()) throw ValidationError("config: empty list sizes");
  const std::size_t max_k =
      *std::max_element(cfg.k_values.begin(), cfg.k_values.end());
  for (std::size_t n : cfg.list_sizes) {
    if (n < max_k) {
      throw ValidationError("config: list size " + std::to_string(n) +
                            " smaller than max k");
    }
  }
  for (const auto& m : cfg.modes) {
    if (m != "regular" && m != "opposite") {
      throw ValidationError("config: unknown mode " + m);
    }
  }
  for (const auto& a : cfg.algorithms) {
    if (a != "bpr" && a != "us-bpr") {
      throw ValidationError("config: unknown algorithm " + a);
    }
  }
  for (const auto& f : cfg.feature_mask) {
    if (feature_index(f) == kNumFeatures) {
      throw ValidationError("config: unknown feature in mask: " + f);
    }
  }
  if (cfg.folds < 2) throw ValidationError("config: folds must be >= 2");
}

}  // namespace ctxrerank
