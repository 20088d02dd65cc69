#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxrerank/bpr.hpp"
#include "ctxrerank/context.hpp"

namespace ctxrerank {

struct ExternalListsConfig {
  std::string name;
  std::string path;
};

struct PlaylistAnalysisConfig {
  // One corpus file per dimension.
  std::map<std::string, std::string> corpus_paths;
  double alpha = 0.05;
  bool welch = true;
};

// Declarative pipeline configuration, one JSON file, validated up front.
struct PipelineConfig {
  std::string catalog_path;
  bool catalog_normalized = true;
  std::string events_path;

  HourBuckets buckets = HourBuckets::default_time_of_day();

  std::size_t min_song_plays = 0;
  std::size_t min_user_events = 0;
  bool filter_fixpoint = false;

  std::vector<std::string> algorithms = {"bpr"};  // bpr | us-bpr
  BprHyperparameters bpr;
  std::vector<ExternalListsConfig> external_lists;

  std::vector<std::size_t> list_sizes = {200, 100, 50, 25};
  std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                     0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::size_t> k_values = {10};
  std::vector<std::string> modes = {"regular", "opposite"};

  std::size_t folds = 5;
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
  std::string output_dir = "out";

  std::optional<PlaylistAnalysisConfig> analysis;

  // Optional feature subset for preference models; empty = all nine.
  std::vector<std::string> feature_mask;
};

PipelineConfig load_config(const std::string& path);

// Throws ValidationError on missing paths, lambdas outside [0,1], or
// list sizes smaller than max(k).
void validate_config(const PipelineConfig& cfg);

}  // namespace ctxrerank
