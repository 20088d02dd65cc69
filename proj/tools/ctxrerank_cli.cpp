#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ctxrerank/errors.hpp"
#include "ctxrerank/pipeline.hpp"

namespace {

// 0 success, 1 validation error, 2 runtime failure.
int guarded(const std::function<void()>& fn) {
  try {
    fn();
    return 0;
  } catch (const ctxrerank::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual re-ranking of music recommendations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  std::size_t jobs_override = 0;
  app.add_option("--config", config_path, "Pipeline config file (JSON)")
      ->required();
  app.add_option("--output", output_override, "Override output directory");
  app.add_option("--seed", seed_override, "Override RNG seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--jobs", jobs_override, "Worker threads for re-ranking");

  auto load = [&]() {
    auto cfg = ctxrerank::load_config(config_path);
    if (!output_override.empty()) cfg.output_dir = output_override;
    if (seed_set) cfg.seed = seed_override;
    if (jobs_override > 0) cfg.jobs = jobs_override;
    ctxrerank::validate_config(cfg);
    return cfg;
  };

  auto* analyze = app.add_subcommand(
      "analyze", "Condition profiles and pairwise t-tests from playlist corpora");

  auto* pipeline = app.add_subcommand(
      "pipeline", "Full experiment: folds, recommenders, re-rank sweep, report");

  auto* rerank_cmd = app.add_subcommand(
      "rerank", "Re-rank external lists against a prebuilt model dump");
  std::string models_path, lists_path;
  rerank_cmd->add_option("--models", models_path, "Model dump file")->required();
  rerank_cmd->add_option("--lists", lists_path, "External-list file")->required();

  auto* prepare = app.add_subcommand(
      "prepare", "Ingest and filter the dataset, write the filtered events");
  std::string prepared_events = "events_filtered.csv";
  prepare->add_option("--events-out", prepared_events, "Output events file");

  auto* train = app.add_subcommand(
      "train", "Build preference models and BPR lists on the full dataset");
  std::string models_out = "models.csv", lists_out = "lists.csv";
  train->add_option("--models-out", models_out, "Model dump output");
  train->add_option("--lists-out", lists_out, "Recommendation list output");

  auto* evaluate = app.add_subcommand(
      "evaluate", "Score a list file against the configured events");
  std::string eval_lists;
  evaluate->add_option("--lists", eval_lists, "List file to evaluate")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) {
    return guarded([&] {
      auto table = ctxrerank::run_analysis(load());
      std::printf("tests=%zu corrected_threshold=%.6g significant=%zu\n",
                  table.tests, table.corrected_threshold,
                  static_cast<std::size_t>(std::count_if(
                      table.results.begin(), table.results.end(),
                      [](const auto& r) { return r.significant; })));
      for (const auto& w : table.warnings) std::cerr << "warning: " << w << "\n";
    });
  }
  if (pipeline->parsed()) {
    return guarded([&] {
      auto report = ctxrerank::run_pipeline(load());
      std::printf("report rows=%zu\n", report.rows.size());
    });
  }
  if (rerank_cmd->parsed()) {
    return guarded([&] { ctxrerank::run_rerank(load(), models_path, lists_path); });
  }
  if (prepare->parsed()) {
    return guarded([&] {
      auto d = ctxrerank::run_prepare(load(), prepared_events);
      std::printf("events=%zu users=%zu songs=%zu\n", d.events.size(),
                  d.users().size(), d.songs().size());
    });
  }
  if (train->parsed()) {
    return guarded([&] { ctxrerank::run_train(load(), models_out, lists_out); });
  }
  if (evaluate->parsed()) {
    return guarded([&] {
      auto report = ctxrerank::run_evaluate(load(), eval_lists);
      std::printf("report rows=%zu\n", report.rows.size());
    });
  }
  return 0;
}
