#pragma once

#include <string>

#include "ctxrerank/config.hpp"
#include "ctxrerank/eval.hpp"
#include "ctxrerank/stats.hpp"

namespace ctxrerank {

// Context-audio-feature analysis: per-condition profiles plus pairwise
// t-tests with Bonferroni correction, written as delimited tables.
AnalysisTable run_analysis(const PipelineConfig& cfg);

// Full experiment: ingest, filter, cross-validate, train or load initial
// recommenders, build preference models per train fold, lambda-sweep
// re-rank, evaluate, and write report tables into cfg.output_dir.
EvaluationReport run_pipeline(const PipelineConfig& cfg);

// Standalone re-ranking of external lists against a prebuilt model dump.
// Writes one re-ranked list file (with audit columns) per lambda/mode
// into cfg.output_dir.
void run_rerank(const PipelineConfig& cfg, const std::string& model_dump_path,
                const std::string& lists_path);

// Composable stages.
Dataset run_prepare(const PipelineConfig& cfg, const std::string& out_events);
void run_train(const PipelineConfig& cfg, const std::string& out_models,
               const std::string& out_lists);
EvaluationReport run_evaluate(const PipelineConfig& cfg,
                              const std::string& lists_path);

}  // namespace ctxrerank
