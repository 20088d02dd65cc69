#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctxrerank/bpr.hpp"
#include "ctxrerank/ingestion.hpp"

namespace ctxrerank {

struct FoldSplit {
  std::size_t fold_index = 0;
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
};

// Events shuffled by a seeded RNG and partitioned into k near-equal
// blocks; fold i tests on block i.
std::vector<FoldSplit> make_folds(const Dataset& d, std::size_t k_folds,
                                  std::uint64_t seed);

// Relevant songs per (user, condition), derived from test events only.
using RelevanceSet =
    std::map<std::pair<std::string, std::string>, std::set<std::string>>;

RelevanceSet relevance_from_test(const Dataset& test);

// |top-k hits| / k; the denominator stays k for short lists.
double precision_at_k(const RecommendationList& list,
                      const std::set<std::string>& relevant, std::size_t k);

// Sum of precision-at-i over relevant positions i <= k, divided by
// min(|relevant|, k). Zero when `relevant` is empty.
double average_precision_at_k(const RecommendationList& list,
                              const std::set<std::string>& relevant,
                              std::size_t k);

double map_at_k(const std::vector<double>& average_precisions);

// One report row: metrics for a (variant, mode, lambda) cell, averaged
// over all lists pooled across folds.
struct ReportRow {
  std::string algorithm;
  std::string variant;  // initial | global | personalized
  std::string mode;     // regular | opposite | - (initial)
  double lambda = 0.0;
  std::size_t list_size = 0;
  std::size_t k = 0;
  double prec_at_k = 0.0;
  double map_at_k = 0.0;
  std::size_t folds = 0;
  std::size_t lists = 0;
};

struct EvaluationReport {
  std::vector<ReportRow> rows;
};

// Metric accumulator pooled across folds: feed per-fold lists, read the
// averaged row at the end.
class MetricAccumulator {
 public:
  void add(const std::vector<RecommendationList>& lists,
           const RelevanceSet& relevance, std::size_t k);
  void merge(const MetricAccumulator& other);
  double mean_precision() const;
  double mean_ap() const;
  std::size_t count() const { return n_; }

 private:
  double prec_sum_ = 0.0;
  double ap_sum_ = 0.0;
  std::size_t n_ = 0;
};

// Wide summary table: one file per (algorithm, list size), variant
// rows by lambda columns. Also a long-format row dump for plotting.
void write_report_table(const std::string& path, const EvaluationReport& report,
                        const std::string& algorithm, std::size_t list_size,
                        std::size_t k, const std::vector<double>& lambdas);
void write_report_long(const std::string& path,
                       const EvaluationReport& report);

}  // namespace ctxrerank
