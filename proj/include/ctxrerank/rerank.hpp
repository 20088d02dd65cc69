#pragma once

#include <functional>
#include <vector>

#include "ctxrerank/bpr.hpp"
#include "ctxrerank/features.hpp"

namespace ctxrerank {

enum class RerankMode { kRegular, kOpposite };

struct RerankConfig {
  double lambda = 0.5;
  RerankMode mode = RerankMode::kRegular;
  // Optional feature subset for the similarity term; empty = all nine.
  std::vector<std::size_t> feature_mask;
};

// Resolves the preference vector for a (user, condition) pair; expected
// to be total (cold pairs resolve through the model fallback chain).
using ModelLookup =
    std::function<FeatureVector(const std::string& user_id,
                                const std::string& condition)>;

// Unity-based normalization of a score list. All-equal lists map to 0.5
// everywhere so that similarity still drives a total order at lambda < 1.
std::vector<double> minmax_normalize(const std::vector<double>& scores);

// new_score = lambda * sim + (1 - lambda) * rec_norm, or with
// (1 - sim) in place of sim for the opposite mode. The result is the
// same song multiset re-sorted descending by new_score, ties by
// ascending song id; audit fields are retained per entry.
RecommendationList rerank(const RecommendationList& list,
                          const Catalog& catalog, const ModelLookup& lookup,
                          const RerankConfig& cfg);

// One re-ranked list set per lambda in `grid`.
std::vector<std::pair<double, std::vector<RecommendationList>>> sweep(
    const std::vector<RecommendationList>& lists, const Catalog& catalog,
    const ModelLookup& lookup, const std::vector<double>& grid,
    RerankMode mode);

}  // namespace ctxrerank
