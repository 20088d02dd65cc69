#include "ctxrerank/rerank.hpp"

#include <algorithm>
#include <cmath>

#include "ctxrerank/errors.hpp"

namespace ctxrerank {

std::vector<double> minmax_normalize(const std::vector<double>& scores) {
  if (scores.empty()) {
    throw ValidationError("minmax_normalize: empty score list");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw ValidationError("minmax_normalize: non-finite score");
    }
  }
  auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(scores.size());
  if (lo == hi) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = (scores[i] - lo) / (hi - lo);
  }
  return out;
}

RecommendationList rerank(const RecommendationList& list,
                          const Catalog& catalog, const ModelLookup& lookup,
                          const RerankConfig& cfg) {
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0) {
    throw ValidationError("rerank: lambda out of [0,1]");
  }
  if (list.entries.empty()) return list;

  const FeatureVector model_vec = lookup(list.user_id, list.condition);
  validate_vector(model_vec, "preference model vector");

  std::vector<double> initial;
  initial.reserve(list.entries.size());
  for (const auto& e : list.entries) initial.push_back(e.score);
  const std::vector<double> rec_norm = minmax_normalize(initial);

  RecommendationList out = list;
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    auto& e = out.entries[i];
    auto it = catalog.find(e.song_id);
    if (it == catalog.end()) {
      throw PipelineError("rerank: song missing features: " + e.song_id);
    }
    e.sim = cfg.feature_mask.empty()
                ? similarity(it->second.features, model_vec)
                : 1.0 - distance_masked(it->second.features, model_vec,
                                        cfg.feature_mask);
    e.rec_norm = rec_norm[i];
    const double context_term =
        cfg.mode == RerankMode::kRegular ? e.sim : 1.0 - e.sim;
    e.new_score =
        cfg.lambda * context_term + (1.0 - cfg.lambda) * e.rec_norm;
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const ListEntry& a, const ListEntry& b) {
              if (a.new_score != b.new_score) return a.new_score > b.new_score;
              return a.song_id < b.song_id;
            });
  return out;
}

std::vector<std::pair<double, std::vector<RecommendationList>>> sweep(
    const std::vector<RecommendationList>& lists, const Catalog& catalog,
    const ModelLookup& lookup, const std::vector<double>& grid,
    RerankMode mode) {
  std::vector<std::pair<double, std::vector<RecommendationList>>> out;
  out.reserve(grid.size());
  for (double lambda : grid) {
    RerankConfig cfg{lambda, mode};
    std::vector<RecommendationList> reranked;
    reranked.reserve(lists.size());
    for (const auto& l : lists) reranked.push_back(rerank(l, catalog, lookup, cfg));
    out.emplace_back(lambda, std::move(reranked));
  }
  return out;
}

}  // namespace ctxrerank
