#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctxrerank/ingestion.hpp"

namespace ctxrerank {

struct BprHyperparameters {
  std::size_t factors = 10;
  double learning_rate = 0.05;
  double regularization = 0.01;
  std::size_t epochs = 100;
  std::size_t negative_samples = 1;  // per positive, uniform
};

// Pairwise implicit-feedback ranker trained by SGD on sampled
// (user, positive, negative) triples. Training is single-threaded and
// deterministic for a given seed.
class BprModel {
 public:
  static BprModel train(const Dataset& train, const BprHyperparameters& hyper,
                        std::uint64_t seed);

  // Dot product of latent factors plus item bias. Unknown users score by
  // item bias alone; unknown items are an error.
  double score(const std::string& user_id, const std::string& song_id) const;

  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::string>& items() const { return items_; }
  bool has_user(const std::string& user_id) const;
  const std::vector<double>& epoch_auc() const { return epoch_auc_; }
  const BprHyperparameters& hyper() const { return hyper_; }

  // Assemble a model from explicit factors; used for inspection and in
  // tests of the scoring contract.
  static BprModel from_parts(std::vector<std::string> users,
                             std::vector<std::string> items,
                             std::vector<double> user_factors,
                             std::vector<double> item_factors,
                             std::vector<double> item_bias,
                             BprHyperparameters hyper);

 private:
  BprHyperparameters hyper_;
  std::vector<std::string> users_;
  std::vector<std::string> items_;
  std::map<std::string, std::size_t> user_index_;
  std::map<std::string, std::size_t> item_index_;
  std::vector<double> user_factors_;  // users x factors, row-major
  std::vector<double> item_factors_;  // items x factors, row-major
  std::vector<double> item_bias_;
  std::vector<double> epoch_auc_;  // sampled-triple AUC per epoch

  double score_idx(std::size_t u, std::size_t i) const;
};

struct ListEntry {
  std::string song_id;
  double score = 0.0;
  // Audit fields filled by re-ranking.
  double sim = 0.0;
  double rec_norm = 0.0;
  double new_score = 0.0;
};

// Ordered (song, score) list for one (user, condition), scores
// non-increasing, ties broken by ascending song id.
struct RecommendationList {
  std::string user_id;
  std::string condition;
  std::vector<ListEntry> entries;
  std::string source;
};

// Top-n catalog songs by score for `user_id`, excluding `exclude` (the
// user's training items). Shorter than n when the catalog runs out.
RecommendationList recommend_top_n(const BprModel& model,
                                   const std::string& user_id, std::size_t n,
                                   const std::set<std::string>& exclude);

// Bijection between (user, condition) pairs that have events and the
// virtual user ids used for user-splitting pre-filtering.
struct VirtualUserMap {
  std::map<std::pair<std::string, std::string>, std::string> to_virtual;
  std::map<std::string, std::pair<std::string, std::string>> from_virtual;
};

// Replaces each event's user with a per-(user, condition) virtual user.
std::pair<Dataset, VirtualUserMap> user_split(const Dataset& train,
                                              const ContextDimension& dimension);

struct ExternalListsLoadResult {
  std::vector<RecommendationList> lists;
  std::size_t dropped_unknown_song = 0;
  std::size_t resort_warnings = 0;
};

// External-list bridge format: `user_id,condition,rank,song_id,score`.
// Lists violating the descending-score invariant are re-sorted with a
// warning; entries missing from the catalog are dropped and counted.
ExternalListsLoadResult load_external_lists(const std::string& path,
                                            const Catalog& catalog);

void write_lists(const std::string& path,
                 const std::vector<RecommendationList>& lists,
                 bool audit_columns);

}  // namespace ctxrerank
