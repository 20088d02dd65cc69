#include "ctxrerank/bpr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "ctxrerank/csv.hpp"
#include "ctxrerank/errors.hpp"

namespace ctxrerank {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double BprModel::score_idx(std::size_t u, std::size_t i) const {
  const double* pu = &user_factors_[u * hyper_.factors];
  const double* qi = &item_factors_[i * hyper_.factors];
  double s = item_bias_[i];
  for (std::size_t f = 0; f < hyper_.factors; ++f) s += pu[f] * qi[f];
  return s;
}

bool BprModel::has_user(const std::string& user_id) const {
  return user_index_.count(user_id) > 0;
}

double BprModel::score(const std::string& user_id,
                       const std::string& song_id) const {
  auto item_it = item_index_.find(song_id);
  if (item_it == item_index_.end()) {
    throw ValidationError("score: unknown song_id " + song_id);
  }
  auto user_it = user_index_.find(user_id);
  if (user_it == user_index_.end()) {
    return item_bias_[item_it->second];  // cold user: bias only
  }
  return score_idx(user_it->second, item_it->second);
}

BprModel BprModel::train(const Dataset& train, const BprHyperparameters& hyper,
                         std::uint64_t seed) {
  if (train.events.empty()) throw ValidationError("BPR: empty training set");
  if (hyper.factors < 1) throw ValidationError("BPR: factors must be >= 1");
  if (hyper.epochs < 1) throw ValidationError("BPR: epochs must be >= 1");

  BprModel model;
  model.hyper_ = hyper;
  {
    auto users = train.users();
    auto items = train.songs();
    if (users.empty() || items.empty()) {
      throw ValidationError("BPR: empty user or item universe");
    }
    model.users_.assign(users.begin(), users.end());
    model.items_.assign(items.begin(), items.end());
  }
  for (std::size_t i = 0; i < model.users_.size(); ++i) {
    model.user_index_[model.users_[i]] = i;
  }
  for (std::size_t i = 0; i < model.items_.size(); ++i) {
    model.item_index_[model.items_[i]] = i;
  }

  const std::size_t n_users = model.users_.size();
  const std::size_t n_items = model.items_.size();
  const std::size_t d = hyper.factors;

  // Positive (user, item) pairs as indices; per-user positive sets for
  // negative-sample rejection.
  std::vector<std::pair<std::size_t, std::size_t>> positives;
  positives.reserve(train.events.size());
  std::vector<std::set<std::size_t>> user_positives(n_users);
  for (const auto& e : train.events) {
    std::size_t u = model.user_index_[e.user_id];
    std::size_t i = model.item_index_[e.song_id];
    positives.emplace_back(u, i);
    user_positives[u].insert(i);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> init(0.0, 0.1);
  model.user_factors_.resize(n_users * d);
  model.item_factors_.resize(n_items * d);
  model.item_bias_.assign(n_items, 0.0);
  for (auto& v : model.user_factors_) v = init(rng);
  for (auto& v : model.item_factors_) v = init(rng);

  std::uniform_int_distribution<std::size_t> pick_pos(0, positives.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_item(0, n_items - 1);

  const double lr = hyper.learning_rate;
  const double reg = hyper.regularization;

  auto sample_negative = [&](std::size_t u) -> std::size_t {
    // Rejection sampling; a user with every item positive has nothing to
    // learn from, so cap the attempts.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      std::size_t j = pick_item(rng);
      if (!user_positives[u].count(j)) return j;
    }
    return pick_item(rng);
  };

  const std::size_t auc_samples = std::min<std::size_t>(2000, positives.size());
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    const std::size_t updates = positives.size() * hyper.negative_samples;
    for (std::size_t step = 0; step < updates; ++step) {
      auto [u, i] = positives[pick_pos(rng)];
      std::size_t j = sample_negative(u);
      if (i == j) continue;

      double* pu = &model.user_factors_[u * d];
      double* qi = &model.item_factors_[i * d];
      double* qj = &model.item_factors_[j * d];
      const double x_uij = model.score_idx(u, i) - model.score_idx(u, j);
      const double g = sigmoid(-x_uij);

      for (std::size_t f = 0; f < d; ++f) {
        const double w = pu[f];
        pu[f] += lr * (g * (qi[f] - qj[f]) - reg * w);
        qi[f] += lr * (g * w - reg * qi[f]);
        qj[f] += lr * (-g * w - reg * qj[f]);
      }
      model.item_bias_[i] += lr * (g - reg * model.item_bias_[i]);
      model.item_bias_[j] += lr * (-g - reg * model.item_bias_[j]);
    }

    // Held-in AUC over freshly sampled triples.
    std::size_t wins = 0;
    for (std::size_t s = 0; s < auc_samples; ++s) {
      auto [u, i] = positives[pick_pos(rng)];
      std::size_t j = sample_negative(u);
      if (model.score_idx(u, i) > model.score_idx(u, j)) ++wins;
    }
    model.epoch_auc_.push_back(static_cast<double>(wins) /
                               static_cast<double>(auc_samples));
  }

  for (double v : model.user_factors_) {
    if (!std::isfinite(v)) throw PipelineError("BPR: training diverged");
  }
  return model;
}

BprModel BprModel::from_parts(std::vector<std::string> users,
                              std::vector<std::string> items,
                              std::vector<double> user_factors,
                              std::vector<double> item_factors,
                              std::vector<double> item_bias,
                              BprHyperparameters hyper) {
  BprModel m;
  m.hyper_ = hyper;
  if (user_factors.size() != users.size() * hyper.factors ||
      item_factors.size() != items.size() * hyper.factors ||
      item_bias.size() != items.size()) {
    throw ValidationError("BPR from_parts: inconsistent sizes");
  }
  m.users_ = std::move(users);
  m.items_ = std::move(items);
  for (std::size_t i = 0; i < m.users_.size(); ++i) m.user_index_[m.users_[i]] = i;
  for (std::size_t i = 0; i < m.items_.size(); ++i) m.item_index_[m.items_[i]] = i;
  m.user_factors_ = std::move(user_factors);
  m.item_factors_ = std::move(item_factors);
  m.item_bias_ = std::move(item_bias);
  return m;
}

RecommendationList recommend_top_n(const BprModel& model,
                                   const std::string& user_id, std::size_t n,
                                   const std::set<std::string>& exclude) {
  if (n < 1) throw ValidationError("recommend_top_n: n must be >= 1");
  RecommendationList list;
  list.user_id = user_id;
  list.source = "bpr";
  std::vector<ListEntry> scored;
  scored.reserve(model.items().size());
  for (const auto& song : model.items()) {
    if (exclude.count(song)) continue;
    scored.push_back({song, model.score(user_id, song)});
  }
  std::sort(scored.begin(), scored.end(),
            [](const ListEntry& a, const ListEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.song_id < b.song_id;
            });
  if (scored.size() > n) scored.resize(n);
  list.entries = std::move(scored);
  return list;
}

std::pair<Dataset, VirtualUserMap> user_split(
    const Dataset& train, const ContextDimension& dimension) {
  Dataset out;
  VirtualUserMap map;
  out.events.reserve(train.events.size());
  for (const auto& e : train.events) {
    dimension.condition_index(e.condition);  // validates
    auto key = std::make_pair(e.user_id, e.condition);
    auto it = map.to_virtual.find(key);
    if (it == map.to_virtual.end()) {
      std::string vid = e.user_id + "@" + e.condition;
      it = map.to_virtual.emplace(key, vid).first;
      map.from_virtual.emplace(vid, key);
    }
    ListeningEvent ve = e;
    ve.user_id = it->second;
    out.events.push_back(std::move(ve));
  }
  return {std::move(out), std::move(map)};
}

ExternalListsLoadResult load_external_lists(const std::string& path,
                                            const Catalog& catalog) {
  std::ifstream in;
  auto header = open_delimited(path, in);
  if (header.size() < 5 || header[0] != "user_id" || header[1] != "condition" ||
      header[2] != "rank" || header[3] != "song_id" || header[4] != "score") {
    throw ValidationError(
        path + ": expected header user_id,condition,rank,song_id,score");
  }
  ExternalListsLoadResult result;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() < 5) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected 5 fields");
    }
    if (!catalog.count(fields[3])) {
      ++result.dropped_unknown_song;
      continue;
    }
    double score;
    try {
      score = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": bad score '" + fields[4] + "'");
    }
    auto key = std::make_pair(fields[0], fields[1]);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, result.lists.size()).first;
      RecommendationList l;
      l.user_id = fields[0];
      l.condition = fields[1];
      l.source = "external";
      result.lists.push_back(std::move(l));
    }
    result.lists[it->second].entries.push_back({fields[3], score});
  }
  for (auto& l : result.lists) {
    bool sorted = std::is_sorted(l.entries.begin(), l.entries.end(),
                                 [](const ListEntry& a, const ListEntry& b) {
                                   return a.score > b.score;
                                 });
    if (!sorted) {
      ++result.resort_warnings;
      std::stable_sort(l.entries.begin(), l.entries.end(),
                       [](const ListEntry& a, const ListEntry& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.song_id < b.song_id;
                       });
    }
  }
  return result;
}

void write_lists(const std::string& path,
                 const std::vector<RecommendationList>& lists,
                 bool audit_columns) {
  std::ofstream out(path);
  if (!out) throw PipelineError("cannot write lists: " + path);
  out << "user_id,condition,rank,song_id,score";
  if (audit_columns) out << ",sim,rec_norm,new_score";
  out << '\n';
  out << std::setprecision(17);
  for (const auto& l : lists) {
    std::size_t rank = 1;
    for (const auto& e : l.entries) {
      out << l.user_id << ',' << l.condition << ',' << rank++ << ','
          << e.song_id << ',' << e.score;
      if (audit_columns) {
        out << ',' << e.sim << ',' << e.rec_norm << ',' << e.new_score;
      }
      out << '\n';
    }
  }
}

}  // namespace ctxrerank
