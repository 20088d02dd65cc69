#include "ctxrerank/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "ctxrerank/errors.hpp"
#include "ctxrerank/models.hpp"
#include "ctxrerank/rerank.hpp"

namespace ctxrerank {

namespace fs = std::filesystem;

namespace {

struct LoadedData {
  Catalog catalog;
  Dataset dataset;
  FilterStats filter_stats;
  EventsLoadResult events_result;
};

LoadedData load_and_filter(const PipelineConfig& cfg) {
  LoadedData d;
  auto cat = load_feature_catalog(cfg.catalog_path, cfg.catalog_normalized);
  d.catalog = std::move(cat.catalog);
  d.events_result = load_events(cfg.events_path, d.catalog, cfg.buckets);
  d.dataset =
      filter_dataset(d.events_result.dataset, cfg.min_song_plays,
                     cfg.min_user_events, &d.filter_stats, cfg.filter_fixpoint);
  return d;
}

std::vector<std::size_t> mask_indices(const PipelineConfig& cfg) {
  std::vector<std::size_t> idx;
  for (const auto& name : cfg.feature_mask) idx.push_back(feature_index(name));
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw PipelineError("cannot create output dir: " + dir);
}

RecommendationList truncated(const RecommendationList& list, std::size_t n) {
  RecommendationList out = list;
  if (out.entries.size() > n) out.entries.resize(n);
  return out;
}

// Runs fn(i) for i in [0, count) on up to `jobs` workers. Each index owns
// its output slot, so scheduling cannot change results.
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::size_t n_workers = std::min(jobs, count);
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&, w]() {
      for (std::size_t i = w; i < count; i += n_workers) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

struct InitialLists {
  // Per (user, condition) key, at the largest configured list size.
  std::vector<RecommendationList> lists;
};

std::set<std::string> user_train_songs(const Dataset& train,
                                       const std::string& user_id) {
  std::set<std::string> out;
  for (const auto& e : train.events) {
    if (e.user_id == user_id) out.insert(e.song_id);
  }
  return out;
}

InitialLists generate_bpr_lists(const Dataset& train, const RelevanceSet& rel,
                                const PipelineConfig& cfg, std::uint64_t seed,
                                bool split_users) {
  InitialLists out;
  const std::size_t max_n =
      *std::max_element(cfg.list_sizes.begin(), cfg.list_sizes.end());

  if (!split_users) {
    BprModel model = BprModel::train(train, cfg.bpr, seed);
    std::map<std::string, std::set<std::string>> train_songs;
    for (const auto& e : train.events) train_songs[e.user_id].insert(e.song_id);
    for (const auto& [key, _] : rel) {
      const auto& [user, cond] = key;
      auto ts_it = train_songs.find(user);
      static const std::set<std::string> kEmpty;
      RecommendationList list = recommend_top_n(
          model, user, max_n, ts_it == train_songs.end() ? kEmpty : ts_it->second);
      list.condition = cond;
      out.lists.push_back(std::move(list));
    }
    return out;
  }

  auto [split_train, vmap] = user_split(train, cfg.buckets.dimension);
  BprModel model = BprModel::train(split_train, cfg.bpr, seed);
  // Per-user exclusion covers all of the user's training songs across
  // conditions, keeping the no-train-leakage invariant of the lists.
  std::map<std::string, std::set<std::string>> train_songs;
  std::map<std::string, std::size_t> virtual_support;
  for (const auto& e : train.events) train_songs[e.user_id].insert(e.song_id);
  for (const auto& e : split_train.events) ++virtual_support[e.user_id];

  for (const auto& [key, _] : rel) {
    const auto& [user, cond] = key;
    std::string virtual_id = user + "@" + cond;
    if (!model.has_user(virtual_id)) {
      // Cold virtual user: fall back to the same user's trained profile
      // with the largest support; bias-only ranking when none exists.
      std::size_t best_support = 0;
      std::string best;
      for (const auto& c : cfg.buckets.dimension.conditions) {
        std::string candidate = user + "@" + c;
        auto it = virtual_support.find(candidate);
        if (it != virtual_support.end() && model.has_user(candidate) &&
            (best.empty() || it->second > best_support)) {
          best = candidate;
          best_support = it->second;
        }
      }
      virtual_id = best.empty() ? user + "@" + cond : best;
    }
    auto ts_it = train_songs.find(user);
    static const std::set<std::string> kEmpty;
    RecommendationList list = recommend_top_n(
        model, virtual_id, max_n,
        ts_it == train_songs.end() ? kEmpty : ts_it->second);
    list.user_id = user;
    list.condition = cond;
    list.source = "us-bpr";
    out.lists.push_back(std::move(list));
  }
  return out;
}

struct Cell {
  std::string variant;  // global | personalized
  std::string mode;     // regular | opposite
  double lambda = 0.0;
  std::size_t list_size = 0;
  std::size_t k = 0;
};

std::string cell_key(const std::string& algorithm, const std::string& variant,
                     const std::string& mode, double lambda,
                     std::size_t list_size, std::size_t k) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s|%s|%s|%.1f|%zu|%zu", algorithm.c_str(),
                variant.c_str(), mode.c_str(), lambda, list_size, k);
  return buf;
}

}  // namespace

AnalysisTable run_analysis(const PipelineConfig& cfg) {
  if (!cfg.analysis || cfg.analysis->corpus_paths.empty()) {
    throw ValidationError("analysis: no playlist corpora configured");
  }
  auto cat = load_feature_catalog(cfg.catalog_path, cfg.catalog_normalized);

  std::map<std::string, std::map<std::string, PlaylistCorpus>> corpora;
  std::vector<ConditionProfile> profiles;
  for (const auto& [dim, path] : cfg.analysis->corpus_paths) {
    corpora[dim] = load_playlist_corpus(path, cat.catalog);
    for (const auto& [_, corpus] : corpora[dim]) {
      profiles.push_back(condition_profile(corpus));
    }
  }
  AnalysisTable table =
      compare_all(corpora, cfg.analysis->alpha, cfg.analysis->welch);

  ensure_dir(cfg.output_dir);
  write_analysis_table(cfg.output_dir + "/ttests.csv", table);
  write_condition_profiles(cfg.output_dir + "/condition_profiles.csv",
                           profiles);
  return table;
}

EvaluationReport run_pipeline(const PipelineConfig& cfg) {
  LoadedData data = load_and_filter(cfg);
  if (data.dataset.events.empty()) {
    throw ValidationError("pipeline: dataset empty after filtering");
  }
  ensure_dir(cfg.output_dir);

  const std::vector<std::size_t> mask = mask_indices(cfg);
  auto folds = make_folds(data.dataset, cfg.folds, cfg.seed);

  // Source name -> native flag.
  std::vector<std::pair<std::string, bool>> sources;
  for (const auto& a : cfg.algorithms) sources.emplace_back(a, true);
  std::map<std::string, std::vector<RecommendationList>> external;
  for (const auto& e : cfg.external_lists) {
    auto loaded = load_external_lists(e.path, data.catalog);
    external[e.name] = std::move(loaded.lists);
    sources.emplace_back(e.name, false);
  }

  // algorithm/cell key -> accumulator pooled over folds.
  std::map<std::string, MetricAccumulator> cells;
  std::map<std::string, std::size_t> cell_folds;

  for (const auto& fold : folds) {
    const RelevanceSet rel = relevance_from_test(fold.test);
    GlobalModel global =
        GlobalModel::build(fold.train, data.catalog, cfg.buckets.dimension);
    PersonalizedModel personal = PersonalizedModel::build(
        fold.train, data.catalog, cfg.buckets.dimension, global);

    ModelLookup global_lookup = [&](const std::string&,
                                    const std::string& cond) {
      return global.lookup(cond);
    };
    ModelLookup personal_lookup = [&](const std::string& user,
                                      const std::string& cond) {
      return personal.lookup(user, cond);
    };

    for (const auto& [source, native] : sources) {
      InitialLists initial;
      if (native) {
        initial = generate_bpr_lists(fold.train, rel, cfg,
                                     cfg.seed + fold.fold_index,
                                     source == "us-bpr");
      } else {
        // External lists are fold-independent input; models and
        // relevance still vary per fold.
        initial.lists = external[source];
      }
      if (initial.lists.empty()) continue;

      for (std::size_t n : cfg.list_sizes) {
        std::vector<RecommendationList> lists_n;
        lists_n.reserve(initial.lists.size());
        for (const auto& l : initial.lists) lists_n.push_back(truncated(l, n));

        for (std::size_t k : cfg.k_values) {
          auto key = cell_key(source, "initial", "-", 0.0, n, k);
          cells[key].add(lists_n, rel, k);
          ++cell_folds[key];
        }

        std::vector<Cell> todo;
        for (const auto& variant : {std::string("global"),
                                    std::string("personalized")}) {
          for (const auto& mode : cfg.modes) {
            for (double lambda : cfg.lambda_grid) {
              for (std::size_t k : cfg.k_values) {
                todo.push_back({variant, mode, lambda, n, k});
              }
            }
          }
        }
        std::vector<std::pair<std::string, MetricAccumulator>> results(
            todo.size());
        parallel_for(todo.size(), cfg.jobs, [&](std::size_t i) {
          const Cell& c = todo[i];
          const ModelLookup& lookup =
              c.variant == "global" ? global_lookup : personal_lookup;
          RerankConfig rc;
          rc.lambda = c.lambda;
          rc.mode = c.mode == "regular" ? RerankMode::kRegular
                                        : RerankMode::kOpposite;
          rc.feature_mask = mask;
          MetricAccumulator acc;
          std::vector<RecommendationList> reranked;
          reranked.reserve(lists_n.size());
          for (const auto& l : lists_n) {
            RecommendationList rr = rerank(l, data.catalog, lookup, rc);
            reranked.push_back(std::move(rr));
          }
          acc.add(reranked, rel, c.k);
          results[i] = {cell_key(source, c.variant, c.mode, c.lambda, c.list_size,
                                 c.k),
                        acc};
        });
        for (std::size_t i = 0; i < todo.size(); ++i) {
          auto& [key, acc] = results[i];
          cells[key].merge(acc);
          ++cell_folds[key];
        }
      }
    }
  }

  EvaluationReport report;
  for (const auto& [key, acc] : cells) {
    // Key format: algorithm|variant|mode|lambda|n|k.
    auto fields = std::vector<std::string>();
    std::size_t start = 0;
    while (true) {
      auto pos = key.find('|', start);
      if (pos == std::string::npos) {
        fields.push_back(key.substr(start));
        break;
      }
      fields.push_back(key.substr(start, pos - start));
      start = pos + 1;
    }
    ReportRow row;
    row.algorithm = fields[0];
    row.variant = fields[1];
    row.mode = fields[2];
    row.lambda = std::stod(fields[3]);
    row.list_size = std::stoul(fields[4]);
    row.k = std::stoul(fields[5]);
    row.prec_at_k = acc.mean_precision();
    row.map_at_k = acc.mean_ap();
    row.folds = cell_folds[key];
    row.lists = acc.count();
    report.rows.push_back(std::move(row));
  }

  // Wide summary tables plus the long format for plotting.
  for (const auto& [source, _] : sources) {
    for (std::size_t n : cfg.list_sizes) {
      for (std::size_t k : cfg.k_values) {
        char name[128];
        std::snprintf(name, sizeof(name), "/report_%s_top%zu_at%zu.csv",
                      source.c_str(), n, k);
        write_report_table(cfg.output_dir + name, report, source, n, k,
                           cfg.lambda_grid);
      }
    }
  }
  write_report_long(cfg.output_dir + "/report_long.csv", report);
  return report;
}

void run_rerank(const PipelineConfig& cfg, const std::string& model_dump_path,
                const std::string& lists_path) {
  auto cat = load_feature_catalog(cfg.catalog_path, cfg.catalog_normalized);
  auto [global, personal] = load_models(model_dump_path);
  auto loaded = load_external_lists(lists_path, cat.catalog);
  if (loaded.lists.empty()) {
    throw ValidationError("rerank: no lists in " + lists_path);
  }
  ensure_dir(cfg.output_dir);

  ModelLookup lookup;
  if (personal) {
    const PersonalizedModel& p = *personal;
    lookup = [&p](const std::string& u, const std::string& c) {
      return p.lookup(u, c);
    };
  } else {
    const GlobalModel& g = global;
    lookup = [&g](const std::string&, const std::string& c) {
      return g.lookup(c);
    };
  }

  for (const auto& mode : cfg.modes) {
    RerankMode m =
        mode == "regular" ? RerankMode::kRegular : RerankMode::kOpposite;
    auto swept = sweep(loaded.lists, cat.catalog, lookup, cfg.lambda_grid, m);
    for (const auto& [lambda, lists] : swept) {
      char name[128];
      std::snprintf(name, sizeof(name), "/reranked_%s_lambda_%.1f.csv",
                    mode.c_str(), lambda);
      write_lists(cfg.output_dir + name, lists, true);
    }
  }
}

Dataset run_prepare(const PipelineConfig& cfg, const std::string& out_events) {
  LoadedData data = load_and_filter(cfg);
  std::ofstream out(out_events);
  if (!out) throw PipelineError("cannot write events: " + out_events);
  out << "user_id,song_id,timestamp_local_iso8601\n";
  for (const auto& e : data.dataset.events) {
    out << e.user_id << ',' << e.song_id << ',' << e.timestamp << '\n';
  }
  return data.dataset;
}

void run_train(const PipelineConfig& cfg, const std::string& out_models,
               const std::string& out_lists) {
  LoadedData data = load_and_filter(cfg);
  if (data.dataset.events.empty()) {
    throw ValidationError("train: dataset empty after filtering");
  }
  GlobalModel global =
      GlobalModel::build(data.dataset, data.catalog, cfg.buckets.dimension);
  PersonalizedModel personal = PersonalizedModel::build(
      data.dataset, data.catalog, cfg.buckets.dimension, global);
  dump_models(out_models, global, &personal);

  BprModel model = BprModel::train(data.dataset, cfg.bpr, cfg.seed);
  const std::size_t max_n =
      *std::max_element(cfg.list_sizes.begin(), cfg.list_sizes.end());
  std::map<std::string, std::set<std::string>> train_songs;
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& e : data.dataset.events) {
    train_songs[e.user_id].insert(e.song_id);
    keys.insert({e.user_id, e.condition});
  }
  std::vector<RecommendationList> lists;
  for (const auto& [user, cond] : keys) {
    RecommendationList l =
        recommend_top_n(model, user, max_n, train_songs[user]);
    l.condition = cond;
    lists.push_back(std::move(l));
  }
  write_lists(out_lists, lists, false);
}

EvaluationReport run_evaluate(const PipelineConfig& cfg,
                              const std::string& lists_path) {
  LoadedData data = load_and_filter(cfg);
  auto loaded = load_external_lists(lists_path, data.catalog);
  if (loaded.lists.empty()) {
    throw ValidationError("evaluate: no lists in " + lists_path);
  }
  const RelevanceSet rel = relevance_from_test(data.dataset);
  ensure_dir(cfg.output_dir);

  EvaluationReport report;
  for (std::size_t n : cfg.list_sizes) {
    std::vector<RecommendationList> lists_n;
    for (const auto& l : loaded.lists) lists_n.push_back(truncated(l, n));
    for (std::size_t k : cfg.k_values) {
      MetricAccumulator acc;
      acc.add(lists_n, rel, k);
      ReportRow row;
      row.algorithm = "external";
      row.variant = "initial";
      row.mode = "-";
      row.lambda = 0.0;
      row.list_size = n;
      row.k = k;
      row.prec_at_k = acc.mean_precision();
      row.map_at_k = acc.mean_ap();
      row.folds = 1;
      row.lists = acc.count();
      report.rows.push_back(std::move(row));
    }
  }
  write_report_long(cfg.output_dir + "/evaluate_long.csv", report);
  return report;
}

}  // namespace ctxrerank
