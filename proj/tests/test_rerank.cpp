#include <random>

#include "ctxrerank/errors.hpp"
#include "ctxrerank/rerank.hpp"
#include "doctest.h"

using namespace ctxrerank;

namespace {

Catalog catalog_with(const std::map<std::string, FeatureVector>& features) {
  Catalog c;
  for (const auto& [id, f] : features) c[id] = {id, f};
  return c;
}

FeatureVector constant(double v) {
  FeatureVector out;
  out.fill(v);
  return out;
}

RecommendationList list_of(
    const std::vector<std::pair<std::string, double>>& entries) {
  RecommendationList l;
  l.user_id = "u1";
  l.condition = "morning";
  for (const auto& [song, score] : entries) l.entries.push_back({song, score});
  return l;
}

ModelLookup fixed_model(const FeatureVector& v) {
  return [v](const std::string&, const std::string&) { return v; };
}

}  // namespace

TEST_CASE("minmax_normalize") {
  CHECK(minmax_normalize({2, 4, 6}) == std::vector<double>{0, 0.5, 1});
  CHECK(minmax_normalize({7, 7, 7}) == std::vector<double>{0.5, 0.5, 0.5});
  CHECK(minmax_normalize({-1, 0}) == std::vector<double>{0, 1});
  CHECK_THROWS_AS(minmax_normalize({}), ValidationError);
}

TEST_CASE("lambda 0 preserves the input ranking") {
  auto catalog = catalog_with({{"a", constant(0.1)}, {"b", constant(0.9)},
                               {"c", constant(0.4)}});
  auto list = list_of({{"b", 3.0}, {"c", 2.0}, {"a", 1.0}});
  RerankConfig cfg{0.0, RerankMode::kRegular};
  auto out = rerank(list, catalog, fixed_model(constant(0.1)), cfg);
  REQUIRE(out.entries.size() == 3);
  CHECK(out.entries[0].song_id == "b");
  CHECK(out.entries[1].song_id == "c");
  CHECK(out.entries[2].song_id == "a");
}

TEST_CASE("lambda 1 ranks purely by similarity") {
  auto catalog =
      catalog_with({{"near", constant(0.45)}, {"far", constant(0.95)}});
  auto list = list_of({{"far", 10.0}, {"near", 1.0}});
  RerankConfig cfg{1.0, RerankMode::kRegular};
  auto out = rerank(list, catalog, fixed_model(constant(0.5)), cfg);
  CHECK(out.entries[0].song_id == "near");
  CHECK(out.entries[1].song_id == "far");
}

TEST_CASE("hand-evaluated interpolation at lambda 0.5") {
  // s1: rec_norm 1.0, sim 0.0; s2: rec_norm 0.0, sim 0.8.
  FeatureVector model = constant(0.0);
  FeatureVector far = constant(1.0);       // sim 0
  FeatureVector near = constant(0.0);
  near[0] = 0.6;                           // sim 0.8
  auto catalog = catalog_with({{"s1", far}, {"s2", near}});
  auto list = list_of({{"s1", 5.0}, {"s2", 1.0}});

  RerankConfig cfg{0.5, RerankMode::kRegular};
  auto out = rerank(list, catalog, fixed_model(model), cfg);
  REQUIRE(out.entries.size() == 2);
  CHECK(out.entries[0].song_id == "s1");
  CHECK(out.entries[0].new_score == doctest::Approx(0.5));
  CHECK(out.entries[1].song_id == "s2");
  CHECK(out.entries[1].new_score == doctest::Approx(0.4));

  // Opposite mode on the same entries: s1 = 0.5*1 + 0.5*1 = 1.0,
  // s2 = 0.5*0.2 + 0.5*0 = 0.1.
  cfg.mode = RerankMode::kOpposite;
  auto opp = rerank(list, catalog, fixed_model(model), cfg);
  CHECK(opp.entries[0].song_id == "s1");
  CHECK(opp.entries[0].new_score == doctest::Approx(1.0));
  CHECK(opp.entries[1].new_score == doctest::Approx(0.1));
}

TEST_CASE("opposite at lambda 1 reverses the regular order for distinct sims") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::map<std::string, FeatureVector> features;
  std::vector<std::pair<std::string, double>> entries;
  for (int i = 0; i < 12; ++i) {
    FeatureVector f;
    for (auto& v : f) v = val(rng);
    std::string id = "s" + std::to_string(i);
    features[id] = f;
    entries.emplace_back(id, val(rng));
  }
  auto catalog = catalog_with(features);
  auto list = list_of(entries);
  FeatureVector model = constant(0.5);

  auto reg = rerank(list, catalog, fixed_model(model),
                    {1.0, RerankMode::kRegular});
  auto opp = rerank(list, catalog, fixed_model(model),
                    {1.0, RerankMode::kOpposite});
  REQUIRE(reg.entries.size() == opp.entries.size());
  for (std::size_t i = 0; i < reg.entries.size(); ++i) {
    CHECK(reg.entries[i].song_id ==
          opp.entries[opp.entries.size() - 1 - i].song_id);
  }

  // At lambda 0, both modes leave the ranking alone.
  auto reg0 = rerank(list, catalog, fixed_model(model),
                     {0.0, RerankMode::kRegular});
  auto opp0 = rerank(list, catalog, fixed_model(model),
                     {0.0, RerankMode::kOpposite});
  for (std::size_t i = 0; i < reg0.entries.size(); ++i) {
    CHECK(reg0.entries[i].song_id == opp0.entries[i].song_id);
  }
}

TEST_CASE("re-ranked lists are permutations with scores in [0,1]") {
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::map<std::string, FeatureVector> features;
    std::vector<std::pair<std::string, double>> entries;
    const int n = 3 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      FeatureVector f;
      for (auto& v : f) v = val(rng);
      std::string id = "s" + std::to_string(i);
      features[id] = f;
      entries.emplace_back(id, val(rng) * 20 - 10);
    }
    auto catalog = catalog_with(features);
    auto list = list_of(entries);
    FeatureVector model;
    for (auto& v : model) v = val(rng);

    const double lambda = val(rng);
    for (auto mode : {RerankMode::kRegular, RerankMode::kOpposite}) {
      auto out = rerank(list, catalog, fixed_model(model), {lambda, mode});
      REQUIRE(out.entries.size() == list.entries.size());
      std::multiset<std::string> in_ids, out_ids;
      for (const auto& e : list.entries) in_ids.insert(e.song_id);
      for (const auto& e : out.entries) {
        out_ids.insert(e.song_id);
        CHECK(e.new_score >= 0.0);
        CHECK(e.new_score <= 1.0);
      }
      CHECK(in_ids == out_ids);
    }
  }
}

TEST_CASE("regular and opposite scores satisfy the interpolation identity") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double sim = val(rng), rec = val(rng), lambda = val(rng);
    const double regular = lambda * sim + (1 - lambda) * rec;
    const double opposite = lambda * (1 - sim) + (1 - lambda) * rec;
    CHECK(std::abs(regular + opposite - (lambda + 2 * (1 - lambda) * rec)) <
          1e-12);
  }
}

TEST_CASE("rerank errors on songs missing from the catalog") {
  auto catalog = catalog_with({{"a", constant(0.5)}});
  auto list = list_of({{"a", 1.0}, {"ghost", 0.5}});
  CHECK_THROWS_WITH_AS(
      rerank(list, catalog, fixed_model(constant(0.5)),
             {0.5, RerankMode::kRegular}),
      doctest::Contains("ghost"), PipelineError);
}

TEST_CASE("sweep produces one list set per lambda") {
  auto catalog = catalog_with({{"a", constant(0.2)}, {"b", constant(0.8)}});
  std::vector<RecommendationList> lists = {list_of({{"a", 2.0}, {"b", 1.0}})};
  std::vector<double> grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                              0.6, 0.7, 0.8, 0.9, 1.0};
  auto swept = sweep(lists, catalog, fixed_model(constant(0.2)), grid,
                     RerankMode::kRegular);
  CHECK(swept.size() == 11);
  // Grid {0}: order identical to input.
  auto zero = sweep(lists, catalog, fixed_model(constant(0.8)), {0.0},
                    RerankMode::kRegular);
  CHECK(zero[0].second[0].entries[0].song_id == "a");
}
