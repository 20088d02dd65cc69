#include <random>

#include "ctxrerank/errors.hpp"
#include "ctxrerank/models.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ctxrerank;

namespace {

struct Fixture {
  Catalog catalog;
  Dataset dataset;
  ContextDimension dimension =
      HourBuckets::default_time_of_day().dimension;

  void add_song(const std::string& id, double fill) {
    Song s;
    s.id = id;
    s.features.fill(fill);
    catalog[id] = s;
  }

  void add_event(const std::string& user, const std::string& song,
                 const std::string& cond) {
    dataset.events.push_back({user, song, "2020-01-01T00:00:00", 0, cond});
  }
};

Fixture random_fixture(std::mt19937& rng, int n_songs, int n_users,
                       int n_events) {
  Fixture f;
  std::uniform_real_distribution<double> val(0.0, 1.0);
  for (int i = 0; i < n_songs; ++i) {
    Song s;
    s.id = "s" + std::to_string(i);
    for (auto& v : s.features) v = val(rng);
    f.catalog[s.id] = s;
  }
  const auto& conds = f.dimension.conditions;
  for (int i = 0; i < n_events; ++i) {
    f.add_event("u" + std::to_string(rng() % n_users),
                "s" + std::to_string(rng() % n_songs),
                conds[rng() % conds.size()]);
  }
  return f;
}

}  // namespace

TEST_CASE("global model: mean of one event is that song's vector") {
  Fixture f;
  f.add_song("s1", 0.3);
  f.add_event("u1", "s1", "morning");
  auto model = GlobalModel::build(f.dataset, f.catalog, f.dimension);
  CHECK(model.lookup("morning")[0] == doctest::Approx(0.3));
  CHECK(model.support("morning") == 1);
  CHECK_THROWS_WITH_AS(model.lookup("night"), doctest::Contains("unmodeled"),
                       ValidationError);
}

TEST_CASE("global model: midpoint of opposite corners") {
  Fixture f;
  f.add_song("zero", 0.0);
  f.add_song("one", 1.0);
  f.add_event("u1", "zero", "morning");
  f.add_event("u2", "one", "morning");
  auto model = GlobalModel::build(f.dataset, f.catalog, f.dimension);
  for (double v : model.lookup("morning")) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("global model: no events at all is an error") {
  Fixture f;
  CHECK_THROWS_WITH_AS(GlobalModel::build(f.dataset, f.catalog, f.dimension),
                       doctest::Contains("no training signal"),
                       ValidationError);
}

TEST_CASE("duplicate listens weight the centroid") {
  Fixture f;
  f.add_song("a", 0.0);
  f.add_song("b", 1.0);
  f.add_event("u1", "a", "morning");
  f.add_event("u1", "b", "morning");
  f.add_event("u1", "b", "morning");
  auto model = GlobalModel::build(f.dataset, f.catalog, f.dimension);
  CHECK(model.lookup("morning")[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("personalized model equals global for a single-user dataset") {
  std::mt19937 rng(21);
  auto f = random_fixture(rng, 30, 1, 100);
  auto global = GlobalModel::build(f.dataset, f.catalog, f.dimension);
  auto personal =
      PersonalizedModel::build(f.dataset, f.catalog, f.dimension, global);
  for (const auto& cond : f.dimension.conditions) {
    if (global.support(cond) == 0) continue;
    const auto& g = global.lookup(cond);
    const auto& p = personal.lookup("u0", cond);
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      CHECK(p[i] == doctest::Approx(g[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("personalized lookup falls back to the global condition centroid") {
  Fixture f;
  f.add_song("s1", 0.2);
  f.add_song("s2", 0.9);
  f.add_event("u1", "s1", "night");
  f.add_event("u2", "s2", "night");
  f.add_event("u2", "s2", "morning");
  auto global = GlobalModel::build(f.dataset, f.catalog, f.dimension);
  auto personal =
      PersonalizedModel::build(f.dataset, f.catalog, f.dimension, global);
  // u1 has no morning events: resolves to the global morning vector.
  CHECK(personal.support("u1", "morning") == 0);
  CHECK(personal.lookup("u1", "morning")[0] ==
        doctest::Approx(global.lookup("morning")[0]));
  // u1 at night is personal, not global.
  CHECK(personal.lookup("u1", "night")[0] == doctest::Approx(0.2));
  // Condition absent everywhere errors through the chain.
  CHECK_THROWS_AS(personal.lookup("u1", "afternoon"), ValidationError);
}

TEST_CASE("model vectors stay inside contributing component bounds") {
  std::mt19937 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_fixture(rng, 15, 5, 80);
    auto global = GlobalModel::build(f.dataset, f.catalog, f.dimension);
    for (const auto& [cond, centroid] : global.centroids()) {
      FeatureVector lo, hi;
      lo.fill(1.0);
      hi.fill(0.0);
      for (const auto& e : f.dataset.events) {
        if (e.condition != cond) continue;
        const auto& feat = f.catalog.at(e.song_id).features;
        for (std::size_t i = 0; i < kNumFeatures; ++i) {
          lo[i] = std::min(lo[i], feat[i]);
          hi[i] = std::max(hi[i], feat[i]);
        }
      }
      for (std::size_t i = 0; i < kNumFeatures; ++i) {
        CHECK(centroid[i] >= lo[i] - 1e-12);
        CHECK(centroid[i] <= hi[i] + 1e-12);
        CHECK(centroid[i] >= 0.0);
        CHECK(centroid[i] <= 1.0);
      }
    }
  }
}

TEST_CASE("split-merge: support-weighted half centroids reproduce the whole") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    auto f = random_fixture(rng, 20, 6, 120);
    auto full = GlobalModel::build(f.dataset, f.catalog, f.dimension);

    Dataset first, second;
    for (std::size_t i = 0; i < f.dataset.events.size(); ++i) {
      (i % 2 == 0 ? first : second).events.push_back(f.dataset.events[i]);
    }
    auto m1 = GlobalModel::build(first, f.catalog, f.dimension);
    auto m2 = GlobalModel::build(second, f.catalog, f.dimension);

    for (const auto& [cond, centroid] : full.centroids()) {
      const double n1 = static_cast<double>(m1.support(cond));
      const double n2 = static_cast<double>(m2.support(cond));
      for (std::size_t i = 0; i < kNumFeatures; ++i) {
        double combined = 0.0;
        if (n1 > 0) combined += n1 * m1.lookup(cond)[i];
        if (n2 > 0) combined += n2 * m2.lookup(cond)[i];
        combined /= (n1 + n2);
        CHECK(std::abs(combined - centroid[i]) < 1e-12);
      }
    }
  }
}

TEST_CASE("model dump round-trips through the inspection format") {
  std::mt19937 rng(24);
  auto f = random_fixture(rng, 25, 4, 150);
  auto global = GlobalModel::build(f.dataset, f.catalog, f.dimension);
  auto personal =
      PersonalizedModel::build(f.dataset, f.catalog, f.dimension, global);

  auto dir = testutil::temp_dir("models");
  auto path = (dir / "models.csv").string();
  dump_models(path, global, &personal);
  auto [g2, p2] = load_models(path);
  REQUIRE(p2.has_value());
  for (const auto& [cond, centroid] : global.centroids()) {
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      CHECK(g2.lookup(cond)[i] == doctest::Approx(centroid[i]).epsilon(1e-15));
    }
    CHECK(g2.support(cond) == global.support(cond));
  }
  for (const auto& [key, centroid] : personal.centroids()) {
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      CHECK(p2->lookup(key.first, key.second)[i] ==
            doctest::Approx(centroid[i]).epsilon(1e-15));
    }
  }
}
