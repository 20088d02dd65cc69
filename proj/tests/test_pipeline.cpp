#include <cstdlib>
#include <filesystem>
#include <string>

#include "ctxrerank/config.hpp"
#include "ctxrerank/errors.hpp"
#include "ctxrerank/pipeline.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ctxrerank;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path dir;
  std::string catalog;
  std::string events;
};

Fixture make_fixture(const std::string& tag) {
  Fixture fx;
  fx.dir = testutil::temp_dir(tag);

  std::string catalog = testutil::kCatalogHeader;
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> val(0.05, 0.95);
  for (int s = 0; s < 40; ++s) {
    catalog += "s" + std::to_string(s);
    for (int f = 0; f < 9; ++f) {
      catalog += "," + std::to_string(val(rng));
    }
    catalog += "\n";
  }
  fx.catalog = testutil::write_file(fx.dir / "catalog.csv", catalog);

  std::string events = "user_id,song_id,timestamp_local_iso8601\n";
  const int hours[] = {8, 14, 20, 2};
  for (int u = 0; u < 8; ++u) {
    for (int i = 0; i < 30; ++i) {
      char ts[40];
      std::snprintf(ts, sizeof(ts), "2021-03-%02dT%02d:15:00", 1 + i % 28,
                    hours[(u + i) % 4]);
      events += "u" + std::to_string(u) + ",s" +
                std::to_string((u * 5 + i * 3) % 40) + "," + ts + "\n";
    }
  }
  fx.events = testutil::write_file(fx.dir / "events.csv", events);
  return fx;
}

std::string config_json(const Fixture& fx, const std::string& out_dir,
                        const std::string& extra = "") {
  return std::string("{\n") +
         "  \"catalog\": {\"path\": \"" + fx.catalog + "\"},\n" +
         "  \"events\": {\"path\": \"" + fx.events + "\"},\n" +
         "  \"recommender\": {\"epochs\": 5, \"factors\": 4},\n" +
         "  \"list_sizes\": [10],\n" +
         "  \"k_values\": [5],\n" +
         "  \"lambda_grid\": [0.0, 0.5, 1.0],\n" +
         "  \"folds\": 2,\n" +
         "  \"output\": \"" + out_dir + "\"" + extra + "\n}\n";
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(CTXRERANK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("load_config maps the JSON schema") {
  auto fx = make_fixture("cfg");
  auto path = testutil::write_file(
      fx.dir / "config.json",
      "{\n"
      "  \"catalog\": {\"path\": \"" + fx.catalog + "\", \"normalized\": false},\n"
      "  \"events\": {\"path\": \"" + fx.events + "\"},\n"
      "  \"filter\": {\"min_song_plays\": 5, \"min_user_events\": 20,\n"
      "               \"fixpoint\": true},\n"
      "  \"recommender\": {\"algorithms\": [\"bpr\", \"us-bpr\"],\n"
      "                    \"factors\": 7, \"epochs\": 12,\n"
      "                    \"learning_rate\": 0.1},\n"
      "  \"list_sizes\": [50, 25],\n"
      "  \"lambda_grid\": [0.0, 1.0],\n"
      "  \"k_values\": [10, 5],\n"
      "  \"modes\": [\"regular\"],\n"
      "  \"folds\": 3,\n"
      "  \"seed\": 7,\n"
      "  \"jobs\": 2,\n"
      "  \"output\": \"somewhere\",\n"
      "  \"feature_mask\": [\"energy\", \"tempo\"]\n"
      "}\n");
  auto cfg = load_config(path);
  CHECK(cfg.catalog_path == fx.catalog);
  CHECK_FALSE(cfg.catalog_normalized);
  CHECK(cfg.min_song_plays == 5);
  CHECK(cfg.min_user_events == 20);
  CHECK(cfg.filter_fixpoint);
  CHECK(cfg.algorithms == std::vector<std::string>{"bpr", "us-bpr"});
  CHECK(cfg.bpr.factors == 7);
  CHECK(cfg.bpr.epochs == 12);
  CHECK(cfg.bpr.learning_rate == doctest::Approx(0.1));
  CHECK(cfg.list_sizes == std::vector<std::size_t>{50, 25});
  CHECK(cfg.lambda_grid == std::vector<double>{0.0, 1.0});
  CHECK(cfg.k_values == std::vector<std::size_t>{10, 5});
  CHECK(cfg.modes == std::vector<std::string>{"regular"});
  CHECK(cfg.folds == 3);
  CHECK(cfg.seed == 7);
  CHECK(cfg.jobs == 2);
  CHECK(cfg.output_dir == "somewhere");
  CHECK(cfg.feature_mask == std::vector<std::string>{"energy", "tempo"});
  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("custom dimension hours must partition the day") {
  auto fx = make_fixture("dim");
  auto good = testutil::write_file(
      fx.dir / "good.json",
      config_json(fx, (fx.dir / "out").string(),
                  ",\n  \"dimension\": {\"name\": \"day_half\", \"hours\": {\n"
                  "    \"am\": [0,1,2,3,4,5,6,7,8,9,10,11],\n"
                  "    \"pm\": [12,13,14,15,16,17,18,19,20,21,22,23]}}"));
  auto cfg = load_config(good);
  CHECK(cfg.buckets.dimension.name == "day_half");
  CHECK(cfg.buckets.condition_for_hour(3) == "am");
  CHECK(cfg.buckets.condition_for_hour(13) == "pm");

  auto missing = testutil::write_file(
      fx.dir / "missing.json",
      config_json(fx, (fx.dir / "out").string(),
                  ",\n  \"dimension\": {\"name\": \"day_half\", \"hours\": {\n"
                  "    \"am\": [0,1,2,3,4,5,6,7,8,9,10],\n"
                  "    \"pm\": [12,13,14,15,16,17,18,19,20,21,22,23]}}"));
  CHECK_THROWS_AS(load_config(missing), ValidationError);

  auto doubled = testutil::write_file(
      fx.dir / "doubled.json",
      config_json(fx, (fx.dir / "out").string(),
                  ",\n  \"dimension\": {\"name\": \"day_half\", \"hours\": {\n"
                  "    \"am\": [0,1,2,3,4,5,6,7,8,9,10,11,12],\n"
                  "    \"pm\": [12,13,14,15,16,17,18,19,20,21,22,23]}}"));
  CHECK_THROWS_AS(load_config(doubled), ValidationError);

  CHECK_THROWS_AS(load_config((fx.dir / "absent.json").string()),
                  ValidationError);
  auto garbage = testutil::write_file(fx.dir / "garbage.json", "{not json");
  CHECK_THROWS_AS(load_config(garbage), ValidationError);
}

TEST_CASE("validate_config rejects bad settings") {
  auto fx = make_fixture("val");
  auto cfg = load_config(testutil::write_file(
      fx.dir / "config.json", config_json(fx, (fx.dir / "out").string())));
  CHECK_NOTHROW(validate_config(cfg));

  auto broken = cfg;
  broken.catalog_path = (fx.dir / "nope.csv").string();
  CHECK_THROWS_AS(validate_config(broken), ValidationError);

  broken = cfg;
  broken.lambda_grid = {0.5, 1.5};
  CHECK_THROWS_AS(validate_config(broken), ValidationError);

  broken = cfg;
  broken.list_sizes = {3};  // smaller than k = 5
  CHECK_THROWS_AS(validate_config(broken), ValidationError);

  broken = cfg;
  broken.modes = {"sideways"};
  CHECK_THROWS_AS(validate_config(broken), ValidationError);

  broken = cfg;
  broken.algorithms = {"svd"};
  CHECK_THROWS_AS(validate_config(broken), ValidationError);

  broken = cfg;
  broken.feature_mask = {"volume"};
  CHECK_THROWS_AS(validate_config(broken), ValidationError);

  broken = cfg;
  broken.folds = 1;
  CHECK_THROWS_AS(validate_config(broken), ValidationError);
}

TEST_CASE("pipeline runs end to end and is deterministic") {
  auto fx = make_fixture("pipe");
  auto out_a = (fx.dir / "out_a").string();
  auto out_b = (fx.dir / "out_b").string();
  auto cfg = load_config(testutil::write_file(fx.dir / "config.json",
                                              config_json(fx, out_a)));
  validate_config(cfg);
  auto report = run_pipeline(cfg);
  CHECK_FALSE(report.rows.empty());
  CHECK(fs::exists(fx.dir / "out_a" / "report_bpr_top10_at5.csv"));
  CHECK(fs::exists(fx.dir / "out_a" / "report_long.csv"));

  cfg.output_dir = out_b;
  run_pipeline(cfg);
  for (const char* name : {"report_bpr_top10_at5.csv", "report_long.csv"}) {
    const auto a = testutil::read_file(fx.dir / "out_a" / name);
    const auto b = testutil::read_file(fx.dir / "out_b" / name);
    CHECK(a == b);
    CHECK_FALSE(a.empty());
  }

  // Lambda 0 re-ranking leaves the initial ordering intact, so its
  // metrics must equal the initial row's, in both modes and variants.
  const ReportRow* initial = nullptr;
  for (const auto& r : report.rows) {
    if (r.variant == "initial") initial = &r;
  }
  REQUIRE(initial != nullptr);
  std::size_t zero_rows = 0;
  for (const auto& r : report.rows) {
    if (r.variant == "initial" || r.lambda != 0.0) continue;
    ++zero_rows;
    CHECK(r.prec_at_k == doctest::Approx(initial->prec_at_k).epsilon(1e-12));
    CHECK(r.map_at_k == doctest::Approx(initial->map_at_k).epsilon(1e-12));
  }
  CHECK(zero_rows == 4);  // 2 variants x 2 modes
}

TEST_CASE("job count does not change the report") {
  auto fx = make_fixture("jobs");
  auto cfg = load_config(testutil::write_file(
      fx.dir / "config.json", config_json(fx, (fx.dir / "one").string())));
  run_pipeline(cfg);
  cfg.output_dir = (fx.dir / "four").string();
  cfg.jobs = 4;
  run_pipeline(cfg);
  CHECK(testutil::read_file(fx.dir / "one" / "report_long.csv") ==
        testutil::read_file(fx.dir / "four" / "report_long.csv"));
}

TEST_CASE("prepare, train, rerank, evaluate stages compose") {
  auto fx = make_fixture("stages");
  auto cfg = load_config(testutil::write_file(
      fx.dir / "config.json", config_json(fx, (fx.dir / "out").string())));
  validate_config(cfg);

  auto filtered = run_prepare(cfg, (fx.dir / "prepared.csv").string());
  CHECK(filtered.events.size() == 240);
  CHECK(fs::exists(fx.dir / "prepared.csv"));

  auto models = (fx.dir / "models.csv").string();
  auto lists = (fx.dir / "lists.csv").string();
  run_train(cfg, models, lists);
  CHECK(fs::exists(models));
  CHECK(fs::exists(lists));

  run_rerank(cfg, models, lists);
  CHECK(fs::exists(fx.dir / "out" / "reranked_regular_lambda_0.0.csv"));
  CHECK(fs::exists(fx.dir / "out" / "reranked_opposite_lambda_1.0.csv"));
  // Audit columns present.
  auto head = testutil::read_file(fx.dir / "out" /
                                  "reranked_regular_lambda_0.5.csv");
  CHECK(head.rfind("user_id,condition,rank,song_id,score,sim,rec_norm,"
                   "new_score\n", 0) == 0);

  auto report = run_evaluate(cfg, lists);
  CHECK_FALSE(report.rows.empty());
  CHECK(fs::exists(fx.dir / "out" / "evaluate_long.csv"));
}

TEST_CASE("cli exit codes") {
  auto fx = make_fixture("cli");
  auto out_dir = (fx.dir / "cli_out").string();
  auto good = testutil::write_file(fx.dir / "config.json",
                                   config_json(fx, out_dir));
  CHECK(run_cli("--config " + good + " pipeline") == 0);
  CHECK(fs::exists(fs::path(out_dir) / "report_long.csv"));

  // Validation failure: events path does not exist.
  Fixture ghost = fx;
  ghost.events = (fx.dir / "no_events.csv").string();
  auto bad = testutil::write_file(fx.dir / "bad.json",
                                  config_json(ghost, out_dir));
  CHECK(run_cli("--config " + bad + " pipeline") == 1);

  // Runtime failure: prepare cannot write into a missing directory.
  CHECK(run_cli("--config " + good + " prepare --events-out " +
                (fx.dir / "nodir" / "x.csv").string()) == 2);

  // CLI usage errors are nonzero without reaching the pipeline.
  CHECK(run_cli("--config " + good) != 0);
  CHECK(run_cli("pipeline") != 0);

  // Overrides: a different seed still succeeds and writes a report.
  CHECK(run_cli("--config " + good + " --output " +
                (fx.dir / "seeded").string() + " --seed 7 pipeline") == 0);
  CHECK(fs::exists(fx.dir / "seeded" / "report_long.csv"));
}
