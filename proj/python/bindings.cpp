#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctxrerank/bpr.hpp"
#include "ctxrerank/context.hpp"
#include "ctxrerank/errors.hpp"
#include "ctxrerank/eval.hpp"
#include "ctxrerank/features.hpp"
#include "ctxrerank/ingestion.hpp"
#include "ctxrerank/models.hpp"
#include "ctxrerank/pipeline.hpp"
#include "ctxrerank/rerank.hpp"
#include "ctxrerank/stats.hpp"

namespace py = pybind11;
using namespace ctxrerank;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Contextual re-ranking of music recommendations";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);

  m.attr("FEATURE_NAMES") = feature_names();
  m.def("normalize_tempo", &normalize_tempo, py::arg("raw_bpm"));
  m.def("normalize_loudness", &normalize_loudness, py::arg("raw_db"));
  m.def("distance", &distance, py::arg("a"), py::arg("b"));
  m.def("similarity", &similarity, py::arg("a"), py::arg("b"));

  m.def(
      "time_of_day",
      [](int hour) {
        static const HourBuckets buckets = HourBuckets::default_time_of_day();
        return buckets.condition_for_hour(hour);
      },
      py::arg("local_hour"));

  m.def("minmax_normalize", &minmax_normalize, py::arg("scores"));
  m.def(
      "rerank_score",
      [](double lam, double sim, double rec_norm, bool opposite) {
        const double term = opposite ? 1.0 - sim : sim;
        return lam * term + (1.0 - lam) * rec_norm;
      },
      py::arg("lam"), py::arg("sim"), py::arg("rec_norm"),
      py::arg("opposite") = false);

  py::class_<TTest>(m, "TTest")
      .def_readonly("t", &TTest::t)
      .def_readonly("p", &TTest::p)
      .def_readonly("df", &TTest::df)
      .def_readonly("degenerate", &TTest::degenerate);
  m.def(
      "welch_t_test",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return welch_t_test(a, b);
      },
      py::arg("a"), py::arg("b"));
  m.def("bonferroni_threshold", &bonferroni_threshold, py::arg("alpha"),
        py::arg("m"));

  py::class_<ListEntry>(m, "ListEntry")
      .def_readonly("song_id", &ListEntry::song_id)
      .def_readonly("score", &ListEntry::score)
      .def_readonly("sim", &ListEntry::sim)
      .def_readonly("rec_norm", &ListEntry::rec_norm)
      .def_readonly("new_score", &ListEntry::new_score);
  py::class_<RecommendationList>(m, "RecommendationList")
      .def_readonly("user_id", &RecommendationList::user_id)
      .def_readonly("condition", &RecommendationList::condition)
      .def_readonly("entries", &RecommendationList::entries);

  m.def(
      "precision_at_k",
      [](const std::vector<std::string>& songs,
         const std::set<std::string>& relevant, std::size_t k) {
        RecommendationList l;
        for (const auto& s : songs) l.entries.push_back({s, 0.0});
        return precision_at_k(l, relevant, k);
      },
      py::arg("songs"), py::arg("relevant"), py::arg("k"));
  m.def(
      "average_precision_at_k",
      [](const std::vector<std::string>& songs,
         const std::set<std::string>& relevant, std::size_t k) {
        RecommendationList l;
        for (const auto& s : songs) l.entries.push_back({s, 0.0});
        return average_precision_at_k(l, relevant, k);
      },
      py::arg("songs"), py::arg("relevant"), py::arg("k"));

  m.def(
      "rerank_list",
      [](const std::vector<std::pair<std::string, double>>& entries,
         const std::map<std::string, FeatureVector>& features,
         const FeatureVector& model_vector, double lam, bool opposite) {
        RecommendationList l;
        l.user_id = "u";
        l.condition = "c";
        for (const auto& [song, score] : entries) {
          l.entries.push_back({song, score});
        }
        Catalog catalog;
        for (const auto& [song, f] : features) catalog[song] = {song, f};
        RerankConfig cfg;
        cfg.lambda = lam;
        cfg.mode = opposite ? RerankMode::kOpposite : RerankMode::kRegular;
        ModelLookup lookup = [&](const std::string&, const std::string&) {
          return model_vector;
        };
        auto out = rerank(l, catalog, lookup, cfg);
        std::vector<std::tuple<std::string, double, double, double>> result;
        for (const auto& e : out.entries) {
          result.emplace_back(e.song_id, e.sim, e.rec_norm, e.new_score);
        }
        return result;
      },
      py::arg("entries"), py::arg("features"), py::arg("model_vector"),
      py::arg("lam"), py::arg("opposite") = false,
      "Re-rank a single (song, score) list; returns (song, sim, rec_norm, "
      "new_score) tuples in the new order.");

  m.def(
      "run_pipeline",
      [](const std::string& config_path) {
        auto cfg = load_config(config_path);
        validate_config(cfg);
        auto report = run_pipeline(cfg);
        std::vector<py::dict> rows;
        for (const auto& r : report.rows) {
          py::dict d;
          d["algorithm"] = r.algorithm;
          d["variant"] = r.variant;
          d["mode"] = r.mode;
          d["lambda"] = r.lambda;
          d["list_size"] = r.list_size;
          d["k"] = r.k;
          d["prec_at_k"] = r.prec_at_k;
          d["map_at_k"] = r.map_at_k;
          rows.push_back(std::move(d));
        }
        return rows;
      },
      py::arg("config_path"));
}
