#include "ctxrerank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "ctxrerank/errors.hpp"

namespace ctxrerank {

std::vector<FoldSplit> make_folds(const Dataset& d, std::size_t k_folds,
                                  std::uint64_t seed) {
  if (k_folds < 2) throw ValidationError("make_folds: need at least 2 folds");
  if (d.events.size() < k_folds) {
    throw ValidationError("make_folds: fewer events than folds");
  }
  std::vector<std::size_t> order(d.events.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n = order.size();
  std::vector<FoldSplit> folds(k_folds);
  for (std::size_t f = 0; f < k_folds; ++f) {
    // Block bounds: near-equal sizes, remainder spread over the first
    // folds.
    const std::size_t begin = f * n / k_folds;
    const std::size_t end = (f + 1) * n / k_folds;
    FoldSplit& split = folds[f];
    split.fold_index = f;
    split.seed = seed;
    for (std::size_t pos = 0; pos < n; ++pos) {
      const auto& ev = d.events[order[pos]];
      if (pos >= begin && pos < end) {
        split.test.events.push_back(ev);
      } else {
        split.train.events.push_back(ev);
      }
    }
  }
  return folds;
}

RelevanceSet relevance_from_test(const Dataset& test) {
  RelevanceSet rel;
  for (const auto& e : test.events) {
    rel[{e.user_id, e.condition}].insert(e.song_id);
  }
  return rel;
}

double precision_at_k(const RecommendationList& list,
                      const std::set<std::string>& relevant, std::size_t k) {
  if (k < 1) throw ValidationError("precision_at_k: k must be >= 1");
  const std::size_t top = std::min(k, list.entries.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) {
    if (relevant.count(list.entries[i].song_id)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

double average_precision_at_k(const RecommendationList& list,
                              const std::set<std::string>& relevant,
                              std::size_t k) {
  if (k < 1) throw ValidationError("average_precision_at_k: k must be >= 1");
  if (relevant.empty()) return 0.0;
  const std::size_t top = std::min(k, list.entries.size());
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < top; ++i) {
    if (relevant.count(list.entries[i].song_id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  const double denom =
      static_cast<double>(std::min(relevant.size(), k));
  return sum / denom;
}

double map_at_k(const std::vector<double>& average_precisions) {
  if (average_precisions.empty()) {
    throw ValidationError("map_at_k: no lists to average");
  }
  double sum = 0.0;
  for (double ap : average_precisions) sum += ap;
  return sum / static_cast<double>(average_precisions.size());
}

void MetricAccumulator::add(const std::vector<RecommendationList>& lists,
                            const RelevanceSet& relevance, std::size_t k) {
  for (const auto& l : lists) {
    auto it = relevance.find({l.user_id, l.condition});
    static const std::set<std::string> kEmpty;
    const auto& rel = it == relevance.end() ? kEmpty : it->second;
    prec_sum_ += precision_at_k(l, rel, k);
    ap_sum_ += average_precision_at_k(l, rel, k);
    ++n_;
  }
}

void MetricAccumulator::merge(const MetricAccumulator& other) {
  prec_sum_ += other.prec_sum_;
  ap_sum_ += other.ap_sum_;
  n_ += other.n_;
}

double MetricAccumulator::mean_precision() const {
  if (n_ == 0) throw PipelineError("metric accumulator is empty");
  return prec_sum_ / static_cast<double>(n_);
}

double MetricAccumulator::mean_ap() const {
  if (n_ == 0) throw PipelineError("metric accumulator is empty");
  return ap_sum_ / static_cast<double>(n_);
}

namespace {

std::string fmt_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5f", v);
  return buf;
}

std::string fmt_lambda(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

const ReportRow* find_row(const EvaluationReport& report,
                          const std::string& algorithm,
                          const std::string& variant, const std::string& mode,
                          double lambda, std::size_t list_size,
                          std::size_t k) {
  for (const auto& r : report.rows) {
    if (r.algorithm == algorithm && r.variant == variant && r.mode == mode &&
        std::abs(r.lambda - lambda) < 1e-9 && r.list_size == list_size &&
        r.k == k) {
      return &r;
    }
  }
  return nullptr;
}

}  // namespace

void write_report_table(const std::string& path, const EvaluationReport& report,
                        const std::string& algorithm, std::size_t list_size,
                        std::size_t k, const std::vector<double>& lambdas) {
  std::ofstream out(path);
  if (!out) throw PipelineError("cannot write report: " + path);
  out << "variant,mode";
  for (double l : lambdas) {
    out << ",prec_at_" << k << "_lambda_" << fmt_lambda(l) << ",map_at_" << k
        << "_lambda_" << fmt_lambda(l);
  }
  out << '\n';

  auto emit = [&](const std::string& variant, const std::string& mode) {
    out << variant << ',' << mode;
    for (double l : lambdas) {
      // The initial row is lambda-independent; stored once at lambda 0.
      const double row_lambda = variant == "initial" ? 0.0 : l;
      const ReportRow* r = find_row(report, algorithm, variant, mode,
                                    row_lambda, list_size, k);
      if (!r) {
        out << ",,";
        continue;
      }
      out << ',' << fmt_metric(r->prec_at_k) << ',' << fmt_metric(r->map_at_k);
    }
    out << '\n';
  };
  emit("initial", "-");
  emit("global", "regular");
  emit("personalized", "regular");
  emit("global", "opposite");
  emit("personalized", "opposite");
}

void write_report_long(const std::string& path,
                       const EvaluationReport& report) {
  std::ofstream out(path);
  if (!out) throw PipelineError("cannot write report: " + path);
  out << "algorithm,variant,mode,lambda,list_size,k,prec_at_k,map_at_k,folds,"
         "lists\n";
  for (const auto& r : report.rows) {
    out << r.algorithm << ',' << r.variant << ',' << r.mode << ','
        << fmt_lambda(r.lambda) << ',' << r.list_size << ',' << r.k << ','
        << fmt_metric(r.prec_at_k) << ',' << fmt_metric(r.map_at_k) << ','
        << r.folds << ',' << r.lists << '\n';
  }
}

}  // namespace ctxrerank
