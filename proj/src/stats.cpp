#include "ctxrerank/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ctxrerank/errors.hpp"

namespace ctxrerank {

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  std::size_t n = 0;
};

Moments moments(std::span<const double> xs) {
  Moments m;
  m.n = xs.size();
  for (double x : xs) {
    if (!std::isfinite(x)) throw ValidationError("t-test: non-finite sample");
    m.mean += x;
  }
  m.mean /= static_cast<double>(m.n);
  for (double x : xs) {
    const double d = x - m.mean;
    m.var += d * d;
  }
  m.var /= static_cast<double>(m.n - 1);
  return m;
}

// Continued-fraction evaluation of the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) {
    throw ValidationError("incomplete beta: a, b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  // Use the continued fraction directly where it converges fast, else the
  // symmetry relation.
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double df) {
  if (df <= 0.0) throw ValidationError("t CDF: df must be positive");
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

namespace {

TTest finish_test(double mean_a, double mean_b, double se2, double df) {
  TTest r;
  r.df = df;
  if (se2 <= 0.0) {
    // Zero variance in both samples.
    if (mean_a == mean_b) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = mean_a > mean_b ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
      r.degenerate = true;
    }
    return r;
  }
  r.t = (mean_a - mean_b) / std::sqrt(se2);
  r.p = t_two_sided_p(r.t, df);
  return r;
}

}  // namespace

TTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ValidationError("welch_t_test: need at least 2 samples per group");
  }
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double va_n = ma.var / static_cast<double>(ma.n);
  const double vb_n = mb.var / static_cast<double>(mb.n);
  const double se2 = va_n + vb_n;
  double df = 1.0;
  if (se2 > 0.0) {
    // Welch-Satterthwaite degrees of freedom.
    df = se2 * se2 /
         (va_n * va_n / static_cast<double>(ma.n - 1) +
          vb_n * vb_n / static_cast<double>(mb.n - 1));
  }
  return finish_test(ma.mean, mb.mean, se2, df);
}

TTest student_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ValidationError("student_t_test: need at least 2 samples per group");
  }
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double df = static_cast<double>(ma.n + mb.n - 2);
  const double pooled =
      ((ma.n - 1) * ma.var + (mb.n - 1) * mb.var) / df;
  const double se2 = pooled * (1.0 / ma.n + 1.0 / mb.n);
  return finish_test(ma.mean, mb.mean, se2, df);
}

double bonferroni_threshold(double alpha, std::size_t m) {
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw ValidationError("bonferroni: alpha must be in (0,1)");
  }
  if (m == 0) throw ValidationError("bonferroni: m must be >= 1");
  return alpha / static_cast<double>(m);
}

ConditionProfile condition_profile(const PlaylistCorpus& corpus) {
  if (corpus.songs.empty()) {
    throw ValidationError("condition_profile: empty corpus for " +
                          corpus.condition);
  }
  ConditionProfile p;
  p.condition = corpus.condition;
  p.n = corpus.songs.size();
  p.testable = p.n >= 2;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    double sum = 0.0;
    for (const auto& s : corpus.songs) sum += s.features[f];
    p.mean[f] = sum / static_cast<double>(p.n);
    if (p.testable) {
      double sq = 0.0;
      for (const auto& s : corpus.songs) {
        const double d = s.features[f] - p.mean[f];
        sq += d * d;
      }
      p.variance[f] = sq / static_cast<double>(p.n - 1);
    } else {
      p.variance[f] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return p;
}

AnalysisTable compare_all(
    const std::map<std::string, std::map<std::string, PlaylistCorpus>>&
        corpora_by_dimension,
    double alpha, bool welch) {
  AnalysisTable table;
  table.alpha = alpha;

  for (const auto& [dim, corpora] : corpora_by_dimension) {
    std::size_t testable = 0;
    for (const auto& [_, corpus] : corpora) {
      if (corpus.songs.size() >= 2) ++testable;
    }
    if (testable < 2) {
      throw ValidationError("dimension " + dim +
                            ": needs at least 2 testable conditions");
    }
  }

  for (const auto& [dim, corpora] : corpora_by_dimension) {
    std::vector<const PlaylistCorpus*> ordered;
    for (const auto& [_, corpus] : corpora) ordered.push_back(&corpus);
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      for (std::size_t j = i + 1; j < ordered.size(); ++j) {
        const PlaylistCorpus& ca = *ordered[i];
        const PlaylistCorpus& cb = *ordered[j];
        if (ca.songs.size() < 2 || cb.songs.size() < 2) {
          table.warnings.push_back("skipping pair " + ca.condition + "-" +
                                   cb.condition + " in " + dim +
                                   ": untestable corpus");
          continue;
        }
        for (std::size_t f = 0; f < kNumFeatures; ++f) {
          std::vector<double> a, b;
          a.reserve(ca.songs.size());
          b.reserve(cb.songs.size());
          for (const auto& s : ca.songs) a.push_back(s.features[f]);
          for (const auto& s : cb.songs) b.push_back(s.features[f]);
          const TTest tt = welch ? welch_t_test(a, b) : student_t_test(a, b);
          TTestResult r;
          r.dimension = dim;
          r.condition_a = ca.condition;
          r.condition_b = cb.condition;
          r.feature = feature_names()[f];
          r.t = tt.t;
          r.p = tt.p;
          r.n_a = ca.songs.size();
          r.n_b = cb.songs.size();
          table.results.push_back(std::move(r));
        }
      }
    }
  }

  table.tests = table.results.size();
  table.corrected_threshold = bonferroni_threshold(alpha, table.tests);
  for (auto& r : table.results) {
    r.significant = r.p < table.corrected_threshold;
  }
  return table;
}

void write_analysis_table(const std::string& path, const AnalysisTable& table) {
  std::ofstream out(path);
  if (!out) throw PipelineError("cannot write analysis table: " + path);
  out << "dimension,condition_a,condition_b,feature,t,p,significant,n_a,n_b\n";
  out << std::setprecision(17);
  for (const auto& r : table.results) {
    char tbuf[32], pbuf[32];
    std::snprintf(tbuf, sizeof(tbuf), "%.4f", r.t);
    std::snprintf(pbuf, sizeof(pbuf), "%.6g", r.p);
    out << r.dimension << ',' << r.condition_a << ',' << r.condition_b << ','
        << r.feature << ',' << tbuf << ',' << pbuf << ','
        << (r.significant ? "true" : "false") << ',' << r.n_a << ',' << r.n_b
        << '\n';
  }
}

void write_condition_profiles(const std::string& path,
                              const std::vector<ConditionProfile>& profiles) {
  std::ofstream out(path);
  if (!out) throw PipelineError("cannot write profiles: " + path);
  out << "condition,feature,mean,variance,n\n";
  for (const auto& p : profiles) {
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      char mbuf[32], vbuf[32];
      std::snprintf(mbuf, sizeof(mbuf), "%.6f", p.mean[f]);
      if (std::isnan(p.variance[f])) {
        std::snprintf(vbuf, sizeof(vbuf), "NA");
      } else {
        std::snprintf(vbuf, sizeof(vbuf), "%.6f", p.variance[f]);
      }
      out << p.condition << ',' << feature_names()[f] << ',' << mbuf << ','
          << vbuf << ',' << p.n << '\n';
    }
  }
}

}  // namespace ctxrerank
