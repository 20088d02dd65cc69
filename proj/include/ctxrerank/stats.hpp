#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ctxrerank/features.hpp"
#include "ctxrerank/ingestion.hpp"

namespace ctxrerank {

struct TTest {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  bool degenerate = false;  // both samples constant with different means
};

// Welch's unequal-variance two-sample t-test with a two-sided p-value.
// Sign convention: t > 0 when mean(a) > mean(b).
TTest welch_t_test(std::span<const double> a, std::span<const double> b);

// Student's pooled-variance variant, available behind configuration.
TTest student_t_test(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta function I_x(a, b), used for the
// t-distribution CDF.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value for a t statistic with `df` degrees of freedom.
double t_two_sided_p(double t, double df);

double bonferroni_threshold(double alpha, std::size_t m);

struct ConditionProfile {
  std::string condition;
  FeatureVector mean{};
  std::array<double, kNumFeatures> variance{};  // unbiased; NaN when n < 2
  std::size_t n = 0;
  bool testable = false;  // n >= 2
};

ConditionProfile condition_profile(const PlaylistCorpus& corpus);

struct TTestResult {
  std::string dimension;
  std::string condition_a;
  std::string condition_b;
  std::string feature;
  double t = 0.0;
  double p = 1.0;
  bool significant = false;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

struct AnalysisTable {
  std::vector<TTestResult> results;  // ordered (dimension, pair, feature)
  double alpha = 0.05;
  double corrected_threshold = 0.0;
  std::size_t tests = 0;
  std::vector<std::string> warnings;
};

// Every unordered condition pair within each dimension, every feature.
// The Bonferroni denominator is the number of tests actually run.
AnalysisTable compare_all(
    const std::map<std::string, std::map<std::string, PlaylistCorpus>>&
        corpora_by_dimension,
    double alpha, bool welch = true);

void write_analysis_table(const std::string& path, const AnalysisTable& table);
void write_condition_profiles(
    const std::string& path,
    const std::vector<ConditionProfile>& profiles);

}  // namespace ctxrerank
