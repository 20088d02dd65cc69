#include "ctxrerank/features.hpp"

#include <algorithm>
#include <cmath>

#include "ctxrerank/errors.hpp"

namespace ctxrerank {

const std::array<std::string, kNumFeatures>& feature_names() {
  static const std::array<std::string, kNumFeatures> names = {
      "acousticness", "danceability", "energy",      "instrumentalness",
      "liveness",     "loudness",     "speechiness", "valence",
      "tempo"};
  return names;
}

std::string_view feature_name(AudioFeature f) {
  return feature_names()[static_cast<std::size_t>(f)];
}

std::size_t feature_index(std::string_view name) {
  const auto& names = feature_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return kNumFeatures;
}

namespace {
double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }
}  // namespace

double normalize_tempo(double raw_bpm) {
  if (!std::isfinite(raw_bpm) || raw_bpm < 0.0) {
    throw ValidationError("tempo: expected finite non-negative bpm, got " +
                          std::to_string(raw_bpm));
  }
  return clamp01(raw_bpm / 220.0);
}

double normalize_loudness(double raw_db) {
  if (!std::isfinite(raw_db)) {
    throw ValidationError("loudness: expected finite dB value");
  }
  return clamp01((raw_db + 40.0) / 40.0);
}

void validate_vector(const FeatureVector& v, const std::string& what) {
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0 || v[i] > 1.0) {
      throw ValidationError(what + ": feature " + feature_names()[i] +
                            " out of [0,1]: " + std::to_string(v[i]));
    }
  }
}

double distance(const FeatureVector& a, const FeatureVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  // Divide by sqrt(n) so that the maximal separation (all components one
  // apart) maps to exactly 1 and the similarity below stays in [0, 1].
  return std::sqrt(sum) / std::sqrt(static_cast<double>(kNumFeatures));
}

double similarity(const FeatureVector& a, const FeatureVector& b) {
  return 1.0 - distance(a, b);
}

double distance_masked(const FeatureVector& a, const FeatureVector& b,
                       const std::vector<std::size_t>& active) {
  if (active.empty()) return distance(a, b);
  double sum = 0.0;
  for (std::size_t i : active) {
    if (i >= kNumFeatures) {
      throw ValidationError("feature mask index out of range");
    }
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum) / std::sqrt(static_cast<double>(active.size()));
}

}  // namespace ctxrerank
