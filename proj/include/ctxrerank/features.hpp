#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ctxrerank {

// The nine continuous audio features, in canonical order. Every feature
// vector in the system is indexed by this order. `key` and `mode` are
// categorical and excluded.
enum class AudioFeature : std::size_t {
  kAcousticness = 0,
  kDanceability,
  kEnergy,
  kInstrumentalness,
  kLiveness,
  kLoudness,
  kSpeechiness,
  kValence,
  kTempo,
};

inline constexpr std::size_t kNumFeatures = 9;

// Vector of the nine features, each component in [0, 1].
using FeatureVector = std::array<double, kNumFeatures>;

const std::array<std::string, kNumFeatures>& feature_names();

std::string_view feature_name(AudioFeature f);

// Returns kNumFeatures when the name is unknown.
std::size_t feature_index(std::string_view name);

// Tempo is reported in beats per minute, nominally 0..220. Values above
// 220 are clamped (real catalogs contain outliers); clamping is the
// caller's to count via the out-parameter overloads in ingestion.
double normalize_tempo(double raw_bpm);

// Loudness is reported in decibels, nominally -40..0.
double normalize_loudness(double raw_db);

// Throws ValidationError unless every component is finite and in [0, 1].
void validate_vector(const FeatureVector& v, const std::string& what);

// Euclidean distance scaled by sqrt(9) so the result lands in [0, 1].
double distance(const FeatureVector& a, const FeatureVector& b);

// 1 - distance, in [0, 1].
double similarity(const FeatureVector& a, const FeatureVector& b);

// Distance restricted to a feature subset, normalized by sqrt of the
// subset size so it still lands in [0, 1].
double distance_masked(const FeatureVector& a, const FeatureVector& b,
                       const std::vector<std::size_t>& active);

}  // namespace ctxrerank
