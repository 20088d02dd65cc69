#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxrerank/features.hpp"
#include "ctxrerank/ingestion.hpp"

namespace ctxrerank {

// Per-condition centroid of the feature vectors of all positively
// interacted songs (multiset: repeated listens contribute repeatedly).
class GlobalModel {
 public:
  static GlobalModel build(const Dataset& train, const Catalog& catalog,
                           const ContextDimension& dimension);

  const FeatureVector& lookup(const std::string& condition) const;
  std::size_t support(const std::string& condition) const;
  const std::map<std::string, FeatureVector>& centroids() const {
    return centroids_;
  }

  static GlobalModel from_parts(std::map<std::string, FeatureVector> centroids,
                                std::map<std::string, std::size_t> support);

 private:
  std::map<std::string, FeatureVector> centroids_;
  std::map<std::string, std::size_t> support_;
};

// Per-(user, condition) centroids with fallback to the global model for
// cold (user, condition) pairs.
class PersonalizedModel {
 public:
  static PersonalizedModel build(const Dataset& train, const Catalog& catalog,
                                 const ContextDimension& dimension,
                                 GlobalModel fallback);

  // Fallback chain: (user, condition) centroid, else global condition
  // centroid, else error "unmodeled condition".
  const FeatureVector& lookup(const std::string& user_id,
                              const std::string& condition) const;
  std::size_t support(const std::string& user_id,
                      const std::string& condition) const;
  const GlobalModel& fallback() const { return fallback_; }
  const std::map<std::pair<std::string, std::string>, FeatureVector>&
  centroids() const {
    return centroids_;
  }

  static PersonalizedModel from_parts(
      std::map<std::pair<std::string, std::string>, FeatureVector> centroids,
      std::map<std::pair<std::string, std::string>, std::size_t> support,
      GlobalModel fallback);

 private:
  std::map<std::pair<std::string, std::string>, FeatureVector> centroids_;
  std::map<std::pair<std::string, std::string>, std::size_t> support_;
  GlobalModel fallback_;
};

// Dump/load in the inspection format
// `scope,condition,f1..f9,support` where scope is a user id or GLOBAL.
void dump_models(const std::string& path, const GlobalModel& global,
                 const PersonalizedModel* personal);
std::pair<GlobalModel, std::optional<PersonalizedModel>> load_models(
    const std::string& path);

}  // namespace ctxrerank
