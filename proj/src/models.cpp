#include "ctxrerank/models.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "ctxrerank/csv.hpp"
#include "ctxrerank/errors.hpp"

namespace ctxrerank {

namespace {

const FeatureVector& song_features(const Catalog& catalog,
                                   const std::string& song_id) {
  auto it = catalog.find(song_id);
  if (it == catalog.end()) {
    throw PipelineError("song missing from catalog: " + song_id);
  }
  return it->second.features;
}

}  // namespace

GlobalModel GlobalModel::build(const Dataset& train, const Catalog& catalog,
                               const ContextDimension& dimension) {
  GlobalModel model;
  std::map<std::string, FeatureVector> sums;
  for (const auto& e : train.events) {
    if (!dimension.has_condition(e.condition)) continue;
    const FeatureVector& f = song_features(catalog, e.song_id);
    auto& sum = sums[e.condition];
    for (std::size_t i = 0; i < kNumFeatures; ++i) sum[i] += f[i];
    ++model.support_[e.condition];
  }
  if (sums.empty()) {
    throw ValidationError("no training signal for dimension " + dimension.name);
  }
  for (auto& [cond, sum] : sums) {
    const double n = static_cast<double>(model.support_[cond]);
    FeatureVector mean;
    for (std::size_t i = 0; i < kNumFeatures; ++i) mean[i] = sum[i] / n;
    model.centroids_[cond] = mean;
  }
  return model;
}

const FeatureVector& GlobalModel::lookup(const std::string& condition) const {
  auto it = centroids_.find(condition);
  if (it == centroids_.end()) {
    throw ValidationError("unmodeled condition: " + condition);
  }
  return it->second;
}

std::size_t GlobalModel::support(const std::string& condition) const {
  auto it = support_.find(condition);
  return it == support_.end() ? 0 : it->second;
}

PersonalizedModel PersonalizedModel::build(const Dataset& train,
                                           const Catalog& catalog,
                                           const ContextDimension& dimension,
                                           GlobalModel fallback) {
  PersonalizedModel model;
  model.fallback_ = std::move(fallback);
  std::map<std::pair<std::string, std::string>, FeatureVector> sums;
  for (const auto& e : train.events) {
    if (!dimension.has_condition(e.condition)) continue;
    const FeatureVector& f = song_features(catalog, e.song_id);
    auto key = std::make_pair(e.user_id, e.condition);
    auto& sum = sums[key];
    for (std::size_t i = 0; i < kNumFeatures; ++i) sum[i] += f[i];
    ++model.support_[key];
  }
  for (auto& [key, sum] : sums) {
    const double n = static_cast<double>(model.support_[key]);
    FeatureVector mean;
    for (std::size_t i = 0; i < kNumFeatures; ++i) mean[i] = sum[i] / n;
    model.centroids_[key] = mean;
  }
  return model;
}

const FeatureVector& PersonalizedModel::lookup(
    const std::string& user_id, const std::string& condition) const {
  auto it = centroids_.find({user_id, condition});
  if (it != centroids_.end()) return it->second;
  return fallback_.lookup(condition);
}

std::size_t PersonalizedModel::support(const std::string& user_id,
                                       const std::string& condition) const {
  auto it = support_.find({user_id, condition});
  return it == support_.end() ? 0 : it->second;
}

namespace {

void write_row(std::ostream& out, const std::string& scope,
               const std::string& condition, const FeatureVector& v,
               std::size_t support) {
  out << scope << ',' << condition;
  for (double x : v) {
    std::ostringstream s;
    s << std::setprecision(17) << x;
    out << ',' << s.str();
  }
  out << ',' << support << '\n';
}

}  // namespace

void dump_models(const std::string& path, const GlobalModel& global,
                 const PersonalizedModel* personal) {
  std::ofstream out(path);
  if (!out) throw PipelineError("cannot write model dump: " + path);
  out << "scope,condition";
  for (const auto& name : feature_names()) out << ',' << name;
  out << ",support\n";
  for (const auto& [cond, v] : global.centroids()) {
    write_row(out, "GLOBAL", cond, v, global.support(cond));
  }
  if (personal) {
    for (const auto& [key, v] : personal->centroids()) {
      write_row(out, key.first, key.second, v,
                personal->support(key.first, key.second));
    }
  }
}

std::pair<GlobalModel, std::optional<PersonalizedModel>> load_models(
    const std::string& path) {
  std::ifstream in;
  auto header = open_delimited(path, in);
  if (header.size() != 2 + kNumFeatures + 1 || header[0] != "scope" ||
      header[1] != "condition") {
    throw ValidationError(path + ": bad model dump header");
  }
  bool any_personal = false;
  std::string line;
  std::size_t line_no = 1;
  std::map<std::string, FeatureVector> gcent;
  std::map<std::string, std::size_t> gsup;
  std::map<std::pair<std::string, std::string>, FeatureVector> pcent;
  std::map<std::pair<std::string, std::string>, std::size_t> psup;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": bad field count");
    }
    FeatureVector v;
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      v[i] = std::stod(fields[2 + i]);
    }
    validate_vector(v, path + ":" + std::to_string(line_no));
    auto support = static_cast<std::size_t>(std::stoul(fields.back()));
    if (fields[0] == "GLOBAL") {
      gcent[fields[1]] = v;
      gsup[fields[1]] = support;
    } else {
      any_personal = true;
      pcent[{fields[0], fields[1]}] = v;
      psup[{fields[0], fields[1]}] = support;
    }
  }
  if (gcent.empty()) {
    throw ValidationError(path + ": model dump has no GLOBAL rows");
  }
  GlobalModel g = GlobalModel::from_parts(std::move(gcent), std::move(gsup));
  if (!any_personal) return {std::move(g), std::nullopt};
  PersonalizedModel p =
      PersonalizedModel::from_parts(std::move(pcent), std::move(psup), g);
  return {std::move(g), std::move(p)};
}

GlobalModel GlobalModel::from_parts(
    std::map<std::string, FeatureVector> centroids,
    std::map<std::string, std::size_t> support) {
  GlobalModel m;
  m.centroids_ = std::move(centroids);
  m.support_ = std::move(support);
  return m;
}

PersonalizedModel PersonalizedModel::from_parts(
    std::map<std::pair<std::string, std::string>, FeatureVector> centroids,
    std::map<std::pair<std::string, std::string>, std::size_t> support,
    GlobalModel fallback) {
  PersonalizedModel m;
  m.centroids_ = std::move(centroids);
  m.support_ = std::move(support);
  m.fallback_ = std::move(fallback);
  return m;
}

}  // namespace ctxrerank
