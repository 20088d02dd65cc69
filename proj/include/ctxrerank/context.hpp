#pragma once

#include <array>
#include <string>
#include <vector>

namespace ctxrerank {

// A contextual dimension is a named category (time of day, activity,
// mood, ...) made up of at least two named conditions.
struct ContextDimension {
  std::string name;
  std::vector<std::string> conditions;

  bool has_condition(const std::string& c) const;
  std::size_t condition_index(const std::string& c) const;  // throws if absent
};

// Time-of-day bucketing: condition index per hour of day. The default
// uses 6-hour blocks starting at midnight; alternative bucketings are a
// config change away.
struct HourBuckets {
  ContextDimension dimension;
  std::array<std::size_t, 24> condition_by_hour{};

  // morning [6,12), afternoon [12,18), evening [18,24), night [0,6).
  static HourBuckets default_time_of_day();

  const std::string& condition_for_hour(int local_hour) const;
};

void validate_dimension(const ContextDimension& d);

}  // namespace ctxrerank
