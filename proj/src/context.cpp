#include "ctxrerank/context.hpp"

#include <algorithm>
#include <set>

#include "ctxrerank/errors.hpp"

namespace ctxrerank {

bool ContextDimension::has_condition(const std::string& c) const {
  return std::find(conditions.begin(), conditions.end(), c) != conditions.end();
}

std::size_t ContextDimension::condition_index(const std::string& c) const {
  auto it = std::find(conditions.begin(), conditions.end(), c);
  if (it == conditions.end()) {
    throw ValidationError("dimension " + name + ": unknown condition '" + c +
                          "'");
  }
  return static_cast<std::size_t>(it - conditions.begin());
}

void validate_dimension(const ContextDimension& d) {
  if (d.conditions.size() < 2) {
    throw ValidationError("dimension " + d.name +
                          ": needs at least 2 conditions");
  }
  std::set<std::string> seen(d.conditions.begin(), d.conditions.end());
  if (seen.size() != d.conditions.size()) {
    throw ValidationError("dimension " + d.name +
                          ": duplicate condition names");
  }
}

HourBuckets HourBuckets::default_time_of_day() {
  HourBuckets b;
  b.dimension = {"time_of_day", {"morning", "afternoon", "evening", "night"}};
  for (int h = 0; h < 24; ++h) {
    std::size_t idx;
    if (h >= 6 && h < 12)
      idx = 0;  // morning
    else if (h >= 12 && h < 18)
      idx = 1;  // afternoon
    else if (h >= 18)
      idx = 2;  // evening
    else
      idx = 3;  // night
    b.condition_by_hour[static_cast<std::size_t>(h)] = idx;
  }
  return b;
}

const std::string& HourBuckets::condition_for_hour(int local_hour) const {
  if (local_hour < 0 || local_hour > 23) {
    throw ValidationError("local hour out of range 0-23: " +
                          std::to_string(local_hour));
  }
  return dimension
      .conditions[condition_by_hour[static_cast<std::size_t>(local_hour)]];
}

}  // namespace ctxrerank
