#include "ctxrerank/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "ctxrerank/csv.hpp"
#include "ctxrerank/errors.hpp"

namespace ctxrerank {

std::set<std::string> Dataset::users() const {
  std::set<std::string> out;
  for (const auto& e : events) out.insert(e.user_id);
  return out;
}

std::set<std::string> Dataset::songs() const {
  std::set<std::string> out;
  for (const auto& e : events) out.insert(e.song_id);
  return out;
}

namespace {

double parse_double(const std::string& s, const std::string& path,
                    std::size_t line_no, const std::string& col) {
  try {
    std::size_t consumed = 0;
    double v = std::stod(s, &consumed);
    if (consumed != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(path + ":" + std::to_string(line_no) +
                          ": cannot parse " + col + " value '" + s + "'");
  }
}

double clamp_counted(double v, std::size_t* clamped) {
  if (v < 0.0 || v > 1.0) {
    ++*clamped;
    return std::clamp(v, 0.0, 1.0);
  }
  return v;
}

}  // namespace

CatalogLoadResult load_feature_catalog(const std::string& path,
                                       bool normalized) {
  std::ifstream in;
  auto header = open_delimited(path, in);
  const auto& names = feature_names();
  if (header.empty() || header[0] != "song_id") {
    throw ValidationError(path + ": first column must be song_id");
  }
  // Column index per feature, resolved by name so column order is free.
  std::array<std::size_t, kNumFeatures> col{};
  std::string missing;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    auto it = std::find(header.begin(), header.end(), names[f]);
    if (it == header.end()) {
      missing += missing.empty() ? names[f] : ", " + names[f];
      continue;
    }
    col[f] = static_cast<std::size_t>(it - header.begin());
  }
  if (!missing.empty()) {
    throw ValidationError(path + ": missing feature columns: " + missing);
  }

  CatalogLoadResult result;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() < header.size()) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()));
    }
    Song song;
    song.id = fields[0];
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      double raw = parse_double(fields[col[f]], path, line_no, names[f]);
      double v;
      if (!normalized && f == feature_index("tempo")) {
        v = normalize_tempo(raw);
        if (raw > 220.0) ++result.clamped;
      } else if (!normalized && f == feature_index("loudness")) {
        v = normalize_loudness(raw);
        if (raw < -40.0 || raw > 0.0) ++result.clamped;
      } else {
        if (!std::isfinite(raw)) {
          throw ValidationError(path + ":" + std::to_string(line_no) +
                                ": non-finite " + names[f]);
        }
        v = clamp_counted(raw, &result.clamped);
      }
      song.features[f] = v;
    }
    if (result.catalog.count(song.id)) ++result.duplicates;
    result.catalog[song.id] = song;  // last wins
  }
  return result;
}

namespace {

// Accepts `YYYY-MM-DDTHH:MM[:SS]` (space separator also tolerated) and
// returns the local hour.
int parse_hour(const std::string& ts, const std::string& path,
               std::size_t line_no) {
  auto fail = [&]() -> int {
    throw ValidationError(path + ":" + std::to_string(line_no) +
                          ": malformed timestamp '" + ts + "'");
  };
  if (ts.size() < 13) return fail();
  if (ts[4] != '-' || ts[7] != '-') return fail();
  if (ts[10] != 'T' && ts[10] != ' ') return fail();
  if (!std::isdigit(static_cast<unsigned char>(ts[11])) ||
      !std::isdigit(static_cast<unsigned char>(ts[12]))) {
    return fail();
  }
  int hour = (ts[11] - '0') * 10 + (ts[12] - '0');
  if (hour > 23) return fail();
  return hour;
}

}  // namespace

EventsLoadResult load_events(const std::string& path, const Catalog& catalog,
                             const HourBuckets& buckets) {
  std::ifstream in;
  auto header = open_delimited(path, in);
  const std::vector<std::string> expected = {"user_id", "song_id",
                                             "timestamp_local_iso8601"};
  if (header != expected) {
    throw ValidationError(path +
                          ": expected header user_id,song_id,"
                          "timestamp_local_iso8601");
  }
  EventsLoadResult result;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 3) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected 3 fields");
    }
    ++result.rows;
    if (!catalog.count(fields[1])) {
      ++result.dropped_unknown_song;
      continue;
    }
    ListeningEvent ev;
    ev.user_id = fields[0];
    ev.song_id = fields[1];
    ev.timestamp = fields[2];
    ev.hour = parse_hour(ev.timestamp, path, line_no);
    ev.condition = buckets.condition_for_hour(ev.hour);
    result.dataset.events.push_back(std::move(ev));
  }
  return result;
}

Dataset filter_dataset(const Dataset& d, std::size_t min_song_plays,
                       std::size_t min_user_events, FilterStats* stats,
                       bool fixpoint) {
  FilterStats local;
  local.min_song_plays = min_song_plays;
  local.min_user_events = min_user_events;
  local.events_before = d.events.size();

  std::vector<ListeningEvent> events = d.events;
  std::size_t passes = 0;
  while (true) {
    ++passes;
    std::map<std::string, std::size_t> song_plays;
    for (const auto& e : events) ++song_plays[e.song_id];
    std::set<std::string> dropped_songs;
    for (const auto& [song, n] : song_plays) {
      if (n < min_song_plays) dropped_songs.insert(song);
    }
    std::erase_if(events, [&](const ListeningEvent& e) {
      return dropped_songs.count(e.song_id) > 0;
    });

    std::map<std::string, std::size_t> user_events;
    for (const auto& e : events) ++user_events[e.user_id];
    std::set<std::string> dropped_users;
    for (const auto& [user, n] : user_events) {
      if (n < min_user_events) dropped_users.insert(user);
    }
    std::erase_if(events, [&](const ListeningEvent& e) {
      return dropped_users.count(e.user_id) > 0;
    });

    local.songs_removed += dropped_songs.size();
    local.users_removed += dropped_users.size();
    if (!fixpoint || (dropped_songs.empty() && dropped_users.empty())) break;
  }
  local.passes = passes;
  local.events_after = events.size();
  if (stats) *stats = local;
  return Dataset{std::move(events)};
}

std::map<std::string, PlaylistCorpus> load_playlist_corpus(
    const std::string& path, const Catalog& catalog,
    const std::set<std::string>* allowed_conditions) {
  std::ifstream in;
  auto header = open_delimited(path, in);
  const std::vector<std::string> expected = {"condition", "playlist_id",
                                             "followers", "song_id"};
  if (header != expected) {
    throw ValidationError(path +
                          ": expected header condition,playlist_id,"
                          "followers,song_id");
  }
  struct Raw {
    std::vector<Song> songs;
    std::set<std::string> playlists;
    std::map<std::string, std::size_t> followers;
    std::size_t dropped = 0;
  };
  std::map<std::string, Raw> raw;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected 4 fields");
    }
    const std::string& cond = fields[0];
    if (allowed_conditions && !allowed_conditions->count(cond)) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": unknown condition '" + cond + "'");
    }
    auto& r = raw[cond];
    r.playlists.insert(fields[1]);
    r.followers[fields[1]] = static_cast<std::size_t>(
        parse_double(fields[2], path, line_no, "followers"));
    auto it = catalog.find(fields[3]);
    if (it == catalog.end()) {
      ++r.dropped;
      continue;
    }
    r.songs.push_back(it->second);
  }

  std::map<std::string, PlaylistCorpus> out;
  for (auto& [cond, r] : raw) {
    if (r.songs.empty()) {
      throw ValidationError(path + ": condition '" + cond +
                            "' has no resolvable songs");
    }
    PlaylistCorpus c;
    c.condition = cond;
    c.songs = std::move(r.songs);
    c.playlist_count = r.playlists.size();
    for (const auto& [_, f] : r.followers) c.total_followers += f;
    c.dropped = r.dropped;
    c.meets_protocol = c.songs.size() >= 500 && c.playlist_count >= 4;
    out[cond] = std::move(c);
  }
  return out;
}

}  // namespace ctxrerank
