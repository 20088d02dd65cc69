#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctxrerank/context.hpp"
#include "ctxrerank/features.hpp"

namespace ctxrerank {

struct Song {
  std::string id;
  FeatureVector features{};
};

using Catalog = std::map<std::string, Song>;

// One positive user-song interaction with its derived condition.
struct ListeningEvent {
  std::string user_id;
  std::string song_id;
  std::string timestamp;  // local wall-clock, ISO 8601
  int hour = 0;
  std::string condition;
};

struct Dataset {
  std::vector<ListeningEvent> events;

  std::set<std::string> users() const;
  std::set<std::string> songs() const;
};

struct CatalogLoadResult {
  Catalog catalog;
  std::size_t duplicates = 0;  // last-wins overwrites
  std::size_t clamped = 0;     // raw values clamped into [0,1]
};

struct EventsLoadResult {
  Dataset dataset;
  std::size_t dropped_unknown_song = 0;
  std::size_t rows = 0;
};

struct FilterStats {
  std::size_t min_song_plays = 0;
  std::size_t min_user_events = 0;
  std::size_t songs_removed = 0;
  std::size_t users_removed = 0;
  std::size_t events_before = 0;
  std::size_t events_after = 0;
  std::size_t passes = 1;
};

struct PlaylistCorpus {
  std::string condition;
  std::vector<Song> songs;
  std::size_t playlist_count = 0;
  std::size_t total_followers = 0;
  std::size_t dropped = 0;
  // Protocol guidance: >= 500 songs from >= 4 playlists (reported, not
  // enforced).
  bool meets_protocol = false;
};

// Catalog file: header `song_id,<9 feature names>`. When `normalized` is
// false, tempo is raw bpm and loudness raw dB and both are normalized on
// load. Duplicate song_id is last-wins.
CatalogLoadResult load_feature_catalog(const std::string& path,
                                       bool normalized);

// Events file: header `user_id,song_id,timestamp_local_iso8601`. Events
// referencing songs absent from the catalog are dropped and counted; the
// condition is derived from the local hour via `buckets`.
EventsLoadResult load_events(const std::string& path, const Catalog& catalog,
                             const HourBuckets& buckets);

// Removes songs with play count < min_song_plays first, then users whose
// remaining event count < min_user_events. Single pass by default; with
// `fixpoint` the two steps repeat until stable.
Dataset filter_dataset(const Dataset& d, std::size_t min_song_plays,
                       std::size_t min_user_events, FilterStats* stats = nullptr,
                       bool fixpoint = false);

// Playlist corpus file: header `condition,playlist_id,followers,song_id`.
// A condition whose songs all fail to resolve in the catalog is an error.
// When `allowed_conditions` is given, a condition name outside it is a
// schema error.
std::map<std::string, PlaylistCorpus> load_playlist_corpus(
    const std::string& path, const Catalog& catalog,
    const std::set<std::string>* allowed_conditions = nullptr);

}  // namespace ctxrerank
