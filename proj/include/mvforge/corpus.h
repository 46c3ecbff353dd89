#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mvforge {

struct TrackRecord {
  std::string track_id;
  std::filesystem::path audio_path;
  std::vector<std::string> genre_tags;
  std::optional<double> energy;
  std::optional<double> valence;
  std::optional<std::string> lyrics;

  bool operator==(const TrackRecord&) const = default;
};

struct MvRecord {
  std::string track_id;
  std::filesystem::path video_path;
  double duration_s = 0.0;
  std::optional<bool> static_flag;

  bool operator==(const MvRecord&) const = default;
};

struct Reject {
  std::string track_id;
  std::string reason;

  bool operator==(const Reject&) const = default;
};

// Tracks (manifest order), their optional music videos and everything that
// was turned away on the way in. Invariants are checked on construction and
// the object is read-only afterwards.
class Corpus {
 public:
  Corpus() = default;
  // Throws IngestError on duplicate ids, dangling MV references, or
  // out-of-range metadata.
  Corpus(std::vector<TrackRecord> tracks, std::vector<MvRecord> mvs, std::vector<Reject> rejects);

  const std::vector<TrackRecord>& tracks() const { return tracks_; }
  const std::vector<Reject>& rejects() const { return rejects_; }
  std::size_t size() const { return tracks_.size(); }

  const TrackRecord* find_track(const std::string& id) const;
  const MvRecord* find_mv(const std::string& id) const;
  std::vector<MvRecord> mvs() const;
  std::vector<std::string> ids() const;

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<TrackRecord> tracks_;
  std::map<std::string, MvRecord> mvs_;
  std::map<std::string, std::size_t> index_;
  std::vector<Reject> rejects_;
};

// Reads a tab-separated manifest:
//   id, audio_path, video_path, genres(;-joined), energy, valence, lyrics_path
// Blank lines and lines starting with '#' are ignored. Relative paths are
// resolved against the manifest's directory. Per-record problems (bad
// media, malformed fields) become rejects; an unreadable manifest or a
// duplicate id throws IngestError.
Corpus ingest_catalog(const std::filesystem::path& manifest_path, std::size_t jobs = 1);

struct StaticFilterParams {
  double threshold = 2.0;  // 8-bit luminance units
  int sample_count = 16;
};

struct FilterReport {
  std::size_t retained = 0;
  std::size_t excluded_static = 0;
  std::size_t excluded_no_mv = 0;
  std::size_t rejected = 0;
  std::map<std::string, double> motion;  // id -> mean inter-frame difference
  std::vector<MvRecord> excluded;         // static MVs, static_flag = true
};

struct FilterResult {
  Corpus corpus;
  FilterReport report;
};

// Scores every MV by mean luminance change across `sample_count` uniformly
// spaced frames and keeps those at or above the threshold. Tracks without an
// MV are dropped (no target can be built for them); undecodable videos move
// to rejects.
FilterResult filter_static_mvs(const Corpus& corpus, const StaticFilterParams& params,
                               std::size_t jobs = 1);

struct CorpusSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;

  bool operator==(const CorpusSplit&) const = default;
};

// Seeded Fisher-Yates over the ids (mt19937_64, rejection-sampled bounds so
// the result is identical on every platform). First train_count ids train.
CorpusSplit split_ids(std::vector<std::string> ids, std::size_t train_count, std::uint64_t seed);
CorpusSplit split_corpus(const Corpus& corpus, std::size_t train_count, std::uint64_t seed);

// Corpus store: one JSON object per track, lyrics inline.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

// `id<TAB>reason` lines.
void write_rejects(const std::vector<Reject>& rejects, const std::filesystem::path& path);
std::vector<Reject> read_rejects(const std::filesystem::path& path);

// `id<TAB>train|test` lines, train ids first.
void write_split(const CorpusSplit& split, const std::filesystem::path& path);
CorpusSplit read_split(const std::filesystem::path& path);

}  // namespace mvforge
