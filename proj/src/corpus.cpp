#include "mvforge/corpus.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mvforge/error.h"
#include "mvforge/media.h"
#include "mvforge/parallel.h"

namespace mvforge {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool absent(const std::string& field) { return field.empty() || field == "-"; }

std::optional<double> parse_unit_interval(const std::string& text, const char* what) {
  if (absent(text)) return std::nullopt;
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ArgumentError(std::string(what) + " is not a number: " + text);
  if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError(std::string(what) + " out of [0,1]: " + text);
  return v;
}

struct ManifestLine {
  std::size_t line_no = 0;
  std::string id;
  std::vector<std::string> fields;
};

struct IngestOutcome {
  std::optional<TrackRecord> track;
  std::optional<MvRecord> mv;
  std::optional<Reject> reject;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

IngestOutcome ingest_line(const ManifestLine& line, const std::filesystem::path& base) {
  IngestOutcome out;
  const std::string& id = line.id;
  auto reject = [&](const std::string& reason) {
    out.reject = Reject{id, reason};
    return out;
  };
  if (line.fields.size() != 7)
    return reject("malformed: expected 7 tab-separated fields, got " + std::to_string(line.fields.size()));

  TrackRecord track;
  track.track_id = id;
  try {
    track.energy = parse_unit_interval(trim(line.fields[4]), "energy");
    track.valence = parse_unit_interval(trim(line.fields[5]), "valence");
  } catch (const ArgumentError& e) {
    return reject(std::string("malformed: ") + e.what());
  }
  for (const auto& g : split(line.fields[3], ';')) {
    std::string tag = trim(g);
    if (!tag.empty()) track.genre_tags.push_back(std::move(tag));
  }

  const std::string audio = trim(line.fields[1]);
  if (absent(audio)) return reject("audio: missing path");
  track.audio_path = resolve(base, audio);
  try {
    probe_wav(track.audio_path);
  } catch (const std::exception& e) {
    return reject(std::string("audio: ") + e.what());
  }

  const std::string lyrics = trim(line.fields[6]);
  if (!absent(lyrics)) {
    std::ifstream in(resolve(base, lyrics), std::ios::binary);
    if (!in) return reject("lyrics: cannot read " + resolve(base, lyrics).string());
    std::ostringstream ss;
    ss << in.rdbuf();
    track.lyrics = ss.str();
  }

  const std::string video = trim(line.fields[2]);
  if (!absent(video)) {
    MvRecord mv;
    mv.track_id = id;
    mv.video_path = resolve(base, video);
    try {
      mv.duration_s = probe_video(mv.video_path).duration_s();
    } catch (const std::exception& e) {
      return reject(std::string("video: ") + e.what());
    }
    out.mv = std::move(mv);
  }
  out.track = std::move(track);
  return out;
}

json track_to_json(const TrackRecord& t, const MvRecord* mv) {
  json j;
  j["id"] = t.track_id;
  j["audio_path"] = t.audio_path.string();
  j["genres"] = t.genre_tags;
  j["energy"] = t.energy ? json(*t.energy) : json(nullptr);
  j["valence"] = t.valence ? json(*t.valence) : json(nullptr);
  j["lyrics"] = t.lyrics ? json(*t.lyrics) : json(nullptr);
  if (mv) {
    json m;
    m["video_path"] = mv->video_path.string();
    m["duration_s"] = mv->duration_s;
    m["static_flag"] = mv->static_flag ? json(*mv->static_flag) : json(nullptr);
    j["mv"] = std::move(m);
  } else {
    j["mv"] = nullptr;
  }
  return j;
}

template <typename T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  // Unbiased draw in [0, n): reject the tail that would wrap unevenly.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace

Corpus::Corpus(std::vector<TrackRecord> tracks, std::vector<MvRecord> mvs, std::vector<Reject> rejects)
    : tracks_(std::move(tracks)), rejects_(std::move(rejects)) {
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    const TrackRecord& t = tracks_[i];
    if (t.track_id.empty()) throw IngestError("empty track_id");
    if (!index_.emplace(t.track_id, i).second) throw IngestError("duplicate track_id: " + t.track_id);
    if (t.energy && !(*t.energy >= 0.0 && *t.energy <= 1.0))
      throw IngestError("energy out of range for " + t.track_id);
    if (t.valence && !(*t.valence >= 0.0 && *t.valence <= 1.0))
      throw IngestError("valence out of range for " + t.track_id);
  }
  for (auto& mv : mvs) {
    if (!index_.count(mv.track_id)) throw IngestError("MV references unknown track: " + mv.track_id);
    if (!(mv.duration_s > 0.0)) throw IngestError("MV duration must be > 0: " + mv.track_id);
    const std::string id = mv.track_id;
    if (!mvs_.emplace(id, std::move(mv)).second) throw IngestError("second MV for track: " + id);
  }
}

const TrackRecord* Corpus::find_track(const std::string& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &tracks_[it->second];
}

const MvRecord* Corpus::find_mv(const std::string& id) const {
  const auto it = mvs_.find(id);
  return it == mvs_.end() ? nullptr : &it->second;
}

std::vector<MvRecord> Corpus::mvs() const {
  std::vector<MvRecord> out;
  for (const auto& t : tracks_)
    if (const MvRecord* mv = find_mv(t.track_id)) out.push_back(*mv);
  return out;
}

std::vector<std::string> Corpus::ids() const {
  std::vector<std::string> out;
  out.reserve(tracks_.size());
  for (const auto& t : tracks_) out.push_back(t.track_id);
  return out;
}

Corpus ingest_catalog(const std::filesystem::path& manifest_path, std::size_t jobs) {
  std::ifstream in(manifest_path);
  if (!in) throw IngestError("cannot read manifest: " + manifest_path.string());

  std::vector<ManifestLine> lines;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (trim(raw).empty() || raw.front() == '#') continue;
    ManifestLine line;
    line.line_no = line_no;
    line.fields = split(raw, '\t');
    line.id = trim(line.fields[0]);
    if (line.id.empty()) line.id = "line:" + std::to_string(line_no);
    else if (!seen.insert(line.id).second)
      throw IngestError("duplicate track_id: " + line.id + " (line " + std::to_string(line_no) + ")");
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IngestError("error reading manifest: " + manifest_path.string());

  const auto base = manifest_path.parent_path();
  auto outcomes = parallel_map(lines.size(), jobs,
                               [&](std::size_t i) { return ingest_line(lines[i], base); });

  std::vector<TrackRecord> tracks;
  std::vector<MvRecord> mvs;
  std::vector<Reject> rejects;
  for (auto& o : outcomes) {
    if (o.reject) {
      rejects.push_back(std::move(*o.reject));
      continue;
    }
    tracks.push_back(std::move(*o.track));
    if (o.mv) mvs.push_back(std::move(*o.mv));
  }
  return Corpus(std::move(tracks), std::move(mvs), std::move(rejects));
}

FilterResult filter_static_mvs(const Corpus& corpus, const StaticFilterParams& params,
                               std::size_t jobs) {
  if (params.sample_count < 2) throw ArgumentError("sample_count must be >= 2");
  if (!(params.threshold > 0.0)) throw ArgumentError("threshold must be > 0");

  struct Scored {
    std::optional<double> motion;
    std::optional<std::string> error;
  };
  const auto& tracks = corpus.tracks();
  auto scores = parallel_map(tracks.size(), jobs, [&](std::size_t i) {
    Scored s;
    const MvRecord* mv = corpus.find_mv(tracks[i].track_id);
    if (!mv) return s;
    try {
      const VideoInfo info = probe_video(mv->video_path);
      const auto idx = uniform_frame_indices(info.frame_count, params.sample_count);
      const auto frames = read_luma_frames(mv->video_path, idx);
      s.motion = mean_interframe_difference(frames);
    } catch (const std::exception& e) {
      s.error = e.what();
    }
    return s;
  });

  FilterResult result;
  std::vector<TrackRecord> kept;
  std::vector<MvRecord> kept_mvs;
  std::vector<Reject> rejects = corpus.rejects();
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const std::string& id = tracks[i].track_id;
    const Scored& s = scores[i];
    if (s.error) {
      rejects.push_back({id, "video: " + *s.error});
      ++result.report.rejected;
      continue;
    }
    if (!s.motion) {
      ++result.report.excluded_no_mv;
      continue;
    }
    result.report.motion[id] = *s.motion;
    if (*s.motion < params.threshold) {
      MvRecord flagged = *corpus.find_mv(id);
      flagged.static_flag = true;
      result.report.excluded.push_back(std::move(flagged));
      ++result.report.excluded_static;
      continue;
    }
    MvRecord mv = *corpus.find_mv(id);
    mv.static_flag = false;
    kept.push_back(tracks[i]);
    kept_mvs.push_back(std::move(mv));
  }
  result.report.retained = kept.size();
  result.corpus = Corpus(std::move(kept), std::move(kept_mvs), std::move(rejects));
  return result;
}

CorpusSplit split_ids(std::vector<std::string> ids, std::size_t train_count, std::uint64_t seed) {
  if (train_count == 0 || train_count >= ids.size())
    throw ArgumentError("train_count must be in (0, " + std::to_string(ids.size()) + "), got " +
                        std::to_string(train_count));
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, i + 1));
    std::swap(ids[i], ids[j]);
  }
  CorpusSplit split;
  split.seed = seed;
  split.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(train_count));
  split.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(train_count), ids.end());
  return split;
}

CorpusSplit split_corpus(const Corpus& corpus, std::size_t train_count, std::uint64_t seed) {
  return split_ids(corpus.ids(), train_count, seed);
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write corpus store: " + path.string());
  for (const auto& t : corpus.tracks())
    out << track_to_json(t, corpus.find_mv(t.track_id)).dump() << '\n';
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot read corpus store: " + path.string());
  std::vector<TrackRecord> tracks;
  std::vector<MvRecord> mvs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      TrackRecord t;
      t.track_id = j.at("id").get<std::string>();
      t.audio_path = j.at("audio_path").get<std::string>();
      t.genre_tags = j.at("genres").get<std::vector<std::string>>();
      t.energy = opt<double>(j, "energy");
      t.valence = opt<double>(j, "valence");
      t.lyrics = opt<std::string>(j, "lyrics");
      if (j.contains("mv") && !j.at("mv").is_null()) {
        const json& m = j.at("mv");
        MvRecord mv;
        mv.track_id = t.track_id;
        mv.video_path = m.at("video_path").get<std::string>();
        mv.duration_s = m.at("duration_s").get<double>();
        mv.static_flag = opt<bool>(m, "static_flag");
        mvs.push_back(std::move(mv));
      }
      tracks.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw IngestError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return Corpus(std::move(tracks), std::move(mvs), {});
}

void write_rejects(const std::vector<Reject>& rejects, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write rejects report: " + path.string());
  for (const auto& r : rejects) {
    std::string reason = r.reason;
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    std::replace(reason.begin(), reason.end(), '\t', ' ');
    out << r.track_id << '\t' << reason << '\n';
  }
}

std::vector<Reject> read_rejects(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot read rejects report: " + path.string());
  std::vector<Reject> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw IngestError("malformed rejects line: " + line);
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

void write_split(const CorpusSplit& split, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write split file: " + path.string());
  for (const auto& id : split.train_ids) out << id << "\ttrain\n";
  for (const auto& id : split.test_ids) out << id << "\ttest\n";
}

CorpusSplit read_split(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot read split file: " + path.string());
  CorpusSplit split;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw IngestError("malformed split line: " + line);
    std::string id = line.substr(0, tab);
    const std::string side = line.substr(tab + 1);
    if (!seen.insert(id).second) throw IngestError("id listed twice in split: " + id);
    if (side == "train") split.train_ids.push_back(std::move(id));
    else if (side == "test") split.test_ids.push_back(std::move(id));
    else throw IngestError("split side must be train or test: " + line);
  }
  return split;
}

}  // namespace mvforge
