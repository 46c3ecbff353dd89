#include "mvforge/dataset.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

#include "mvforge/digest.h"
#include "mvforge/error.h"
#include "mvforge/media.h"
#include "mvforge/parallel.h"

namespace mvforge {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr std::string_view kMusicHeader = "Music: ";
constexpr std::string_view kGenreHeader = "Genre tags: ";
constexpr std::string_view kMvTypeHeader = "MV type: ";
constexpr std::string_view kLyricsHeader = "Lyrics understanding: ";
constexpr std::string_view kInputLayout = "blocks/v1";
constexpr std::string_view kTargetLayout = "overview-frames/v1";

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string render_blocks(const ExampleInputs& in) {
  std::string out;
  if (in.music_ref) out += std::string(kMusicHeader) + std::string(kAudioToken) + "\n";
  if (in.genre_tags)
    out += std::string(kGenreHeader) + (in.genre_tags->empty() ? "none" : join(*in.genre_tags, ", ")) + "\n";
  if (in.mv_type) out += std::string(kMvTypeHeader) + *in.mv_type + "\n";
  if (in.lyrics_understanding)
    out += std::string(kLyricsHeader) +
           (in.lyrics_understanding->empty() ? "none (instrumental)" : squash_whitespace(*in.lyrics_understanding)) +
           "\n";
  if (!out.empty()) out += "\n";
  out += kInstruction;
  return out;
}

ExampleInputs masked_inputs(const TrackRecord& track, MvType mv_type, const std::string& lyrics_understanding,
                            const AblationMask& mask) {
  ExampleInputs in;
  if (mask.music) {
    if (track.audio_path.empty()) throw ArgumentError("music block needs an audio reference: " + track.track_id);
    in.music_ref = track.audio_path.generic_string();
  }
  if (mask.genre) in.genre_tags = track.genre_tags;
  if (mask.mv_type) in.mv_type = std::string(mv_type_name(mv_type));
  if (mask.lyrics) in.lyrics_understanding = lyrics_understanding;
  return in;
}

json captions_to_json(const std::vector<FrameCaption>& captions) {
  json arr = json::array();
  for (const FrameCaption& f : captions) arr.push_back({{"t_s", f.t_s}, {"caption", f.caption}});
  return arr;
}

std::vector<FrameCaption> captions_from_json(const json& arr) {
  std::vector<FrameCaption> out;
  for (const json& f : arr) out.push_back({f.at("t_s").get<double>(), f.at("caption").get<std::string>()});
  return out;
}

std::string now_iso8601() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) t = static_cast<std::time_t>(std::atoll(epoch));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

std::size_t write_examples(const std::vector<std::string>& ids, const Corpus& corpus,
                           const std::map<std::string, TrackAnnotation>& annotations, const AblationMask& mask,
                           double interval_s, const std::filesystem::path& path) {
  auto out = open_out(path);
  std::size_t n = 0;
  for (const std::string& id : ids) {
    const auto it = annotations.find(id);
    const TrackRecord* track = corpus.find_track(id);
    if (it == annotations.end() || track == nullptr) continue;
    out << example_to_json_line(make_example(*track, it->second, mask, interval_s)) << '\n';
    ++n;
  }
  finish(out, path);
  return n;
}

void write_meta(const std::filesystem::path& dir, const ojson& meta) {
  const auto path = dir / "meta.json";
  auto out = open_out(path);
  out << meta.dump(2) << '\n';
  finish(out, path);
}

ojson base_meta(const std::string& name, const AblationMask& mask, const DatasetOptions& options) {
  ojson meta;
  meta["name"] = name;
  meta["mask"] = mask.name();
  meta["seed"] = options.seed;
  meta["prompt_hashes"] = options.prompt_hashes;
  meta["created_at"] = options.created_at.empty() ? now_iso8601() : options.created_at;
  meta["instruction_sha256"] = sha256_hex(kInstruction);
  meta["input_layout"] = kInputLayout;
  meta["target_layout"] = kTargetLayout;
  meta["frame_interval_s"] = options.frame_interval_s;
  return meta;
}

}  // namespace

// ---- masks

AblationMask AblationMask::parse(std::string_view digits) {
  AblationMask m;
  for (char c : digits) {
    bool* bit = nullptr;
    switch (c) {
      case '1': bit = &m.music; break;
      case '2': bit = &m.genre; break;
      case '3': bit = &m.mv_type; break;
      case '4': bit = &m.lyrics; break;
      default: throw ArgumentError("invalid mask digit in '" + std::string(digits) + "'");
    }
    if (*bit) throw ArgumentError("repeated mask digit in '" + std::string(digits) + "'");
    *bit = true;
  }
  return m;
}

AblationMask AblationMask::from_bits(unsigned bits) {
  if (bits > 0xF) throw ArgumentError("mask bits out of range");
  return {(bits & 1u) != 0, (bits & 2u) != 0, (bits & 4u) != 0, (bits & 8u) != 0};
}

unsigned AblationMask::bits() const {
  return (music ? 1u : 0u) | (genre ? 2u : 0u) | (mv_type ? 4u : 0u) | (lyrics ? 8u : 0u);
}

std::string AblationMask::name() const {
  std::string s;
  if (music) s += '1';
  if (genre) s += '2';
  if (mv_type) s += '3';
  if (lyrics) s += '4';
  return s;
}

const std::vector<AblationMask>& table_masks() {
  static const std::vector<AblationMask> masks = {
      AblationMask::parse("1234"), AblationMask::parse("234"), AblationMask::parse("123"),
      AblationMask::parse("134"),  AblationMask::parse("124"), AblationMask::parse("23"),
      AblationMask::parse("13"),   AblationMask::parse("14")};
  return masks;
}

const std::vector<AblationMask>& sanity_masks() {
  static const std::vector<AblationMask> masks = {AblationMask::parse("1234"), AblationMask::parse("14")};
  return masks;
}

std::string render_input(const TrackRecord& track, MvType mv_type, const std::string& lyrics_understanding,
                         const AblationMask& mask) {
  return render_blocks(masked_inputs(track, mv_type, lyrics_understanding, mask));
}

// ---- annotations

std::string annotation_to_json_line(const TrackAnnotation& a) {
  json features = json::parse(features_to_json_line(a.track_id, a.features));
  features.erase("track_id");
  ojson j;
  j["track_id"] = a.track_id;
  j["features"] = features;
  j["music_caption"] = a.music_caption;
  j["lyrics_understanding"] = a.lyrics_understanding;
  j["mv_type"] = mv_type_name(a.mv_type);
  j["frame_captions"] = captions_to_json(a.frame_captions);
  j["unified_caption"] = a.unified_caption;
  j["description"] = {{"overview", a.description.overview}, {"breakdown", captions_to_json(a.description.breakdown)}};
  return j.dump();
}

TrackAnnotation annotation_from_json_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    TrackAnnotation a;
    a.track_id = j.at("track_id").get<std::string>();
    json features = j.at("features");
    features["track_id"] = a.track_id;
    a.features = features_from_json_line(features.dump()).second;
    a.music_caption = j.at("music_caption").get<std::string>();
    a.lyrics_understanding = j.at("lyrics_understanding").get<std::string>();
    a.mv_type = mv_type_from_string(j.at("mv_type").get<std::string>());
    a.frame_captions = captions_from_json(j.at("frame_captions"));
    a.unified_caption = j.at("unified_caption").get<std::string>();
    a.description.overview = j.at("description").at("overview").get<std::string>();
    a.description.breakdown = captions_from_json(j.at("description").at("breakdown"));
    return a;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("bad annotation line: ") + e.what());
  }
}

void write_annotations(const std::map<std::string, TrackAnnotation>& annotations,
                       const std::vector<std::string>& order, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const std::string& id : order)
    if (auto it = annotations.find(id); it != annotations.end()) out << annotation_to_json_line(it->second) << '\n';
  finish(out, path);
}

std::map<std::string, TrackAnnotation> read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read annotations " + path.string());
  std::map<std::string, TrackAnnotation> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    TrackAnnotation a = annotation_from_json_line(line);
    const std::string id = a.track_id;
    if (!out.emplace(id, std::move(a)).second) throw ArgumentError("duplicate annotation: " + id);
  }
  return out;
}

// ---- annotation pipeline

FeatureStageResult extract_corpus_features(const Corpus& corpus, const std::vector<std::string>& ids,
                                           const AnnotateOptions& options) {
  using Outcome = std::variant<LowLevelFeatures, std::string>;
  const auto outcomes = parallel_map(ids.size(), options.jobs, [&](std::size_t i) -> Outcome {
    const TrackRecord* track = corpus.find_track(ids[i]);
    if (track == nullptr) return std::string("unknown track");
    const auto ov = options.meter_overrides.find(ids[i]);
    try {
      return extract_all(read_wav(track->audio_path), ov == options.meter_overrides.end() ? options.meter : ov->second);
    } catch (const Error& e) {
      return std::string(e.what());
    }
  });
  FeatureStageResult result;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (const auto* f = std::get_if<LowLevelFeatures>(&outcomes[i]))
      result.features.emplace(ids[i], *f);
    else
      result.rejects.push_back({ids[i], "features: " + std::get<std::string>(outcomes[i])});
  }
  return result;
}

TrackAnnotation annotate_track(const TrackRecord& track, const MvRecord& mv, Provider& provider,
                               const PromptLibrary& prompts, const AnnotateOptions& options,
                               const LowLevelFeatures* known_features) {
  TrackAnnotation a;
  a.track_id = track.track_id;
  if (known_features != nullptr) {
    a.features = *known_features;
  } else {
    const auto ov = options.meter_overrides.find(track.track_id);
    a.features = extract_all(read_wav(track.audio_path),
                             ov == options.meter_overrides.end() ? options.meter : ov->second);
  }

  a.music_caption = caption_music(provider, prompts, track.audio_path);
  if (track.lyrics && !squash_whitespace(*track.lyrics).empty())
    a.lyrics_understanding = understand_lyrics(provider, prompts, *track.lyrics);

  // Frames are captioned over the span where both audio and video exist.
  const VideoInfo info = probe_video(mv.video_path);
  const double clip_s = std::min(mv.duration_s, probe_wav(track.audio_path));
  const std::vector<double> times = sample_frame_times(clip_s, options.frame_interval_s);
  std::vector<std::int64_t> indices;
  for (double t : times) indices.push_back(frame_index_at(info, t));
  for (std::int64_t idx : uniform_frame_indices(info.frame_count, kMvTypeFrameCount)) indices.push_back(idx);
  const std::vector<std::string> pngs = read_png_frames(mv.video_path, indices);

  for (std::size_t i = 0; i < times.size(); ++i)
    a.frame_captions.push_back({times[i], caption_frame(provider, prompts, pngs[i], times[i])});
  a.mv_type = tag_mv_type(provider, prompts,
                          std::vector<std::string>(pngs.begin() + static_cast<std::ptrdiff_t>(times.size()), pngs.end()));
  a.unified_caption = compose_unified_caption(provider, prompts, a.music_caption, a.features, a.lyrics_understanding);
  a.description = compose_mv_description(provider, prompts, a.frame_captions, a.unified_caption,
                                         a.lyrics_understanding, options.frame_interval_s);
  return a;
}

AnnotateResult annotate_corpus(const Corpus& corpus, const std::vector<std::string>& ids, Provider& provider,
                               const PromptLibrary& prompts, const AnnotateOptions& options,
                               const std::map<std::string, LowLevelFeatures>& known_features,
                               const std::map<std::string, TrackAnnotation>& known) {
  using Outcome = std::variant<TrackAnnotation, std::string>;
  const auto outcomes = parallel_map(ids.size(), options.jobs, [&](std::size_t i) -> Outcome {
    const std::string& id = ids[i];
    if (auto it = known.find(id); it != known.end()) return it->second;
    const TrackRecord* track = corpus.find_track(id);
    if (track == nullptr) return std::string("unknown track");
    const MvRecord* mv = corpus.find_mv(id);
    if (mv == nullptr) return std::string("no music video");

    LowLevelFeatures features;
    if (auto it = known_features.find(id); it != known_features.end()) {
      features = it->second;
    } else {
      const auto ov = options.meter_overrides.find(id);
      try {
        features = extract_all(read_wav(track->audio_path),
                               ov == options.meter_overrides.end() ? options.meter : ov->second);
      } catch (const Error& e) {
        return "features: " + std::string(e.what());
      }
    }
    try {
      return annotate_track(*track, *mv, provider, prompts, options, &features);
    } catch (const TaggingError& e) {
      return "mv type: " + std::string(e.what());
    } catch (const Error& e) {
      return "provider: " + std::string(e.what());
    }
  });

  AnnotateResult result;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (const auto* a = std::get_if<TrackAnnotation>(&outcomes[i]))
      result.annotations.emplace(ids[i], *a);
    else
      result.rejects.push_back({ids[i], std::get<std::string>(outcomes[i])});
  }
  return result;
}

// ---- examples

TrainingExample make_example(const TrackRecord& track, const TrackAnnotation& annotation, const AblationMask& mask,
                             double interval_s) {
  TrainingExample ex;
  ex.track_id = track.track_id;
  ex.instruction = std::string(kInstruction);
  ex.inputs = masked_inputs(track, annotation.mv_type, annotation.lyrics_understanding, mask);
  ex.prompt = render_blocks(ex.inputs);
  ex.target = render_target(annotation.description, interval_s);
  return ex;
}

std::string example_to_json_line(const TrainingExample& example) {
  ojson inputs = ojson::object();
  if (example.inputs.music_ref) inputs["music_ref"] = *example.inputs.music_ref;
  if (example.inputs.genre_tags) inputs["genre_tags"] = *example.inputs.genre_tags;
  if (example.inputs.mv_type) inputs["mv_type"] = *example.inputs.mv_type;
  if (example.inputs.lyrics_understanding) inputs["lyrics_understanding"] = *example.inputs.lyrics_understanding;
  ojson j;
  j["track_id"] = example.track_id;
  j["instruction"] = example.instruction;
  j["inputs"] = inputs;
  j["prompt"] = example.prompt;
  j["target"] = example.target;
  return j.dump();
}

TrainingExample example_from_json_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    TrainingExample ex;
    ex.track_id = j.at("track_id").get<std::string>();
    ex.instruction = j.at("instruction").get<std::string>();
    const json& in = j.at("inputs");
    if (in.contains("music_ref")) ex.inputs.music_ref = in["music_ref"].get<std::string>();
    if (in.contains("genre_tags")) ex.inputs.genre_tags = in["genre_tags"].get<std::vector<std::string>>();
    if (in.contains("mv_type")) ex.inputs.mv_type = in["mv_type"].get<std::string>();
    if (in.contains("lyrics_understanding"))
      ex.inputs.lyrics_understanding = in["lyrics_understanding"].get<std::string>();
    ex.prompt = j.at("prompt").get<std::string>();
    ex.target = j.at("target").get<std::string>();
    return ex;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("bad example line: ") + e.what());
  }
}

std::string check_example_line(const std::string& line, const AblationMask& mask) {
  const json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return "not a JSON object";
  for (const char* key : {"track_id", "instruction", "inputs", "prompt", "target"})
    if (!j.contains(key)) return std::string("missing key: ") + key;
  if (j.size() != 5) return "unexpected top-level keys";
  if (!j["track_id"].is_string() || j["track_id"].get<std::string>().empty()) return "track_id must be a nonempty string";
  if (!j["instruction"].is_string() || j["instruction"].get<std::string>() != kInstruction)
    return "instruction differs from the fixed instruction";
  const json& in = j["inputs"];
  if (!in.is_object()) return "inputs must be an object";

  const std::pair<const char*, bool> expected[] = {{"music_ref", mask.music},
                                                   {"genre_tags", mask.genre},
                                                   {"mv_type", mask.mv_type},
                                                   {"lyrics_understanding", mask.lyrics}};
  std::size_t present = 0;
  for (const auto& [key, bit] : expected) {
    const bool has = in.contains(key);
    if (has != bit) return std::string("input ") + key + (bit ? " missing" : " present") + " for mask '" + mask.name() + "'";
    present += has;
  }
  if (in.size() != present) return "unknown input key";
  if (mask.music && !in["music_ref"].is_string()) return "music_ref must be a string";
  if (mask.genre) {
    if (!in["genre_tags"].is_array()) return "genre_tags must be an array";
    for (const json& g : in["genre_tags"])
      if (!g.is_string()) return "genre_tags must hold strings";
  }
  if (mask.mv_type && (!in["mv_type"].is_string() || !parse_mv_type(in["mv_type"].get<std::string>())))
    return "mv_type is not one of the ten categories";
  if (mask.lyrics && !in["lyrics_understanding"].is_string()) return "lyrics_understanding must be a string";

  if (!j["prompt"].is_string()) return "prompt must be a string";
  TrainingExample ex;
  try {
    ex = example_from_json_line(line);
  } catch (const Error& e) {
    return e.what();
  }
  if (ex.prompt != render_blocks(ex.inputs)) return "prompt does not match inputs";
  const std::pair<std::string_view, bool> headers[] = {
      {kMusicHeader, mask.music}, {kGenreHeader, mask.genre}, {kMvTypeHeader, mask.mv_type}, {kLyricsHeader, mask.lyrics}};
  for (const auto& [header, bit] : headers) {
    const bool has = ex.prompt.rfind(std::string("\n") + std::string(header), std::string::npos) != std::string::npos ||
                     ex.prompt.rfind(header, 0) == 0;
    if (has != bit) return "prompt block '" + std::string(header) + "' does not match the mask";
  }
  if (!j["target"].is_string()) return "target must be a string";
  try {
    parse_target(ex.target);
  } catch (const Error& e) {
    return std::string("target: ") + e.what();
  }
  return {};
}

// ---- dataset files

std::string dataset_dir_name(const std::string& setting_name) {
  if (setting_name.empty()) return "empty";
  std::string out = setting_name;
  std::replace(out.begin(), out.end(), ':', '_');
  return out;
}

DatasetSummary write_dataset(const CorpusSplit& split, const Corpus& corpus,
                             const std::map<std::string, TrackAnnotation>& annotations, const AblationMask& mask,
                             const DatasetOptions& options, std::size_t rejected) {
  DatasetSummary s;
  s.name = mask.name();
  s.mask = mask;
  s.dir = options.output_dir / dataset_dir_name(s.name);
  std::filesystem::create_directories(s.dir);
  s.train_count = write_examples(split.train_ids, corpus, annotations, mask, options.frame_interval_s, s.dir / "train.jsonl");
  s.test_count = write_examples(split.test_ids, corpus, annotations, mask, options.frame_interval_s, s.dir / "test.jsonl");
  ojson meta = base_meta(s.name, mask, options);
  meta["sanity"] = false;
  meta["counts"] = {{"train", s.train_count}, {"test", s.test_count}, {"rejected", rejected}};
  write_meta(s.dir, meta);
  return s;
}

DatasetSummary write_sanity_set(const CorpusSplit& split, const Corpus& corpus,
                                const std::map<std::string, TrackAnnotation>& annotations,
                                const AblationMask& trained_mask, const DatasetOptions& options, std::size_t rejected) {
  DatasetSummary s;
  s.name = "sanity:" + trained_mask.name();
  s.mask = AblationMask::none();
  s.sanity = true;
  s.dir = options.output_dir / dataset_dir_name(s.name);
  std::filesystem::create_directories(s.dir);
  s.test_count = write_examples(split.test_ids, corpus, annotations, s.mask, options.frame_interval_s, s.dir / "test.jsonl");
  ojson meta = base_meta(s.name, s.mask, options);
  meta["sanity"] = true;
  meta["trained_mask"] = trained_mask.name();
  meta["counts"] = {{"train", 0}, {"test", s.test_count}, {"rejected", rejected}};
  write_meta(s.dir, meta);
  return s;
}

namespace {

AnnotateResult annotate_split(const BuildContext& ctx) {
  std::vector<std::string> ids = ctx.split.train_ids;
  ids.insert(ids.end(), ctx.split.test_ids.begin(), ctx.split.test_ids.end());
  return annotate_corpus(ctx.corpus, ids, ctx.provider, ctx.prompts, ctx.annotate, ctx.known_features,
                         ctx.known_annotations);
}

}  // namespace

BuildReport build_dataset(const BuildContext& ctx, const AblationMask& mask) {
  AnnotateResult ann = annotate_split(ctx);
  BuildReport report;
  report.datasets.push_back(write_dataset(ctx.split, ctx.corpus, ann.annotations, mask, ctx.dataset, ann.rejects.size()));
  report.rejects = std::move(ann.rejects);
  report.annotations = std::move(ann.annotations);
  return report;
}

BuildReport ablation_suite(const BuildContext& ctx) {
  AnnotateResult ann = annotate_split(ctx);
  BuildReport report;
  for (const AblationMask& m : table_masks())
    report.datasets.push_back(write_dataset(ctx.split, ctx.corpus, ann.annotations, m, ctx.dataset, ann.rejects.size()));
  for (const AblationMask& m : sanity_masks())
    report.datasets.push_back(
        write_sanity_set(ctx.split, ctx.corpus, ann.annotations, m, ctx.dataset, ann.rejects.size()));
  report.rejects = std::move(ann.rejects);
  report.annotations = std::move(ann.annotations);
  return report;
}

}  // namespace mvforge
