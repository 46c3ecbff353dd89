#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvforge/audio_features.h"
#include "mvforge/corpus.h"
#include "mvforge/description.h"
#include "mvforge/prompts.h"
#include "mvforge/providers.h"

namespace mvforge {

// The fixed instruction every example ends with.
inline constexpr std::string_view kInstruction =
    "Generate a concise video prompt that captures the essence of the MV, incorporating the "
    "music's tone, style, and lyrical themes. The prompt should reflect the specified MV type "
    "and align with the music genre to ensure stylistic coherence for guiding a text-to-video "
    "model.";

inline constexpr std::string_view kAudioToken = "<AUDIO>";

// Which of the four input sources an example carries:
// 1 music, 2 genre tags, 3 MV type, 4 lyrics understanding.
struct AblationMask {
  bool music = false;
  bool genre = false;
  bool mv_type = false;
  bool lyrics = false;

  static AblationMask all() { return {true, true, true, true}; }
  static AblationMask none() { return {}; }
  // "1234", "14", "" ... digits in any order, each at most once.
  static AblationMask parse(std::string_view digits);
  static AblationMask from_bits(unsigned bits);

  unsigned bits() const;
  bool empty() const { return bits() == 0; }
  // Sorted digit string; empty for the empty mask.
  std::string name() const;

  bool operator==(const AblationMask&) const = default;
};

// Training masks in the order results are usually reported.
const std::vector<AblationMask>& table_masks();
// Masks whose trained models are also scored with every input removed.
const std::vector<AblationMask>& sanity_masks();

// Labelled input blocks in fixed order 1,2,3,4 (only those in the mask),
// then the instruction verbatim.
std::string render_input(const TrackRecord& track, MvType mv_type,
                         const std::string& lyrics_understanding, const AblationMask& mask);

// Everything the providers produced for one track.
struct TrackAnnotation {
  std::string track_id;
  LowLevelFeatures features;
  std::string music_caption;
  std::string lyrics_understanding;  // empty for instrumentals
  MvType mv_type = MvType::LivePerformance;
  std::vector<FrameCaption> frame_captions;
  std::string unified_caption;
  MvDescription description;

  bool operator==(const TrackAnnotation&) const = default;
};

std::string annotation_to_json_line(const TrackAnnotation& a);
TrackAnnotation annotation_from_json_line(const std::string& line);
void write_annotations(const std::map<std::string, TrackAnnotation>& annotations,
                       const std::vector<std::string>& order, const std::filesystem::path& path);
std::map<std::string, TrackAnnotation> read_annotations(const std::filesystem::path& path);

struct AnnotateOptions {
  int meter = 4;
  std::map<std::string, int> meter_overrides;  // per-track id
  double frame_interval_s = kFrameIntervalSeconds;
  std::size_t jobs = 1;
};

struct FeatureStageResult {
  std::map<std::string, LowLevelFeatures> features;
  std::vector<Reject> rejects;
};

// Decodes each track's audio and runs extract_all. Failures become rejects
// of the form "features: <reason>".
FeatureStageResult extract_corpus_features(const Corpus& corpus, const std::vector<std::string>& ids,
                                           const AnnotateOptions& options);

// Full provider chain for one track: features, music caption, lyrics
// understanding, frame captions every interval, MV type from 8 frames,
// unified caption, MV description.
TrackAnnotation annotate_track(const TrackRecord& track, const MvRecord& mv, Provider& provider,
                               const PromptLibrary& prompts, const AnnotateOptions& options,
                               const LowLevelFeatures* known_features = nullptr);

struct AnnotateResult {
  std::map<std::string, TrackAnnotation> annotations;
  std::vector<Reject> rejects;  // in input order
};

// Annotates `ids` in parallel. Entries of `known` are reused as-is, entries
// of `known_features` skip audio analysis. Per-track failures are rejects.
AnnotateResult annotate_corpus(const Corpus& corpus, const std::vector<std::string>& ids,
                               Provider& provider, const PromptLibrary& prompts,
                               const AnnotateOptions& options,
                               const std::map<std::string, LowLevelFeatures>& known_features = {},
                               const std::map<std::string, TrackAnnotation>& known = {});

struct ExampleInputs {
  std::optional<std::string> music_ref;
  std::optional<std::vector<std::string>> genre_tags;
  std::optional<std::string> mv_type;
  std::optional<std::string> lyrics_understanding;

  bool operator==(const ExampleInputs&) const = default;
};

struct TrainingExample {
  std::string track_id;
  std::string instruction;
  ExampleInputs inputs;
  std::string prompt;
  std::string target;

  bool operator==(const TrainingExample&) const = default;
};

TrainingExample make_example(const TrackRecord& track, const TrackAnnotation& annotation,
                             const AblationMask& mask, double interval_s = kFrameIntervalSeconds);

std::string example_to_json_line(const TrainingExample& example);
TrainingExample example_from_json_line(const std::string& line);

// Schema check for one dataset line: required keys, fixed instruction, an
// input key present iff its mask bit is set, parseable target. Returns an
// empty string when the line is sound, otherwise the first problem found.
std::string check_example_line(const std::string& line, const AblationMask& mask);

struct DatasetOptions {
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> prompt_hashes;
  std::string created_at;  // ISO-8601; filled from the clock when empty
  double frame_interval_s = kFrameIntervalSeconds;
};

struct DatasetSummary {
  std::string name;  // "1234", "sanity:14"
  AblationMask mask;
  std::filesystem::path dir;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  bool sanity = false;
};

// Directory name for a dataset setting ("1234", "sanity_14").
std::string dataset_dir_name(const std::string& setting_name);

// Writes <output_dir>/<mask>/{train,test}.jsonl and meta.json. Ids without
// an annotation are skipped (they are rejects upstream).
DatasetSummary write_dataset(const CorpusSplit& split, const Corpus& corpus,
                             const std::map<std::string, TrackAnnotation>& annotations,
                             const AblationMask& mask, const DatasetOptions& options,
                             std::size_t rejected = 0);

// Test split only, every input removed, named "sanity:<trained mask>".
DatasetSummary write_sanity_set(const CorpusSplit& split, const Corpus& corpus,
                                const std::map<std::string, TrackAnnotation>& annotations,
                                const AblationMask& trained_mask, const DatasetOptions& options,
                                std::size_t rejected = 0);

struct BuildContext {
  const Corpus& corpus;
  const CorpusSplit& split;
  Provider& provider;
  const PromptLibrary& prompts;
  AnnotateOptions annotate;
  DatasetOptions dataset;
  std::map<std::string, LowLevelFeatures> known_features;
  std::map<std::string, TrackAnnotation> known_annotations;
};

struct BuildReport {
  std::vector<DatasetSummary> datasets;
  std::vector<Reject> rejects;
  std::map<std::string, TrackAnnotation> annotations;
};

// Annotates every split id (reusing what is known) and writes one dataset.
BuildReport build_dataset(const BuildContext& ctx, const AblationMask& mask);

// The eight table masks plus the empty-input test sets for sanity_masks().
BuildReport ablation_suite(const BuildContext& ctx);

}  // namespace mvforge
