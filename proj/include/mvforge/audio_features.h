#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvforge/media.h"

namespace mvforge {

// Fixed analysis hops. Not per-call knobs so features are reproducible.
inline constexpr double kOnsetHopSeconds = 0.010;
inline constexpr double kChromaHopSeconds = 0.100;
inline constexpr double kMinTempoBpm = 40.0;
inline constexpr double kMaxTempoBpm = 240.0;
inline constexpr double kPreferredTempoLowBpm = 80.0;
inline constexpr double kPreferredTempoHighBpm = 160.0;
inline constexpr double kChordSimilarityFloor = 0.5;
inline constexpr double kMinSampleRate = 8000.0;

struct OnsetEnvelope {
  double hop_s = kOnsetHopSeconds;
  std::vector<double> values;  // values[i] describes time i * hop_s

  double duration_s() const { return hop_s * static_cast<double>(values.size()); }
};

// Half-wave rectified log-magnitude spectral flux, one value per 10 ms.
OnsetEnvelope onset_envelope(const AudioBuffer& audio);

struct TempoEstimate {
  double bpm = 0.0;           // after octave preference
  double raw_peak_bpm = 0.0;  // strongest autocorrelation peak
  double peak_strength = 0.0; // normalised autocorrelation at the raw peak
};

// Autocorrelation tempo over 40-240 BPM. Peaks within 10% of the maximum are
// treated as ties and resolved towards 80-160 BPM. Failing that, an in-band
// peak at an integer fraction of the winner's lag is preferred; anything else
// is folded into the band by octaves.
TempoEstimate estimate_tempo(const OnsetEnvelope& env);

struct BeatGrid {
  std::vector<double> beats_s;
  std::vector<double> downbeats_s;
  double period_s = 0.0;
  int meter = 4;
  int downbeat_phase = 0;  // index of the first downbeat within beats_s
};

// Fits a beat grid (period refined within +-3% of the tempo, phase searched
// over one period) and picks as downbeats the grid phase mod `meter` with the
// highest mean onset strength.
BeatGrid track_beats(const OnsetEnvelope& env, double tempo_bpm, int meter);

inline std::vector<double> track_downbeats(const OnsetEnvelope& env, double tempo_bpm, int meter) {
  return track_beats(env, tempo_bpm, meter).downbeats_s;
}

using ChromaVector = std::array<double, 12>;

struct Chromagram {
  double hop_s = kChromaHopSeconds;
  std::vector<ChromaVector> frames;  // each max-normalised, or all zero

  double duration_s() const { return hop_s * static_cast<double>(frames.size()); }
};

// Pitch-class energy, 100 ms hop, 55 Hz - 5 kHz.
Chromagram chroma(const AudioBuffer& audio);

enum class Mode { Major, Minor };

struct Key {
  int tonic = 0;  // pitch class, C = 0
  Mode mode = Mode::Major;

  bool operator==(const Key&) const = default;
};

struct KeyEstimate {
  Key key;
  double correlation = 0.0;
  std::array<double, 24> scores{};  // 0-11 major, 12-23 minor
};

// Krumhansl-Schmuckler: Pearson correlation of the mean chroma vector with
// the 24 rotated Krumhansl-Kessler profiles.
KeyEstimate estimate_key(const Chromagram& chromagram);

struct ChordSegment {
  std::string label;  // "C:maj", "A:min", ... or "N"
  double start_s = 0.0;
  double end_s = 0.0;

  bool operator==(const ChordSegment&) const = default;
};

// Labels each inter-beat span by cosine match against 24 binary triad
// templates; spans below the similarity floor become "N". Spans before the
// first and after the last beat are labelled too, so segments tile
// [0, duration]. Adjacent equal labels are merged. `duration_s` defaults to
// the chromagram length.
std::vector<ChordSegment> detect_chords(const Chromagram& chromagram,
                                        const std::vector<double>& beat_times_s,
                                        std::optional<double> duration_s = std::nullopt);

struct LowLevelFeatures {
  double tempo_bpm = 0.0;
  Key key;
  std::vector<double> downbeats_s;
  std::vector<ChordSegment> chords;

  bool operator==(const LowLevelFeatures&) const = default;
};

LowLevelFeatures extract_all(const AudioBuffer& audio, int meter = 4);

// Throws ArgumentError naming the first violated invariant.
void validate_features(const LowLevelFeatures& features, double duration_s);

std::string pitch_class_name(int pc);
std::string key_to_string(const Key& key);  // "C major", "F# minor"
Key parse_key(const std::string& text);
std::string chord_label(int root, Mode mode);

// Feature dump: header line "features/v1", then one JSON object per track.
inline constexpr const char* kFeatureDumpHeader = "features/v1";

void write_feature_dump(const std::map<std::string, LowLevelFeatures>& features,
                        const std::vector<std::string>& order, const std::filesystem::path& path);
std::map<std::string, LowLevelFeatures> read_feature_dump(const std::filesystem::path& path);

std::string features_to_json_line(const std::string& track_id, const LowLevelFeatures& f);
std::pair<std::string, LowLevelFeatures> features_from_json_line(const std::string& line);

}  // namespace mvforge
