#include "mvforge/audio_features.h"

#include <unsupported/Eigen/FFT>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numeric>
#include <set>

#include "mvforge/error.h"

namespace mvforge {
namespace {

using nlohmann::json;

constexpr std::array<const char*, 12> kPitchNames = {"C",  "C#", "D",  "D#", "E",  "F",
                                                     "F#", "G",  "G#", "A",  "A#", "B"};

// Krumhansl-Kessler probe-tone ratings, tonic first.
constexpr std::array<double, 12> kMajorProfile = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09,
                                                  2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
constexpr std::array<double, 12> kMinorProfile = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53,
                                                  2.54, 4.75, 3.98, 2.69, 3.34, 3.17};

constexpr double kOnsetWindowSeconds = 0.023;
constexpr double kChromaWindowSeconds = 0.15;
constexpr double kChromaMinHz = 55.0;
constexpr double kChromaMaxHz = 5000.0;
constexpr double kLogCompression = 100.0;
constexpr double kTempoTieRatio = 0.9;
// An in-band peak whose lag divides the strongest lag (within 3%) is taken
// as the beat when it holds at least half the strongest peak's strength.
constexpr double kSubdivisionRatio = 0.5;
constexpr double kSubdivisionTolerance = 0.03;
constexpr double kPeriodSearchSpan = 0.03;
constexpr double kPeriodSearchStep = 0.001;
constexpr double kPhaseStepFrames = 0.25;

std::size_t next_pow2(double n) {
  std::size_t p = 1;
  while (static_cast<double>(p) < n) p <<= 1;
  return p;
}

void check_audio(const AudioBuffer& audio) {
  if (audio.samples.empty()) throw ArgumentError("audio is empty");
  if (audio.sample_rate < kMinSampleRate)
    throw ArgumentError("sample rate must be >= 8 kHz, got " + std::to_string(audio.sample_rate));
}

// Magnitude spectra (bins 0..window/2) of Hann-windowed frames centred at
// i * hop, zero-padded at the edges.
class Stft {
 public:
  Stft(const AudioBuffer& audio, std::size_t window, std::size_t hop)
      : audio_(audio), window_(window), hop_(hop), hann_(window) {
    for (std::size_t n = 0; n < window; ++n)
      hann_[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(n) / static_cast<double>(window));
    frames_ = (audio.samples.size() + hop - 1) / hop;
    buf_.resize(window);
  }

  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return window_ / 2 + 1; }

  void magnitude(std::size_t frame, std::vector<double>& out) {
    const auto centre = static_cast<std::ptrdiff_t>(frame * hop_);
    const auto start = centre - static_cast<std::ptrdiff_t>(window_ / 2);
    const auto n = static_cast<std::ptrdiff_t>(audio_.samples.size());
    bool silent = true;
    for (std::size_t k = 0; k < window_; ++k) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(k);
      const double s = (idx >= 0 && idx < n) ? audio_.samples[static_cast<std::size_t>(idx)] : 0.0;
      buf_[k] = s * hann_[k];
      silent = silent && s == 0.0;
    }
    out.assign(bins(), 0.0);
    if (silent) return;
    fft_.fwd(spec_, buf_);
    for (std::size_t b = 0; b < bins(); ++b) out[b] = std::abs(spec_[b]);
  }

 private:
  const AudioBuffer& audio_;
  std::size_t window_;
  std::size_t hop_;
  std::vector<double> hann_;
  std::size_t frames_ = 0;
  std::vector<double> buf_;
  std::vector<std::complex<double>> spec_;
  Eigen::FFT<double> fft_;
};

double interp(const std::vector<double>& v, double pos) {
  if (pos <= 0.0) return v.front();
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double f = pos - static_cast<double>(i);
  return v[i] * (1.0 - f) + v[i + 1] * f;
}

std::vector<double> gaussian_smooth(const std::vector<double>& v, double sigma) {
  const int radius = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (int k = -radius; k <= radius; ++k)
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * k * k / (sigma * sigma));
  const double norm = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  std::vector<double> out(v.size(), 0.0);
  const auto n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = -radius; k <= radius; ++k) {
      const int j = i + k;
      if (j >= 0 && j < n) acc += v[static_cast<std::size_t>(j)] * kernel[static_cast<std::size_t>(k + radius)];
    }
    out[static_cast<std::size_t>(i)] = acc / norm;
  }
  return out;
}

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x <= 0.0; });
}

double pearson(const ChromaVector& a, const std::array<double, 12>& b) {
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / 12.0;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / 12.0;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < 12; ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  if (da <= 0.0 || db <= 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

std::array<double, 12> rotate(const std::array<double, 12>& profile, int tonic) {
  std::array<double, 12> out{};
  for (int pc = 0; pc < 12; ++pc) out[static_cast<std::size_t>(pc)] = profile[static_cast<std::size_t>((pc - tonic + 12) % 12)];
  return out;
}

const std::set<std::string>& valid_chord_labels() {
  static const std::set<std::string> labels = [] {
    std::set<std::string> s{"N"};
    for (int r = 0; r < 12; ++r) {
      s.insert(chord_label(r, Mode::Major));
      s.insert(chord_label(r, Mode::Minor));
    }
    return s;
  }();
  return labels;
}

}  // namespace

OnsetEnvelope onset_envelope(const AudioBuffer& audio) {
  check_audio(audio);
  const auto hop = static_cast<std::size_t>(std::lround(kOnsetHopSeconds * audio.sample_rate));
  const std::size_t window = next_pow2(kOnsetWindowSeconds * audio.sample_rate);
  Stft stft(audio, window, hop);

  OnsetEnvelope env;
  env.hop_s = static_cast<double>(hop) / audio.sample_rate;
  env.values.resize(stft.frames());
  std::vector<double> mag;
  std::vector<double> prev(stft.bins(), 0.0);
  for (std::size_t f = 0; f < stft.frames(); ++f) {
    stft.magnitude(f, mag);
    double flux = 0.0;
    for (std::size_t b = 0; b < mag.size(); ++b) {
      const double level = std::log1p(kLogCompression * mag[b]);
      flux += std::max(0.0, level - prev[b]);
      prev[b] = level;
    }
    env.values[f] = flux;
  }
  return env;
}

TempoEstimate estimate_tempo(const OnsetEnvelope& env) {
  if (!(env.hop_s > 0.0) || env.values.empty()) throw ArgumentError("empty onset envelope");
  if (env.duration_s() < 5.0) throw ArgumentError("onset envelope shorter than 5 s");
  if (all_zero(env.values)) throw NoRhythmicContent();

  const std::size_t n = env.values.size();
  const double mean = std::accumulate(env.values.begin(), env.values.end(), 0.0) / static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = env.values[i] - mean;

  const auto lag_min = static_cast<std::size_t>(std::floor(60.0 / (kMaxTempoBpm * env.hop_s)));
  const auto lag_max = std::min(n - 2, static_cast<std::size_t>(std::ceil(60.0 / (kMinTempoBpm * env.hop_s))));
  const double r0 = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  if (r0 <= 0.0) throw NoRhythmicContent();

  std::vector<double> r(lag_max + 2, 0.0);
  for (std::size_t lag = lag_min > 0 ? lag_min - 1 : 0; lag <= lag_max + 1 && lag < n; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += x[i] * x[i + lag];
    r[lag] = acc / r0;
  }

  struct Peak {
    double lag;
    double strength;
    double bpm;
  };
  std::vector<Peak> peaks;
  for (std::size_t lag = std::max<std::size_t>(lag_min, 1); lag <= lag_max; ++lag) {
    if (r[lag] <= 0.0 || r[lag] < r[lag - 1] || r[lag] <= r[lag + 1]) continue;
    const double denom = r[lag - 1] - 2.0 * r[lag] + r[lag + 1];
    const double delta = denom != 0.0 ? std::clamp(0.5 * (r[lag - 1] - r[lag + 1]) / denom, -0.5, 0.5) : 0.0;
    const double refined = static_cast<double>(lag) + delta;
    const double bpm = 60.0 / (refined * env.hop_s);
    if (bpm < kMinTempoBpm || bpm > kMaxTempoBpm) continue;
    peaks.push_back({refined, r[lag], bpm});
  }
  if (peaks.empty()) throw NoRhythmicContent();

  const Peak raw = *std::max_element(peaks.begin(), peaks.end(),
                                     [](const Peak& a, const Peak& b) { return a.strength < b.strength; });
  TempoEstimate est;
  est.raw_peak_bpm = raw.bpm;
  est.peak_strength = raw.strength;

  const Peak* best_in_band = nullptr;
  for (const Peak& p : peaks) {
    if (p.strength < kTempoTieRatio * raw.strength) continue;
    if (p.bpm < kPreferredTempoLowBpm || p.bpm > kPreferredTempoHighBpm) continue;
    if (!best_in_band || p.strength > best_in_band->strength) best_in_band = &p;
  }
  if (!best_in_band) {
    // A slow raw peak can sit on a bar or a three-beat lag, which octave
    // folding alone would turn into a 2/3 or 4/3 error.
    for (const Peak& p : peaks) {
      if (p.strength < kSubdivisionRatio * raw.strength) continue;
      if (p.bpm < kPreferredTempoLowBpm || p.bpm > kPreferredTempoHighBpm) continue;
      const double ratio = raw.lag / p.lag;
      const double k = std::round(ratio);
      if (k < 2.0 || std::abs(ratio - k) > kSubdivisionTolerance * k) continue;
      if (!best_in_band || p.strength > best_in_band->strength) best_in_band = &p;
    }
  }
  double bpm = best_in_band ? best_in_band->bpm : raw.bpm;
  while (bpm < kPreferredTempoLowBpm && bpm * 2.0 <= kMaxTempoBpm) bpm *= 2.0;
  while (bpm > kPreferredTempoHighBpm && bpm / 2.0 >= kMinTempoBpm) bpm /= 2.0;
  est.bpm = bpm;
  return est;
}

BeatGrid track_beats(const OnsetEnvelope& env, double tempo_bpm, int meter) {
  if (!(tempo_bpm >= kMinTempoBpm && tempo_bpm <= kMaxTempoBpm))
    throw ArgumentError("tempo must be in [40, 240] BPM");
  if (meter != 3 && meter != 4) throw ArgumentError("meter must be 3 or 4");
  if (env.values.empty() || all_zero(env.values)) throw NoRhythmicContent();

  const std::vector<double> smooth = gaussian_smooth(env.values, 1.5);
  const auto frames = static_cast<double>(smooth.size());
  const double nominal = 60.0 / (tempo_bpm * env.hop_s);

  double best_score = -1.0;
  double best_period = nominal;
  double best_phase = 0.0;
  const int steps = static_cast<int>(std::lround(kPeriodSearchSpan / kPeriodSearchStep));
  for (int s = -steps; s <= steps; ++s) {
    const double period = nominal * (1.0 + s * kPeriodSearchStep);
    for (double phase = 0.0; phase < period; phase += kPhaseStepFrames) {
      double acc = 0.0;
      int count = 0;
      for (double pos = phase; pos < frames - 1.0; pos += period) {
        acc += interp(smooth, pos);
        ++count;
      }
      if (count == 0) continue;
      const double score = acc / count;
      if (score > best_score) {
        best_score = score;
        best_period = period;
        best_phase = phase;
      }
    }
  }

  BeatGrid grid;
  grid.meter = meter;
  grid.period_s = best_period * env.hop_s;
  std::vector<double> positions;
  for (double pos = best_phase; pos < frames; pos += best_period) positions.push_back(pos);
  for (double pos : positions) grid.beats_s.push_back(pos * env.hop_s);

  std::array<double, 4> phase_energy{};
  std::array<int, 4> phase_count{};
  for (std::size_t k = 0; k < positions.size(); ++k) {
    phase_energy[k % static_cast<std::size_t>(meter)] += interp(smooth, positions[k]);
    ++phase_count[k % static_cast<std::size_t>(meter)];
  }
  double best_mean = -1.0;
  for (int m = 0; m < meter; ++m) {
    if (phase_count[static_cast<std::size_t>(m)] == 0) continue;
    const double mean = phase_energy[static_cast<std::size_t>(m)] / phase_count[static_cast<std::size_t>(m)];
    if (mean > best_mean) {
      best_mean = mean;
      grid.downbeat_phase = m;
    }
  }
  for (std::size_t k = static_cast<std::size_t>(grid.downbeat_phase); k < grid.beats_s.size();
       k += static_cast<std::size_t>(meter))
    grid.downbeats_s.push_back(grid.beats_s[k]);
  return grid;
}

Chromagram chroma(const AudioBuffer& audio) {
  check_audio(audio);
  const auto hop = static_cast<std::size_t>(std::lround(kChromaHopSeconds * audio.sample_rate));
  const std::size_t window = next_pow2(kChromaWindowSeconds * audio.sample_rate);
  Stft stft(audio, window, hop);

  std::vector<int> bin_pc(stft.bins(), -1);
  for (std::size_t b = 1; b < stft.bins(); ++b) {
    const double hz = static_cast<double>(b) * audio.sample_rate / static_cast<double>(window);
    if (hz < kChromaMinHz || hz > kChromaMaxHz) continue;
    const long midi = std::lround(69.0 + 12.0 * std::log2(hz / 440.0));
    bin_pc[b] = static_cast<int>(((midi % 12) + 12) % 12);
  }

  Chromagram out;
  out.hop_s = static_cast<double>(hop) / audio.sample_rate;
  out.frames.resize(stft.frames());
  std::vector<double> mag;
  for (std::size_t f = 0; f < stft.frames(); ++f) {
    stft.magnitude(f, mag);
    ChromaVector& c = out.frames[f];
    c.fill(0.0);
    for (std::size_t b = 0; b < mag.size(); ++b)
      if (bin_pc[b] >= 0) c[static_cast<std::size_t>(bin_pc[b])] += mag[b] * mag[b];
    const double peak = *std::max_element(c.begin(), c.end());
    if (peak > 1e-12) {
      for (double& v : c) v /= peak;
    } else {
      c.fill(0.0);
    }
  }
  return out;
}

KeyEstimate estimate_key(const Chromagram& chromagram) {
  ChromaVector mean{};
  bool any = false;
  for (const auto& frame : chromagram.frames)
    for (std::size_t i = 0; i < 12; ++i) {
      mean[i] += frame[i];
      any = any || frame[i] > 0.0;
    }
  if (!any) throw NoTonalContent();
  if (*std::max_element(mean.begin(), mean.end()) == *std::min_element(mean.begin(), mean.end()))
    throw NoTonalContent();

  KeyEstimate est;
  double best = -2.0;
  for (int tonic = 0; tonic < 12; ++tonic) {
    for (int minor = 0; minor < 2; ++minor) {
      const double score = pearson(mean, rotate(minor ? kMinorProfile : kMajorProfile, tonic));
      est.scores[static_cast<std::size_t>(tonic + 12 * minor)] = score;
      if (score > best) {
        best = score;
        est.key = {tonic, minor ? Mode::Minor : Mode::Major};
      }
    }
  }
  est.correlation = best;
  return est;
}

std::vector<ChordSegment> detect_chords(const Chromagram& chromagram,
                                        const std::vector<double>& beat_times_s,
                                        std::optional<double> duration_s) {
  for (std::size_t i = 1; i < beat_times_s.size(); ++i)
    if (!(beat_times_s[i] > beat_times_s[i - 1])) throw ArgumentError("beat times must be ascending");
  const double duration = duration_s.value_or(chromagram.duration_s());
  if (chromagram.frames.empty() || !(duration > 0.0)) return {};

  std::vector<double> bounds{0.0};
  for (double b : beat_times_s)
    if (b > bounds.back() && b < duration) bounds.push_back(b);
  bounds.push_back(duration);

  std::array<std::array<double, 12>, 24> templates{};
  for (int r = 0; r < 12; ++r) {
    for (int minor = 0; minor < 2; ++minor) {
      auto& t = templates[static_cast<std::size_t>(r + 12 * minor)];
      t[static_cast<std::size_t>(r)] = 1.0;
      t[static_cast<std::size_t>((r + (minor ? 3 : 4)) % 12)] = 1.0;
      t[static_cast<std::size_t>((r + 7) % 12)] = 1.0;
    }
  }
  const double template_norm = std::sqrt(3.0);

  std::vector<ChordSegment> out;
  const auto n_frames = static_cast<std::ptrdiff_t>(chromagram.frames.size());
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const double a = bounds[s];
    const double b = bounds[s + 1];
    ChromaVector mean{};
    auto first = static_cast<std::ptrdiff_t>(std::ceil(a / chromagram.hop_s - 1e-9));
    auto last = static_cast<std::ptrdiff_t>(std::ceil(b / chromagram.hop_s - 1e-9)) - 1;
    first = std::max<std::ptrdiff_t>(first, 0);
    last = std::min(last, n_frames - 1);
    if (first > last) {
      first = last = std::clamp<std::ptrdiff_t>(std::lround(0.5 * (a + b) / chromagram.hop_s), 0, n_frames - 1);
    }
    for (auto f = first; f <= last; ++f)
      for (std::size_t i = 0; i < 12; ++i) mean[i] += chromagram.frames[static_cast<std::size_t>(f)][i];

    const double norm = std::sqrt(std::inner_product(mean.begin(), mean.end(), mean.begin(), 0.0));
    std::string label = "N";
    if (norm > 0.0) {
      double best = -1.0;
      std::size_t best_idx = 0;
      for (std::size_t t = 0; t < templates.size(); ++t) {
        const double sim =
            std::inner_product(mean.begin(), mean.end(), templates[t].begin(), 0.0) / (norm * template_norm);
        if (sim > best) {
          best = sim;
          best_idx = t;
        }
      }
      if (best >= kChordSimilarityFloor)
        label = chord_label(static_cast<int>(best_idx % 12), best_idx >= 12 ? Mode::Minor : Mode::Major);
    }
    if (!out.empty() && out.back().label == label) {
      out.back().end_s = b;
    } else {
      out.push_back({label, a, b});
    }
  }
  return out;
}

LowLevelFeatures extract_all(const AudioBuffer& audio, int meter) {
  const OnsetEnvelope env = onset_envelope(audio);
  const TempoEstimate tempo = estimate_tempo(env);
  BeatGrid grid = track_beats(env, tempo.bpm, meter);
  const double duration = audio.duration_s();
  std::erase_if(grid.beats_s, [&](double t) { return t >= duration; });
  std::erase_if(grid.downbeats_s, [&](double t) { return t >= duration; });

  const Chromagram ch = chroma(audio);
  LowLevelFeatures f;
  f.tempo_bpm = tempo.bpm;
  f.key = estimate_key(ch).key;
  f.downbeats_s = grid.downbeats_s;
  f.chords = detect_chords(ch, grid.beats_s, duration);
  validate_features(f, duration);
  return f;
}

void validate_features(const LowLevelFeatures& f, double duration_s) {
  constexpr double eps = 1e-9;
  if (!(f.tempo_bpm >= kMinTempoBpm && f.tempo_bpm <= kMaxTempoBpm))
    throw ArgumentError("tempo outside [40, 240] BPM");
  if (f.key.tonic < 0 || f.key.tonic > 11) throw ArgumentError("key tonic outside 0-11");
  for (std::size_t i = 0; i < f.downbeats_s.size(); ++i) {
    if (f.downbeats_s[i] < -eps || f.downbeats_s[i] > duration_s + eps)
      throw ArgumentError("downbeat outside clip");
    if (i > 0 && !(f.downbeats_s[i] > f.downbeats_s[i - 1]))
      throw ArgumentError("downbeats not strictly ascending");
  }
  for (std::size_t i = 0; i < f.chords.size(); ++i) {
    const ChordSegment& c = f.chords[i];
    if (!valid_chord_labels().count(c.label)) throw ArgumentError("invalid chord label: " + c.label);
    if (!(c.end_s > c.start_s)) throw ArgumentError("empty chord segment");
    if (c.start_s < -eps || c.end_s > duration_s + eps) throw ArgumentError("chord segment outside clip");
    if (i > 0 && c.start_s < f.chords[i - 1].end_s - eps) throw ArgumentError("chord segments overlap");
  }
}

std::string pitch_class_name(int pc) {
  return kPitchNames[static_cast<std::size_t>(((pc % 12) + 12) % 12)];
}

std::string key_to_string(const Key& key) {
  return pitch_class_name(key.tonic) + (key.mode == Mode::Major ? " major" : " minor");
}

Key parse_key(const std::string& text) {
  const auto space = text.find(' ');
  if (space == std::string::npos) throw ArgumentError("malformed key: " + text);
  const std::string tonic = text.substr(0, space);
  const std::string mode = text.substr(space + 1);
  Key key;
  const auto it = std::find(kPitchNames.begin(), kPitchNames.end(), tonic);
  if (it == kPitchNames.end()) throw ArgumentError("unknown tonic: " + tonic);
  key.tonic = static_cast<int>(it - kPitchNames.begin());
  if (mode == "major") key.mode = Mode::Major;
  else if (mode == "minor") key.mode = Mode::Minor;
  else throw ArgumentError("unknown mode: " + mode);
  return key;
}

std::string chord_label(int root, Mode mode) {
  return pitch_class_name(root) + (mode == Mode::Major ? ":maj" : ":min");
}

std::string features_to_json_line(const std::string& track_id, const LowLevelFeatures& f) {
  json j;
  j["track_id"] = track_id;
  j["tempo_bpm"] = f.tempo_bpm;
  j["key"] = key_to_string(f.key);
  j["downbeats_s"] = f.downbeats_s;
  json chords = json::array();
  for (const auto& c : f.chords) chords.push_back({{"label", c.label}, {"start_s", c.start_s}, {"end_s", c.end_s}});
  j["chords"] = std::move(chords);
  return j.dump();
}

std::pair<std::string, LowLevelFeatures> features_from_json_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    LowLevelFeatures f;
    f.tempo_bpm = j.at("tempo_bpm").get<double>();
    f.key = parse_key(j.at("key").get<std::string>());
    f.downbeats_s = j.at("downbeats_s").get<std::vector<double>>();
    for (const auto& c : j.at("chords"))
      f.chords.push_back({c.at("label").get<std::string>(), c.at("start_s").get<double>(), c.at("end_s").get<double>()});
    return {j.at("track_id").get<std::string>(), std::move(f)};
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed feature record: ") + e.what());
  }
}

void write_feature_dump(const std::map<std::string, LowLevelFeatures>& features,
                        const std::vector<std::string>& order, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write feature dump: " + path.string());
  out << kFeatureDumpHeader << '\n';
  for (const auto& id : order) {
    const auto it = features.find(id);
    if (it != features.end()) out << features_to_json_line(id, it->second) << '\n';
  }
}

std::map<std::string, LowLevelFeatures> read_feature_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read feature dump: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kFeatureDumpHeader)
    throw ArgumentError(path.string() + ": expected header " + kFeatureDumpHeader);
  std::map<std::string, LowLevelFeatures> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto [id, f] = features_from_json_line(line);
    out[id] = std::move(f);
  }
  return out;
}

}  // namespace mvforge
