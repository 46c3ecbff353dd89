#include "mvforge/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mvforge/error.h"

namespace mvforge::synth {
namespace {

std::size_t samples_for(double seconds, double rate) {
  return static_cast<std::size_t>(std::llround(seconds * rate));
}

const std::vector<std::string> kGenres = {"pop", "rock", "electronic", "indie", "hip hop",
                                          "jazz", "folk", "r&b", "metal", "ambient"};

const std::vector<std::string> kLyricLines = {
    "I walk beneath the silver rain, the city hums my name",
    "we were dancing on the edge of the morning light",
    "hold on to the fire, don't let the night take you",
    "the ocean keeps the secrets that we never said",
    "run through the empty streets until the echoes fade",
    "paper hearts and neon skies, we never say goodbye",
    "every road leads back to you when the summer ends",
};

}  // namespace

double midi_to_hz(double midi) { return 440.0 * std::pow(2.0, (midi - 69.0) / 12.0); }

AudioBuffer silence(double duration_s, double sample_rate) {
  AudioBuffer a;
  a.sample_rate = sample_rate;
  a.samples.assign(samples_for(duration_s, sample_rate), 0.0f);
  return a;
}

void mix_into(AudioBuffer& into, const AudioBuffer& other, double offset_s) {
  if (into.sample_rate != other.sample_rate) throw ArgumentError("sample rates differ");
  const std::size_t off = samples_for(offset_s, into.sample_rate);
  if (into.samples.size() < off + other.samples.size()) into.samples.resize(off + other.samples.size(), 0.0f);
  for (std::size_t i = 0; i < other.samples.size(); ++i) into.samples[off + i] += other.samples[i];
}

AudioBuffer click_track(const ClickTrack& spec) {
  AudioBuffer out = silence(spec.duration_s, spec.sample_rate);
  const double beat = 60.0 / spec.bpm;
  const std::size_t click_len = samples_for(0.03, spec.sample_rate);
  const double accent = std::pow(10.0, spec.accent_db / 20.0);
  int k = 0;
  for (double t = spec.offset_s; t < spec.duration_s; t = spec.offset_s + (++k) * beat) {
    const double amp = spec.amplitude * ((k % spec.meter == 0) ? accent : 1.0);
    const std::size_t start = samples_for(t, spec.sample_rate);
    for (std::size_t n = 0; n < click_len && start + n < out.samples.size(); ++n) {
      const double tt = static_cast<double>(n) / spec.sample_rate;
      out.samples[start + n] += static_cast<float>(amp * std::exp(-tt / 0.005) * std::sin(2.0 * M_PI * 1000.0 * tt));
    }
  }
  return out;
}

AudioBuffer tones(const std::vector<int>& midi_notes, double duration_s, double sample_rate,
                  double amplitude) {
  AudioBuffer out = silence(duration_s, sample_rate);
  const std::size_t n = out.samples.size();
  const std::size_t fade = std::min(samples_for(0.01, sample_rate), n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double v = 0.0;
    for (int m : midi_notes) v += std::sin(2.0 * M_PI * midi_to_hz(m) * t);
    double g = 1.0;
    if (fade > 0 && i < fade) g = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(i) / static_cast<double>(fade));
    if (fade > 0 && i >= n - fade)
      g = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(n - 1 - i) / static_cast<double>(fade));
    out.samples[i] = static_cast<float>(amplitude * g * v);
  }
  return out;
}

AudioBuffer scale_clip(int tonic_midi, Mode mode, double note_s, double sample_rate) {
  static const std::vector<int> major = {0, 2, 4, 5, 7, 9, 11, 12};
  static const std::vector<int> harmonic_minor = {0, 2, 3, 5, 7, 8, 11, 12};
  const auto& steps = mode == Mode::Major ? major : harmonic_minor;
  AudioBuffer out = silence(0.0, sample_rate);
  double t = 0.0;
  for (int s : steps) {
    mix_into(out, tones({tonic_midi + s}, note_s, sample_rate), t);
    t += note_s;
  }
  mix_into(out, tones(triad_notes(tonic_midi, mode), 2.0 * note_s, sample_rate, 0.12), t);
  return out;
}

std::vector<int> triad_notes(int root, Mode mode) {
  return {root, root + (mode == Mode::Major ? 4 : 3), root + 7};
}

AudioBuffer triad_sequence(const std::vector<TriadSpan>& spans, double beat_s, double sample_rate,
                           double amplitude) {
  AudioBuffer out = silence(0.0, sample_rate);
  double t = 0.0;
  for (const TriadSpan& span : spans) {
    const int root_midi = 60 + ((span.root % 12) + 12) % 12;
    const double len = span.beats * beat_s;
    mix_into(out, tones(triad_notes(root_midi, span.mode), len, sample_rate, amplitude), t);
    t += len;
  }
  return out;
}

AudioBuffer delay(const AudioBuffer& audio, double delay_s) {
  AudioBuffer out = silence(delay_s, audio.sample_rate);
  mix_into(out, audio, delay_s);
  return out;
}

AudioBuffer speed_up(const AudioBuffer& audio, double factor) {
  if (!(factor > 0.0)) throw ArgumentError("speed factor must be > 0");
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  const auto n = static_cast<std::size_t>(std::floor(static_cast<double>(audio.samples.size()) / factor));
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double src = static_cast<double>(i) * factor;
    const auto j = static_cast<std::size_t>(src);
    const double f = src - static_cast<double>(j);
    const float a = audio.samples[j];
    const float b = j + 1 < audio.samples.size() ? audio.samples[j + 1] : 0.0f;
    out.samples[i] = static_cast<float>(a * (1.0 - f) + b * f);
  }
  return out;
}

std::vector<int> transpose(const std::vector<int>& notes, int semitones) {
  std::vector<int> out(notes);
  for (int& n : out) n += semitones;
  return out;
}

LumaFrame flat_frame(int width, int height, std::uint8_t level) {
  LumaFrame f;
  f.width = width;
  f.height = height;
  f.pixels.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), level);
  return f;
}

std::vector<LumaFrame> moving_square(int frames, int width, int height, int square, int step_px) {
  std::vector<LumaFrame> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int i = 0; i < frames; ++i) {
    LumaFrame f = flat_frame(width, height, 0);
    const int x0 = (i * step_px) % std::max(1, width - square);
    const int y0 = (height - square) / 2;
    for (int y = y0; y < y0 + square && y < height; ++y)
      for (int x = x0; x < x0 + square && x < width; ++x)
        f.pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = 255;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<LumaFrame> identical_frames(int frames, int width, int height, std::uint8_t level) {
  return std::vector<LumaFrame>(static_cast<std::size_t>(frames), flat_frame(width, height, level));
}

std::filesystem::path write_toy_corpus(const std::filesystem::path& dir, const ToyCorpusOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "audio");
  fs::create_directories(dir / "video");
  fs::create_directories(dir / "lyrics");
  const fs::path manifest = dir / "manifest.tsv";
  std::ofstream out(manifest, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + manifest.string());

  for (std::size_t i = 0; i < options.tracks; ++i) {
    char id_buf[16];
    std::snprintf(id_buf, sizeof id_buf, "toy%03zu", i);
    const std::string id = id_buf;
    const double bpm = 84.0 + 8.0 * static_cast<double>(i % 9);
    const int tonic = static_cast<int>((i * 7) % 12);
    const Mode mode = (i % 3 == 2) ? Mode::Minor : Mode::Major;
    const bool silent = i >= options.tracks - std::min(options.silent_tracks, options.tracks);

    AudioBuffer audio = silence(options.duration_s, options.sample_rate);
    if (!silent) {
      ClickTrack clicks;
      clicks.bpm = bpm;
      clicks.duration_s = options.duration_s;
      clicks.sample_rate = options.sample_rate;
      clicks.accent_db = 6.0;
      mix_into(audio, click_track(clicks));
      // I - vi - IV - V (major) or i - VI - iv - V (minor), one bar each.
      const std::vector<TriadSpan> cadence =
          mode == Mode::Major
              ? std::vector<TriadSpan>{{tonic, Mode::Major, 4}, {tonic + 9, Mode::Minor, 4},
                                       {tonic + 5, Mode::Major, 4}, {tonic + 7, Mode::Major, 4}}
              : std::vector<TriadSpan>{{tonic, Mode::Minor, 4}, {tonic + 8, Mode::Major, 4},
                                       {tonic + 5, Mode::Minor, 4}, {tonic + 7, Mode::Major, 4}};
      std::vector<TriadSpan> spans;
      const double beat = 60.0 / bpm;
      while (static_cast<double>(spans.size()) * 4 * beat < options.duration_s)
        spans.push_back(cadence[spans.size() % cadence.size()]);
      AudioBuffer harmony = triad_sequence(spans, beat, options.sample_rate, 0.15);
      harmony.samples.resize(audio.samples.size(), 0.0f);
      mix_into(audio, harmony);
    }
    const fs::path audio_rel = fs::path("audio") / (id + ".wav");
    write_wav(dir / audio_rel, audio);

    const int frame_count = static_cast<int>(std::lround(options.duration_s * options.fps));
    const bool frozen = i < options.static_tracks;
    const auto frames = frozen ? identical_frames(frame_count, options.width, options.height, 90)
                               : moving_square(frame_count, options.width, options.height,
                                               options.height / 3, 2 + static_cast<int>(i % 4));
    const fs::path video_rel = fs::path("video") / (id + ".avi");
    write_luma_video(dir / video_rel, frames, options.fps);

    std::string lyrics_rel = "-";
    if (i % 4 != 3) {
      lyrics_rel = (fs::path("lyrics") / (id + ".txt")).string();
      std::ofstream ly(dir / lyrics_rel, std::ios::binary);
      for (std::size_t l = 0; l < 4; ++l) ly << kLyricLines[(i + l) % kLyricLines.size()] << '\n';
    }

    const std::string genres = kGenres[i % kGenres.size()] + ";" + kGenres[(i + 3) % kGenres.size()];
    char energy[16], valence[16];
    std::snprintf(energy, sizeof energy, "%.2f", 0.3 + 0.05 * static_cast<double>(i % 10));
    std::snprintf(valence, sizeof valence, "%.2f", 0.8 - 0.05 * static_cast<double>(i % 10));
    out << id << '\t' << audio_rel.string() << '\t' << video_rel.string() << '\t' << genres << '\t' << energy
        << '\t' << valence << '\t' << lyrics_rel << '\n';
  }
  return manifest;
}

}  // namespace mvforge::synth
