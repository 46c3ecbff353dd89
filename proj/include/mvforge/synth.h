#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mvforge/audio_features.h"
#include "mvforge/media.h"

// Procedural audio and video with known ground truth. Feeds the toy corpus
// and the synthetic-signal tests.
namespace mvforge::synth {

double midi_to_hz(double midi);

AudioBuffer silence(double duration_s, double sample_rate);

// Adds `other` into `into` starting at `offset_s`, growing it if needed.
void mix_into(AudioBuffer& into, const AudioBuffer& other, double offset_s = 0.0);

struct ClickTrack {
  double bpm = 120.0;
  double duration_s = 30.0;
  double sample_rate = 22050.0;
  int meter = 4;
  double accent_db = 0.0;  // extra level on the first beat of each bar
  double offset_s = 0.0;   // time of the first beat
  double amplitude = 0.5;
};

// Short decaying 1 kHz bursts on every beat.
AudioBuffer click_track(const ClickTrack& spec);

// Sum of sines at the given MIDI notes with 10 ms raised-cosine fades.
AudioBuffer tones(const std::vector<int>& midi_notes, double duration_s, double sample_rate,
                  double amplitude = 0.2);

// Ascending scale from `tonic_midi` to the octave, then the tonic triad.
// Minor uses the harmonic form.
AudioBuffer scale_clip(int tonic_midi, Mode mode, double note_s, double sample_rate);

// Triads (root pitch class, mode) played back to back, `beats_each` beats of
// `beat_s` seconds, voiced around middle C.
struct TriadSpan {
  int root = 0;
  Mode mode = Mode::Major;
  int beats = 4;
};
AudioBuffer triad_sequence(const std::vector<TriadSpan>& spans, double beat_s, double sample_rate,
                           double amplitude = 0.2);

std::vector<int> triad_notes(int root, Mode mode);

// Delays audio by prepending silence.
AudioBuffer delay(const AudioBuffer& audio, double delay_s);

// Linear-interpolation resampling that plays the clip `factor` times faster
// at the same sample rate.
AudioBuffer speed_up(const AudioBuffer& audio, double factor);

// Transposes by generating with shifted notes is preferable; this helper
// shifts a set of MIDI notes.
std::vector<int> transpose(const std::vector<int>& notes, int semitones);

LumaFrame flat_frame(int width, int height, std::uint8_t level);

// White square on black moving `step_px` pixels per frame, wrapping.
std::vector<LumaFrame> moving_square(int frames, int width, int height, int square, int step_px);

std::vector<LumaFrame> identical_frames(int frames, int width, int height, std::uint8_t level);

struct ToyCorpusOptions {
  std::size_t tracks = 10;
  double duration_s = 30.0;
  double sample_rate = 22050.0;
  double fps = 5.0;
  int width = 64;
  int height = 48;
  std::size_t silent_tracks = 0;  // the last N tracks get silent audio
  std::size_t static_tracks = 0;  // the first N tracks get a frozen video
};

// Writes audio/, video/, lyrics/ and manifest.tsv under `dir`. Returns the
// manifest path.
std::filesystem::path write_toy_corpus(const std::filesystem::path& dir, const ToyCorpusOptions& options);

}  // namespace mvforge::synth
