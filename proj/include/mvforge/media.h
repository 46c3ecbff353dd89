#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mvforge {

// Mono PCM audio in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  double sample_rate = 0.0;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Reads a RIFF/WAVE file. Integer PCM (8/16/24/32 bit) and IEEE float
// (32/64 bit) are accepted; channels are averaged down to mono.
// Throws MediaError on anything else.
AudioBuffer read_wav(const std::filesystem::path& path);

// Writes 16-bit PCM mono. Samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

// Parses only the header; cheap validity check used at ingest time.
// Returns the clip duration in seconds.
double probe_wav(const std::filesystem::path& path);

struct VideoInfo {
  std::int64_t frame_count = 0;
  double fps = 0.0;
  int width = 0;
  int height = 0;

  double duration_s() const { return fps > 0 ? static_cast<double>(frame_count) / fps : 0.0; }
};

// 8-bit luminance plane (BT.601 weights), row-major.
struct LumaFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

// Throws MediaError when the container cannot be opened or has no frames.
VideoInfo probe_video(const std::filesystem::path& path);

// Frame indices for `count` uniformly spaced samples over `frame_count`
// frames, first and last frame included (count >= 2).
std::vector<std::int64_t> uniform_frame_indices(std::int64_t frame_count, int count);

// Frame index shown at time t (floor(t * fps)), clamped to the stream.
std::int64_t frame_index_at(const VideoInfo& info, double t_s);

// Decodes the requested frames (ascending or not, duplicates allowed) in one
// sequential pass. Indices past the real end of stream resolve to the last
// decodable frame.
std::vector<LumaFrame> read_luma_frames(const std::filesystem::path& path,
                                        std::span<const std::int64_t> indices);

// Same access pattern, but returns each frame as PNG bytes (colour kept).
std::vector<std::string> read_png_frames(const std::filesystem::path& path,
                                         std::span<const std::int64_t> indices);

// Mean absolute per-pixel luminance difference between consecutive frames.
// All frames must share dimensions.
double mean_interframe_difference(std::span<const LumaFrame> frames);

// Writes greyscale frames as an MJPG/AVI stream. Used for fixtures.
void write_luma_video(const std::filesystem::path& path, std::span<const LumaFrame> frames,
                      double fps);

std::string read_file_bytes(const std::filesystem::path& path);

}  // namespace mvforge
