#include "mvforge/media.h"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "mvforge/error.h"

namespace mvforge {
namespace {

struct WavFormat {
  int format = 0;  // 1 PCM, 3 float
  int channels = 0;
  std::uint32_t sample_rate = 0;
  int bits = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
};

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

WavFormat parse_wav_header(const std::string& bytes, const std::filesystem::path& path) {
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  auto fail = [&](const std::string& why) -> MediaError {
    return MediaError(path.string() + ": " + why);
  };
  if (n < 12 || std::memcmp(b, "RIFF", 4) != 0 || std::memcmp(b + 8, "WAVE", 4) != 0)
    throw fail("not a RIFF/WAVE file");

  WavFormat fmt;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const std::size_t size = le32(b + pos + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(b + pos, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > n) throw fail("truncated fmt chunk");
      fmt.format = le16(b + body);
      fmt.channels = le16(b + body + 2);
      fmt.sample_rate = le32(b + body + 4);
      fmt.bits = le16(b + body + 14);
      if (fmt.format == 0xFFFE && size >= 40 && body + 26 <= n) fmt.format = le16(b + body + 24);
      have_fmt = true;
    } else if (std::memcmp(b + pos, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      fmt.data_offset = body;
      fmt.data_size = std::min(size, n - body);
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw fail("missing fmt chunk");
  if (fmt.data_offset == 0) throw fail("missing data chunk");
  if (fmt.channels < 1 || fmt.sample_rate == 0) throw fail("invalid channel count or rate");
  const bool pcm = fmt.format == 1 && (fmt.bits == 8 || fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
  const bool flt = fmt.format == 3 && (fmt.bits == 32 || fmt.bits == 64);
  if (!pcm && !flt)
    throw fail("unsupported encoding (format " + std::to_string(fmt.format) + ", " +
               std::to_string(fmt.bits) + " bit)");
  return fmt;
}

double decode_sample(const unsigned char* p, const WavFormat& fmt) {
  if (fmt.format == 3) {
    if (fmt.bits == 32) {
      float f;
      std::memcpy(&f, p, 4);
      return f;
    }
    double d;
    std::memcpy(&d, p, 8);
    return d;
  }
  switch (fmt.bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
  }
}

class Capture {
 public:
  explicit Capture(const std::filesystem::path& path) : path_(path) {
    cap_.open(path.string(), cv::CAP_ANY);
    if (!cap_.isOpened()) throw MediaError(path.string() + ": cannot open video");
  }
  cv::VideoCapture& get() { return cap_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  cv::VideoCapture cap_;
};

// Walks the stream once, calling `take` for every requested index in
// ascending order. Requests past the end reuse the last decoded frame.
template <typename Take>
void visit_frames(const std::filesystem::path& path, std::span<const std::int64_t> indices,
                  Take&& take) {
  std::map<std::int64_t, std::vector<std::size_t>> wanted;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0) throw ArgumentError("negative frame index");
    wanted[indices[i]].push_back(i);
  }
  if (wanted.empty()) return;

  Capture cap(path);
  cv::Mat frame;
  cv::Mat last;
  std::int64_t pos = 0;
  auto it = wanted.begin();
  while (it != wanted.end()) {
    if (!cap.get().grab()) break;
    if (pos == it->first) {
      if (!cap.get().retrieve(frame) || frame.empty())
        throw MediaError(path.string() + ": cannot decode frame " + std::to_string(pos));
      last = frame.clone();
      for (std::size_t slot : it->second) take(slot, last);
      ++it;
    }
    ++pos;
  }
  if (it != wanted.end()) {
    if (last.empty()) {
      // Nothing requested was reachable; fall back to the final frame.
      Capture again(path);
      cv::Mat f;
      while (again.get().read(f))
        if (!f.empty()) last = f.clone();
      if (last.empty()) throw MediaError(path.string() + ": no decodable frames");
    }
    for (; it != wanted.end(); ++it)
      for (std::size_t slot : it->second) take(slot, last);
  }
}

cv::Mat to_gray(const cv::Mat& frame) {
  if (frame.channels() == 1) return frame;
  cv::Mat gray;
  cv::cvtColor(frame, gray, frame.channels() == 4 ? cv::COLOR_BGRA2GRAY : cv::COLOR_BGR2GRAY);
  return gray;
}

}  // namespace

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MediaError(path.string() + ": cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  const WavFormat fmt = parse_wav_header(bytes, path);
  const std::size_t bytes_per_sample = static_cast<std::size_t>(fmt.bits / 8);
  const std::size_t frame_bytes = bytes_per_sample * static_cast<std::size_t>(fmt.channels);
  const std::size_t frames = fmt.data_size / frame_bytes;

  AudioBuffer out;
  out.sample_rate = fmt.sample_rate;
  out.samples.resize(frames);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data()) + fmt.data_offset;
  for (std::size_t i = 0; i < frames; ++i) {
    double sum = 0.0;
    for (int c = 0; c < fmt.channels; ++c)
      sum += decode_sample(data + i * frame_bytes + static_cast<std::size_t>(c) * bytes_per_sample, fmt);
    out.samples[i] = static_cast<float>(sum / fmt.channels);
  }
  return out;
}

double probe_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MediaError(path.string() + ": cannot open");
  // Headers are small; 64 KiB covers any sane chunk layout before "data".
  std::string head(65536, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  const auto file_size = std::filesystem::file_size(path);
  WavFormat fmt = parse_wav_header(head, path);
  const std::size_t data_size =
      std::min<std::size_t>(le32(reinterpret_cast<const unsigned char*>(head.data()) + fmt.data_offset - 4),
                            file_size - fmt.data_offset);
  const std::size_t frame_bytes = static_cast<std::size_t>(fmt.bits / 8 * fmt.channels);
  const std::size_t frames = data_size / frame_bytes;
  if (frames == 0) throw MediaError(path.string() + ": empty audio");
  return static_cast<double>(frames) / fmt.sample_rate;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate));
  const auto data_size = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_size);
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
  };
  out += "RIFF";
  put32(36 + data_size);
  out += "WAVEfmt ";
  put32(16);
  put16(1);
  put16(1);
  put32(rate);
  put32(rate * 2);
  put16(2);
  put16(16);
  out += "data";
  put32(data_size);
  for (float s : audio.samples) {
    const double c = std::clamp(static_cast<double>(s), -1.0, 1.0);
    put16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32767.0))));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw MediaError(path.string() + ": cannot write");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

VideoInfo probe_video(const std::filesystem::path& path) {
  Capture cap(path);
  VideoInfo info;
  info.fps = cap.get().get(cv::CAP_PROP_FPS);
  info.width = static_cast<int>(cap.get().get(cv::CAP_PROP_FRAME_WIDTH));
  info.height = static_cast<int>(cap.get().get(cv::CAP_PROP_FRAME_HEIGHT));
  info.frame_count = static_cast<std::int64_t>(cap.get().get(cv::CAP_PROP_FRAME_COUNT));
  if (info.frame_count <= 0) {
    // Container without an index: count by walking the stream.
    std::int64_t n = 0;
    while (cap.get().grab()) ++n;
    info.frame_count = n;
  }
  if (info.frame_count <= 0) throw MediaError(path.string() + ": no frames");
  if (!(info.fps > 0)) throw MediaError(path.string() + ": unknown frame rate");
  return info;
}

std::vector<std::int64_t> uniform_frame_indices(std::int64_t frame_count, int count) {
  if (count < 2) throw ArgumentError("sample count must be >= 2");
  if (frame_count < 1) throw ArgumentError("frame count must be >= 1");
  std::vector<std::int64_t> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(
        std::floor(static_cast<double>(i) * static_cast<double>(frame_count - 1) / (count - 1) + 0.5));
  return out;
}

std::int64_t frame_index_at(const VideoInfo& info, double t_s) {
  const auto idx = static_cast<std::int64_t>(std::floor(t_s * info.fps + 1e-6));
  return std::clamp<std::int64_t>(idx, 0, std::max<std::int64_t>(info.frame_count - 1, 0));
}

std::vector<LumaFrame> read_luma_frames(const std::filesystem::path& path,
                                        std::span<const std::int64_t> indices) {
  std::vector<LumaFrame> out(indices.size());
  visit_frames(path, indices, [&](std::size_t slot, const cv::Mat& frame) {
    cv::Mat gray = to_gray(frame);
    if (gray.depth() != CV_8U) gray.convertTo(gray, CV_8U);
    LumaFrame& f = out[slot];
    f.width = gray.cols;
    f.height = gray.rows;
    f.pixels.resize(static_cast<std::size_t>(gray.cols) * static_cast<std::size_t>(gray.rows));
    for (int r = 0; r < gray.rows; ++r)
      std::memcpy(f.pixels.data() + static_cast<std::size_t>(r) * gray.cols, gray.ptr<std::uint8_t>(r),
                  static_cast<std::size_t>(gray.cols));
  });
  return out;
}

std::vector<std::string> read_png_frames(const std::filesystem::path& path,
                                         std::span<const std::int64_t> indices) {
  std::vector<std::string> out(indices.size());
  visit_frames(path, indices, [&](std::size_t slot, const cv::Mat& frame) {
    std::vector<unsigned char> buf;
    if (!cv::imencode(".png", frame, buf))
      throw MediaError(path.string() + ": PNG encoding failed");
    out[slot].assign(buf.begin(), buf.end());
  });
  return out;
}

double mean_interframe_difference(std::span<const LumaFrame> frames) {
  if (frames.size() < 2) throw ArgumentError("need at least two frames");
  double total = 0.0;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const LumaFrame& a = frames[i - 1];
    const LumaFrame& b = frames[i];
    if (a.width != b.width || a.height != b.height || a.pixels.empty())
      throw MediaError("frame dimensions differ");
    std::uint64_t sum = 0;
    for (std::size_t p = 0; p < a.pixels.size(); ++p)
      sum += static_cast<std::uint64_t>(std::abs(int{a.pixels[p]} - int{b.pixels[p]}));
    total += static_cast<double>(sum) / static_cast<double>(a.pixels.size());
  }
  return total / static_cast<double>(frames.size() - 1);
}

void write_luma_video(const std::filesystem::path& path, std::span<const LumaFrame> frames,
                      double fps) {
  if (frames.empty()) throw ArgumentError("no frames to write");
  const cv::Size size(frames.front().width, frames.front().height);
  cv::VideoWriter writer(path.string(), cv::VideoWriter::fourcc('M', 'J', 'P', 'G'), fps, size,
                         false);
  if (!writer.isOpened()) throw MediaError(path.string() + ": cannot open video writer");
  for (const LumaFrame& f : frames) {
    if (f.width != size.width || f.height != size.height)
      throw ArgumentError("frame dimensions differ");
    cv::Mat m(f.height, f.width, CV_8UC1, const_cast<std::uint8_t*>(f.pixels.data()));
    writer.write(m);
  }
}

}  // namespace mvforge
