#pragma once

#include <string>
#include <vector>

namespace mvforge {

struct FrameCaption {
  double t_s = 0.0;
  std::string caption;

  bool operator==(const FrameCaption&) const = default;
};

// Target text: an overview paragraph plus a timestamped frame breakdown.
struct MvDescription {
  std::string overview;
  std::vector<FrameCaption> breakdown;

  bool operator==(const MvDescription&) const = default;
};

inline constexpr double kFrameIntervalSeconds = 2.0;

// t = 0, interval, 2*interval, ... strictly below duration.
std::vector<double> sample_frame_times(double duration_s, double interval_s = kFrameIntervalSeconds);

// Overview nonempty and free of frame-line prefixes; timestamps strictly
// ascending from 0; captions single-line and nonempty. Throws ArgumentError.
void validate_description(const MvDescription& desc);

// "Overview: ...\nFrame [0..2s]: ...\n..." -- the end of each range is
// t + interval and is informational only.
std::string render_target(const MvDescription& desc, double interval_s = kFrameIntervalSeconds);

// Inverse of render_target. Throws ArgumentError on layout violations.
MvDescription parse_target(const std::string& text);

// Shortest decimal that round-trips ("2", "28", "2.5").
std::string format_seconds(double t);

// Collapses runs of whitespace (including newlines) to one space and trims.
std::string squash_whitespace(const std::string& text);

}  // namespace mvforge
