#include "mvforge/description.h"

#include <charconv>
#include <cmath>
#include <regex>
#include <sstream>

#include "mvforge/error.h"

namespace mvforge {
namespace {

constexpr std::string_view kOverviewPrefix = "Overview:";
constexpr std::string_view kFramePrefix = "Frame [";

const std::regex& frame_line_re() {
  static const std::regex re(R"(^Frame \[([0-9]+(?:\.[0-9]+)?)\.\.([0-9]+(?:\.[0-9]+)?)s\]:[ \t]*(.*)$)");
  return re;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

bool starts_with(const std::string& s, std::string_view p) { return s.rfind(p, 0) == 0; }

}  // namespace

std::vector<double> sample_frame_times(double duration_s, double interval_s) {
  if (!(duration_s > 0.0)) throw ArgumentError("duration must be > 0");
  if (!(interval_s > 0.0)) throw ArgumentError("interval must be > 0");
  std::vector<double> out;
  const double limit = duration_s - 1e-9 * std::max(1.0, duration_s);
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * interval_s;
    if (!(t < limit)) break;
    out.push_back(t);
  }
  return out;
}

std::string format_seconds(double t) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, t);
  if (ec != std::errc()) throw ArgumentError("cannot format time");
  return std::string(buf, ptr);
}

std::string squash_whitespace(const std::string& text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

void validate_description(const MvDescription& desc) {
  if (trim(desc.overview).empty()) throw ArgumentError("description overview is empty");
  std::istringstream lines(desc.overview);
  for (std::string line; std::getline(lines, line);)
    if (starts_with(trim(line), kFramePrefix)) throw ArgumentError("overview contains a frame line");
  for (std::size_t i = 0; i < desc.breakdown.size(); ++i) {
    const FrameCaption& f = desc.breakdown[i];
    if (i == 0 && f.t_s != 0.0) throw ArgumentError("breakdown must start at t = 0");
    if (i > 0 && !(f.t_s > desc.breakdown[i - 1].t_s))
      throw ArgumentError("breakdown timestamps not strictly ascending");
    if (trim(f.caption).empty()) throw ArgumentError("empty frame caption at t = " + format_seconds(f.t_s));
    if (f.caption.find('\n') != std::string::npos || f.caption != trim(f.caption))
      throw ArgumentError("frame caption must be a single trimmed line");
  }
}

std::string render_target(const MvDescription& desc, double interval_s) {
  validate_description(desc);
  std::string out;
  out += kOverviewPrefix;
  out += ' ';
  out += trim(desc.overview);
  for (const FrameCaption& f : desc.breakdown) {
    out += '\n';
    out += kFramePrefix;
    out += format_seconds(f.t_s) + ".." + format_seconds(f.t_s + interval_s) + "s]: ";
    out += f.caption;
  }
  return out;
}

MvDescription parse_target(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  MvDescription desc;
  bool in_overview = false;
  bool seen_overview = false;
  std::string overview;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, frame_line_re())) {
      if (!seen_overview) throw ArgumentError("frame line before overview");
      in_overview = false;
      double t = 0.0;
      const std::string ts = m[1].str();
      std::from_chars(ts.data(), ts.data() + ts.size(), t);
      desc.breakdown.push_back({t, trim(m[3].str())});
      continue;
    }
    if (starts_with(line, kOverviewPrefix)) {
      if (seen_overview) throw ArgumentError("second overview");
      seen_overview = in_overview = true;
      overview = trim(line.substr(kOverviewPrefix.size()));
      continue;
    }
    if (in_overview) {
      overview += '\n';
      overview += line;
      continue;
    }
    if (!trim(line).empty()) throw ArgumentError("unexpected line in target: " + line);
  }
  if (!seen_overview) throw ArgumentError("target has no overview");
  desc.overview = trim(overview);
  validate_description(desc);
  return desc;
}

}  // namespace mvforge
