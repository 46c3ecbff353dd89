#include "mvforge/providers.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include "mvforge/digest.h"
#include "mvforge/error.h"
#include "mvforge/media.h"

namespace mvforge {
namespace {

using json = nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t count_kind(const std::vector<Attachment>& atts, AttachmentKind kind) {
  return static_cast<std::size_t>(
      std::count_if(atts.begin(), atts.end(), [&](const Attachment& a) { return a.kind == kind; }));
}

// Value of the first prompt line starting with `prefix`, or "".
std::string prompt_line(const std::string& prompt, std::string_view prefix) {
  std::istringstream in(prompt);
  for (std::string line; std::getline(in, line);)
    if (line.rfind(prefix, 0) == 0) return trim(std::string_view(line).substr(prefix.size()));
  return {};
}

std::string first_sentence(const std::string& text) {
  const auto end = text.find_first_of(".!?");
  std::string s = trim(end == std::string::npos ? text : text.substr(0, end));
  if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  return s;
}

// Deterministic draws for the mock: successive 64-bit words of a SHA-256
// chain over the seed and the request's cache key.
class MockDraws {
 public:
  MockDraws(std::uint64_t seed, const std::string& key) : state_(Sha256Builder().field(std::to_string(seed)).field(key).hex()) {}

  std::uint64_t next() {
    if (offset_ + 16 > state_.size()) {
      state_ = sha256_hex(state_);
      offset_ = 0;
    }
    const std::uint64_t v = std::stoull(state_.substr(offset_, 16), nullptr, 16);
    offset_ += 16;
    return v;
  }

  template <typename T>
  const T& pick(const std::vector<T>& options) {
    return options[next() % options.size()];
  }

 private:
  std::string state_;
  std::size_t offset_ = 0;
};

const std::vector<std::string> kMoods = {"brooding", "euphoric", "wistful", "restless", "warm",
                                         "defiant", "dreamy", "tense", "playful", "melancholic"};
const std::vector<std::string> kStyles = {"synth-pop", "indie rock", "electro", "soul", "folk-pop",
                                          "alternative", "dance-pop", "trip-hop", "post-punk", "ballad"};
const std::vector<std::string> kInstruments = {"punchy drums", "a pulsing bass line", "bright synth pads",
                                               "chiming guitars", "a soft piano", "layered vocals",
                                               "hand claps", "a string section"};
const std::vector<std::string> kTextures = {"a steady four-on-the-floor drive", "airy reverb tails",
                                            "a sparse, close-miked mix", "a wall of distorted sound",
                                            "call-and-response hooks", "a slow build into the chorus"};
const std::vector<std::string> kSubjects = {"A singer", "Two dancers", "A crowd", "A lone figure",
                                            "The band", "A child", "A couple", "An animated fox"};
const std::vector<std::string> kActions = {"walks toward the camera", "spins slowly", "raises their hands",
                                           "stares out of a window", "plays under strobe lights",
                                           "runs across the frame", "sits motionless", "laughs and turns away"};
const std::vector<std::string> kSettings = {"a neon-lit street", "an empty warehouse", "a sunlit field",
                                            "a crowded stage", "a rain-soaked rooftop", "a small bedroom",
                                            "a desert highway", "a forest clearing"};
const std::vector<std::string> kLighting = {"cold blue light", "golden-hour sun", "flickering strobes",
                                            "soft window light", "deep red haze", "harsh spotlights"};
const std::vector<std::string> kCamera = {"the camera holds still", "the camera drifts left",
                                          "a slow push-in", "a quick cut to a close-up",
                                          "a handheld wobble", "a wide aerial pull-back"};
const std::vector<std::string> kThemes = {"longing", "escape", "first love", "loss", "self-belief",
                                          "nostalgia", "freedom", "heartbreak"};
const std::vector<std::string> kEmotions = {"hopeful", "bittersweet", "urgent", "tender", "defiant", "quiet"};

std::vector<std::string> longest_words(const std::string& text, std::size_t count) {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 3 && std::find(words.begin(), words.end(), cur) == words.end()) words.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c)))
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    else
      flush();
  }
  flush();
  std::stable_sort(words.begin(), words.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  if (words.size() > count) words.resize(count);
  return words;
}

std::string mock_unified(const std::string& prompt) {
  const std::string caption = prompt_line(prompt, "Music caption:");
  const std::string tempo = prompt_line(prompt, "Tempo:");
  const std::string key = prompt_line(prompt, "Key:");
  const std::string chords = prompt_line(prompt, "Chords:");
  const std::string lyrics = prompt_line(prompt, "Lyrics understanding:");
  std::vector<std::string> labels;
  std::istringstream cs(chords);
  for (std::string tok; cs >> tok && labels.size() < 4;)
    if (tok.find(':') != std::string::npos || tok == "N") {
      if (!tok.empty() && tok.back() == ',') tok.pop_back();
      labels.push_back(tok);
    }
  std::string out = caption;
  out += " It moves at " + tempo + " in " + key;
  if (!labels.empty()) {
    out += ", cycling through";
    for (std::size_t i = 0; i < labels.size(); ++i) out += (i ? ", " : " ") + labels[i];
  }
  out += ", with downbeats marking each bar.";
  if (!lyrics.empty()) out += " Lyrically, " + first_sentence(lyrics) + ".";
  return out;
}

std::string mock_compose(const std::string& prompt, MockDraws& draws) {
  static const std::regex frame_re(R"(^t=([0-9]+(?:\.[0-9]+)?): (.*)$)");
  double interval = 2.0;
  if (const std::string iv = prompt_line(prompt, "Frame interval:"); !iv.empty()) interval = std::stod(iv);
  std::string out = "Overview: A " + draws.pick(kMoods) + " video whose cuts follow the music: " +
                    first_sentence(prompt_line(prompt, "Music:")) + ".";
  std::istringstream in(prompt);
  for (std::string line; std::getline(in, line);) {
    std::smatch m;
    if (!std::regex_match(line, m, frame_re)) continue;
    const double t = std::stod(m[1].str());
    std::string caption = trim(m[2].str());
    while (!caption.empty() && caption.back() == '.') caption.pop_back();
    out += "\nFrame [" + format_seconds(t) + ".." + format_seconds(t + interval) + "s]: " + caption + ", " +
           draws.pick(kCamera) + ".";
  }
  return out;
}

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

ParsedUrl parse_base_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ArgumentError("invalid base URL: " + url);
  std::string path = m[2].str();
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {m[1].str(), path};
}

}  // namespace

std::string_view task_name(Task task) {
  switch (task) {
    case Task::MusicCaption: return "music_caption";
    case Task::LyricsUnderstanding: return "lyrics_understanding";
    case Task::FrameCaption: return "frame_caption";
    case Task::MvTypeTag: return "mv_type_tag";
    case Task::UnifiedCaption: return "unified_caption";
    case Task::MvDescriptionCompose: return "mv_description_compose";
  }
  return "unknown";
}

std::string_view attachment_kind_name(AttachmentKind kind) {
  switch (kind) {
    case AttachmentKind::Audio: return "audio";
    case AttachmentKind::Image: return "image";
    case AttachmentKind::Text: return "text";
  }
  return "unknown";
}

Attachment Attachment::audio_file(const std::filesystem::path& path) {
  return {AttachmentKind::Audio, "audio/wav", read_file_bytes(path)};
}

Attachment Attachment::png(std::string bytes) { return {AttachmentKind::Image, "image/png", std::move(bytes)}; }

Attachment Attachment::text(std::string content) {
  return {AttachmentKind::Text, "text/plain", std::move(content)};
}

std::string Attachment::digest() const {
  return Sha256Builder().field(attachment_kind_name(kind)).field(mime).field(data).hex();
}

void ProviderRequest::validate() const {
  if (trim(prompt).empty()) throw ArgumentError("request prompt is empty");
  const std::size_t audio = count_kind(attachments, AttachmentKind::Audio);
  const std::size_t image = count_kind(attachments, AttachmentKind::Image);
  const std::size_t text = count_kind(attachments, AttachmentKind::Text);
  bool ok = false;
  switch (task) {
    case Task::MusicCaption: ok = audio == 1 && image == 0 && text == 0; break;
    case Task::LyricsUnderstanding: ok = audio == 0 && image == 0 && text == 1; break;
    case Task::FrameCaption: ok = audio == 0 && image == 1 && text == 0; break;
    case Task::MvTypeTag: ok = audio == 0 && image >= 1 && text == 0; break;
    case Task::UnifiedCaption:
    case Task::MvDescriptionCompose: ok = attachments.empty(); break;
  }
  if (!ok)
    throw ArgumentError("attachment arity for " + std::string(task_name(task)) + ": audio=" +
                        std::to_string(audio) + " image=" + std::to_string(image) +
                        " text=" + std::to_string(text));
}

std::string cache_key(const ProviderRequest& request, std::string_view backend_id) {
  Sha256Builder h;
  h.field("mvforge-cache/v1").field(task_name(request.task)).field(request.prompt).field(request.template_hash);
  h.field(std::to_string(request.attachments.size()));
  for (const Attachment& a : request.attachments) h.field(a.digest());
  h.field(backend_id);
  return h.hex();
}

// ---- MockBackend

std::string MockBackend::id() const { return "mock/v1:" + std::to_string(seed_); }

void MockBackend::script(Task task, std::vector<std::string> responses) {
  std::lock_guard lock(mu_);
  auto& queue = scripted_[task];
  queue.insert(queue.end(), std::make_move_iterator(responses.begin()),
               std::make_move_iterator(responses.end()));
}

std::string MockBackend::complete(const ProviderRequest& request) {
  request.validate();
  ++calls_;
  {
    std::lock_guard lock(mu_);
    auto it = scripted_.find(request.task);
    if (it != scripted_.end() && !it->second.empty()) {
      std::string r = std::move(it->second.front());
      it->second.erase(it->second.begin());
      return r;
    }
  }
  MockDraws draws(seed_, cache_key(request, id()));
  switch (request.task) {
    case Task::MusicCaption:
      return "A " + draws.pick(kMoods) + " " + draws.pick(kStyles) + " track built on " + draws.pick(kInstruments) +
             " and " + draws.pick(kInstruments) + ", with " + draws.pick(kTextures) + ".";
    case Task::LyricsUnderstanding: {
      const auto words = longest_words(request.attachments.front().data, 2);
      std::string images = words.empty() ? "everyday things" : words[0];
      if (words.size() > 1) images += " and " + words[1];
      return "The lyrics are about " + draws.pick(kThemes) + ", told through images of " + images +
             ", and the tone is " + draws.pick(kEmotions) + ".";
    }
    case Task::FrameCaption:
      return draws.pick(kSubjects) + " " + draws.pick(kActions) + " in " + draws.pick(kSettings) + " under " +
             draws.pick(kLighting) + ".";
    case Task::MvTypeTag: return std::string(mv_type_name(draws.pick(std::vector<MvType>(all_mv_types().begin(), all_mv_types().end()))));
    case Task::UnifiedCaption: return mock_unified(request.prompt);
    case Task::MvDescriptionCompose: return mock_compose(request.prompt, draws);
  }
  throw ArgumentError("unknown task");
}

// ---- HttpBackend

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  parse_base_url(config_.base_url);
}

std::string HttpBackend::id() const { return "http:" + config_.base_url + "|" + config_.model; }

std::string HttpBackend::build_payload(const ProviderRequest& request) const {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", request.prompt}});
  for (const Attachment& a : request.attachments) {
    switch (a.kind) {
      case AttachmentKind::Image:
        content.push_back({{"type", "image_url"},
                           {"image_url", {{"url", "data:" + a.mime + ";base64," + base64_encode(a.data)}}}});
        break;
      case AttachmentKind::Audio:
        content.push_back({{"type", "input_audio"},
                           {"input_audio", {{"data", base64_encode(a.data)}, {"format", "wav"}}}});
        break;
      case AttachmentKind::Text: content.push_back({{"type", "text"}, {"text", a.data}}); break;
    }
  }
  json body = {{"model", config_.model},
               {"temperature", 0},
               {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
  return body.dump();
}

std::string HttpBackend::complete(const ProviderRequest& request) {
  request.validate();
  const ParsedUrl url = parse_base_url(config_.base_url);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  ++network_calls_;
  const auto res = client.Post(url.path + "/chat/completions", headers, build_payload(request), "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransportError("backend returned HTTP " + std::to_string(res->status));
  if (res->status != 200)
    throw ProtocolError("backend returned HTTP " + std::to_string(res->status), res->body);

  const json parsed = json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) throw ProtocolError("response is not JSON", res->body);
  const json* content = nullptr;
  if (parsed.contains("choices") && parsed["choices"].is_array() && !parsed["choices"].empty()) {
    const json& choice = parsed["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content")) content = &choice["message"]["content"];
  }
  if (content == nullptr || !content->is_string()) throw ProtocolError("response has no message content", res->body);
  return content->get<std::string>();
}

// ---- ResponseCache

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  if (key.size() < 3) throw ArgumentError("cache key too short");
  return dir_ / key.substr(0, 2) / (key + ".txt");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ResponseCache::put(const std::string& key, const std::string& response) const {
  const auto final_path = path_for(key);
  std::filesystem::create_directories(final_path.parent_path());
  std::ostringstream tmp_name;
  tmp_name << key << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.'
           << std::chrono::steady_clock::now().time_since_epoch().count();
  const auto tmp = final_path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary);
    out << response;
    if (!out.flush()) throw Error("cannot write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, final_path);
}

// ---- retry and rate limiting

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt, double u) {
  const double base = static_cast<double>(policy.base_delay.count()) * std::pow(policy.multiplier, attempt - 1);
  const double jittered = base * (1.0 + policy.jitter * (2.0 * u - 1.0));
  return std::chrono::milliseconds(static_cast<long long>(std::llround(std::max(0.0, jittered))));
}

RateLimiter::RateLimiter(double requests_per_minute)
    : rate_per_s_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, requests_per_minute)),
      tokens_(capacity_),
      last_(Clock::now()) {}

bool RateLimiter::try_acquire(Clock::time_point now) {
  if (rate_per_s_ <= 0.0) return true;
  std::lock_guard lock(mu_);
  if (now > last_) {
    tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_per_s_);
    last_ = now;
  }
  if (tokens_ < 1.0) return false;
  tokens_ -= 1.0;
  return true;
}

void RateLimiter::acquire() {
  if (rate_per_s_ <= 0.0) return;
  while (!try_acquire(Clock::now())) {
    double deficit;
    {
      std::lock_guard lock(mu_);
      deficit = 1.0 - tokens_;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(std::max(0.001, deficit / rate_per_s_)));
  }
}

// ---- Provider

Provider::Provider(std::shared_ptr<Backend> backend, ProviderOptions options)
    : backend_(std::move(backend)), options_(std::move(options)), limiter_(options_.requests_per_minute) {
  if (!backend_) throw ArgumentError("provider needs a backend");
  if (options_.retry.max_attempts < 1) throw ArgumentError("max_attempts must be >= 1");
  if (options_.max_in_flight == 0) throw ArgumentError("max_in_flight must be >= 1");
  if (options_.cache_dir) cache_.emplace(*options_.cache_dir);
}

ProviderStats Provider::stats() const { return {hits_.load(), misses_.load(), calls_.load(), retries_.load()}; }

std::string Provider::call_backend(const ProviderRequest& request) {
  thread_local std::mt19937_64 rng(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  for (int attempt = 1;; ++attempt) {
    try {
      ++calls_;
      return backend_->complete(request);
    } catch (const TransportError&) {
      if (attempt >= options_.retry.max_attempts) throw;
      ++retries_;
      const auto delay = backoff_delay(options_.retry, attempt, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
      if (options_.retry.sleep)
        options_.retry.sleep(delay);
      else
        std::this_thread::sleep_for(delay);
    }
  }
}

std::string Provider::complete(const ProviderRequest& request) {
  request.validate();
  const std::string key = cache_key(request, backend_->id());
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++hits_;
      return *hit;
    }
  }
  ++misses_;
  limiter_.acquire();
  {
    std::unique_lock lock(flight_mu_);
    flight_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
    ++in_flight_;
  }
  std::string response;
  try {
    response = call_backend(request);
  } catch (...) {
    {
      std::lock_guard lock(flight_mu_);
      --in_flight_;
    }
    flight_cv_.notify_one();
    throw;
  }
  {
    std::lock_guard lock(flight_mu_);
    --in_flight_;
  }
  flight_cv_.notify_one();
  if (trim(response).empty()) throw ProtocolError("empty response for " + std::string(task_name(request.task)), response);
  if (cache_) cache_->put(key, response);
  return response;
}

// ---- MV types

const std::array<MvType, 10>& all_mv_types() {
  static const std::array<MvType, 10> types = {
      MvType::LivePerformance, MvType::LyricVideo,      MvType::Animation,    MvType::StoryNarrative,
      MvType::ArtisticAbstract, MvType::DancePerformance, MvType::BehindTheScenes, MvType::NatureScenic,
      MvType::PictureMontage,  MvType::CinematicDrama};
  return types;
}

std::string_view mv_type_name(MvType type) {
  switch (type) {
    case MvType::LivePerformance: return "Live Performance";
    case MvType::LyricVideo: return "Lyric Video";
    case MvType::Animation: return "Animation";
    case MvType::StoryNarrative: return "Story Narrative";
    case MvType::ArtisticAbstract: return "Artistic/Abstract";
    case MvType::DancePerformance: return "Dance Performance";
    case MvType::BehindTheScenes: return "Behind-the-Scenes";
    case MvType::NatureScenic: return "Nature/Scenic";
    case MvType::PictureMontage: return "Static/Dynamic Picture Montage";
    case MvType::CinematicDrama: return "Cinematic Drama";
  }
  return "unknown";
}

std::optional<MvType> parse_mv_type(std::string_view text) {
  std::string s = trim(text);
  auto strip = [&] {
    bool changed = false;
    while (!s.empty() && (s.front() == '"' || s.front() == '\'' || s.front() == '`')) {
      s.erase(s.begin());
      changed = true;
    }
    while (!s.empty() && (s.back() == '"' || s.back() == '\'' || s.back() == '`' || s.back() == '.')) {
      s.pop_back();
      changed = true;
    }
    s = trim(s);
    return changed;
  };
  while (strip()) {
  }
  const std::string key = lower(s);
  for (MvType t : all_mv_types())
    if (lower(mv_type_name(t)) == key) return t;
  return std::nullopt;
}

MvType mv_type_from_string(std::string_view text) {
  if (auto t = parse_mv_type(text)) return *t;
  throw ArgumentError("not an MV type: " + std::string(text));
}

// ---- task functions

std::string caption_music(Provider& provider, const PromptLibrary& prompts, const std::filesystem::path& audio_path) {
  const PromptTemplate& tpl = prompts.get("music_caption");
  ProviderRequest req{Task::MusicCaption, tpl.render({}), {Attachment::audio_file(audio_path)}, tpl.hash()};
  return trim(provider.complete(req));
}

std::string understand_lyrics(Provider& provider, const PromptLibrary& prompts, const std::string& lyrics) {
  if (trim(lyrics).empty()) throw ArgumentError("lyrics are empty");
  const PromptTemplate& tpl = prompts.get("lyrics_understanding");
  ProviderRequest req{Task::LyricsUnderstanding, tpl.render({}), {Attachment::text(lyrics)}, tpl.hash()};
  return trim(provider.complete(req));
}

std::string caption_frame(Provider& provider, const PromptLibrary& prompts, const std::string& png, double t_s) {
  const PromptTemplate& tpl = prompts.get("frame_caption");
  ProviderRequest req{Task::FrameCaption, tpl.render({{"time", format_seconds(t_s)}}), {Attachment::png(png)},
                      tpl.hash()};
  return squash_whitespace(provider.complete(req));
}

MvType tag_mv_type(Provider& provider, const PromptLibrary& prompts, const std::vector<std::string>& png_frames) {
  if (png_frames.empty()) throw ArgumentError("MV type tagging needs at least one frame");
  std::string categories;
  for (MvType t : all_mv_types()) categories += "- " + std::string(mv_type_name(t)) + "\n";
  categories.pop_back();
  std::vector<Attachment> images;
  for (const std::string& f : png_frames) images.push_back(Attachment::png(f));

  std::string last;
  for (const char* name : {"mv_type_tag", "mv_type_tag_strict"}) {
    const PromptTemplate& tpl = prompts.get(name);
    ProviderRequest req{Task::MvTypeTag, tpl.render({{"categories", categories}}), images, tpl.hash()};
    last = provider.complete(req);
    if (auto t = parse_mv_type(last)) return *t;
  }
  throw TaggingError("unparseable MV type: '" + trim(last) + "'");
}

std::map<std::string, std::string> feature_prompt_fields(const LowLevelFeatures& features) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", features.tempo_bpm);
  std::string downbeats;
  for (double t : features.downbeats_s) {
    std::snprintf(buf + 32, 32, "%.2f", t);
    downbeats += (downbeats.empty() ? "" : ", ") + std::string(buf + 32);
  }
  std::string chords;
  for (const ChordSegment& c : features.chords) {
    char seg[96];
    std::snprintf(seg, sizeof seg, "%s %.2f-%.2fs", c.label.c_str(), c.start_s, c.end_s);
    chords += (chords.empty() ? "" : ", ") + std::string(seg);
  }
  return {{"tempo", buf},
          {"key", key_to_string(features.key)},
          {"downbeats", downbeats.empty() ? "none" : downbeats},
          {"chords", chords.empty() ? "none" : chords}};
}

std::string compose_unified_caption(Provider& provider, const PromptLibrary& prompts,
                                    const std::string& music_caption, const LowLevelFeatures& features,
                                    const std::string& lyrics_understanding) {
  if (trim(music_caption).empty()) throw ArgumentError("music caption is empty");
  const PromptTemplate& tpl = prompts.get("unified_caption");
  auto fields = feature_prompt_fields(features);
  fields["music_caption"] = squash_whitespace(music_caption);
  fields["lyrics"] = squash_whitespace(lyrics_understanding);
  ProviderRequest req{Task::UnifiedCaption, tpl.render(fields), {}, tpl.hash()};
  return trim(provider.complete(req));
}

MvDescription parse_description_response(const std::string& response, const std::vector<FrameCaption>& expected) {
  // Drop Markdown code fences some models wrap around the layout.
  std::string cleaned;
  std::istringstream in(response);
  for (std::string line; std::getline(in, line);)
    if (trim(line).rfind("```", 0) != 0) cleaned += line + "\n";

  MvDescription desc;
  try {
    desc = parse_target(cleaned);
  } catch (const ArgumentError& e) {
    throw ProtocolError(std::string("malformed description: ") + e.what(), response);
  }
  if (desc.breakdown.size() != expected.size())
    throw ProtocolError("description has " + std::to_string(desc.breakdown.size()) + " frame lines, expected " +
                            std::to_string(expected.size()),
                        response);
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (std::abs(desc.breakdown[i].t_s - expected[i].t_s) > 1e-6)
      throw ProtocolError("frame " + std::to_string(i) + " has t=" + format_seconds(desc.breakdown[i].t_s) +
                              ", expected " + format_seconds(expected[i].t_s),
                          response);
  desc.overview = squash_whitespace(desc.overview);
  return desc;
}

MvDescription compose_mv_description(Provider& provider, const PromptLibrary& prompts,
                                     const std::vector<FrameCaption>& frame_captions,
                                     const std::string& unified_caption, const std::string& lyrics_understanding,
                                     double interval_s) {
  if (frame_captions.empty()) throw ArgumentError("no frame captions");
  for (std::size_t i = 1; i < frame_captions.size(); ++i)
    if (!(frame_captions[i].t_s > frame_captions[i - 1].t_s))
      throw ArgumentError("frame caption timestamps not ascending");

  std::string frames, timestamps;
  for (const FrameCaption& f : frame_captions) {
    frames += (frames.empty() ? "" : "\n") + ("t=" + format_seconds(f.t_s) + ": " + squash_whitespace(f.caption));
    timestamps += (timestamps.empty() ? "" : ", ") + format_seconds(f.t_s);
  }
  const std::map<std::string, std::string> fields = {
      {"unified_caption", squash_whitespace(unified_caption)},
      {"lyrics", squash_whitespace(lyrics_understanding)},
      {"interval", format_seconds(interval_s)},
      {"frames", frames},
      {"frame_count", std::to_string(frame_captions.size())},
      {"timestamps", timestamps}};

  const PromptTemplate& first = prompts.get("mv_description");
  try {
    return parse_description_response(
        provider.complete({Task::MvDescriptionCompose, first.render(fields), {}, first.hash()}), frame_captions);
  } catch (const ProtocolError&) {
  }
  const PromptTemplate& strict = prompts.get("mv_description_strict");
  return parse_description_response(
      provider.complete({Task::MvDescriptionCompose, strict.render(fields), {}, strict.hash()}), frame_captions);
}

}  // namespace mvforge
