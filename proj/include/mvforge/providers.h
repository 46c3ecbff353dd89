#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvforge/audio_features.h"
#include "mvforge/description.h"
#include "mvforge/prompts.h"

namespace mvforge {

enum class Task {
  MusicCaption,
  LyricsUnderstanding,
  FrameCaption,
  MvTypeTag,
  UnifiedCaption,
  MvDescriptionCompose,
};

std::string_view task_name(Task task);

enum class AttachmentKind { Audio, Image, Text };

std::string_view attachment_kind_name(AttachmentKind kind);

struct Attachment {
  AttachmentKind kind = AttachmentKind::Text;
  std::string mime;
  std::string data;

  static Attachment audio_file(const std::filesystem::path& path);
  static Attachment png(std::string bytes);
  static Attachment text(std::string content);

  std::string digest() const;
};

struct ProviderRequest {
  Task task = Task::MusicCaption;
  std::string prompt;
  std::vector<Attachment> attachments;
  std::string template_hash;

  // Nonempty prompt and the per-task attachment arity. Throws ArgumentError.
  void validate() const;
};

// Content hash over (task, prompt, template hash, attachment digests,
// backend id).
std::string cache_key(const ProviderRequest& request, std::string_view backend_id);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  virtual std::string complete(const ProviderRequest& request) = 0;
};

// Deterministic offline backend. Output is a pure function of the request
// and seed; it plays the part of a compliant model by reading the structured
// lines of its prompt. Scripted responses, when queued for a task, are
// returned first in order.
class MockBackend : public Backend {
 public:
  explicit MockBackend(std::uint64_t seed = 0) : seed_(seed) {}

  std::string id() const override;
  std::string complete(const ProviderRequest& request) override;

  void script(Task task, std::vector<std::string> responses);
  std::size_t calls() const { return calls_; }

 private:
  std::uint64_t seed_;
  std::mutex mu_;
  std::map<Task, std::vector<std::string>> scripted_;
  std::atomic<std::size_t> calls_{0};
};

struct HttpBackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  std::string api_key;
  double timeout_s = 60.0;
};

// Chat-completion style JSON over HTTP. Images are sent inline as base64
// data URLs, audio as base64 `input_audio`, text attachments as text parts.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string id() const override;
  std::string complete(const ProviderRequest& request) override;

  std::size_t network_calls() const { return network_calls_; }

  // The JSON body that would be POSTed for `request`.
  std::string build_payload(const ProviderRequest& request) const;

 private:
  HttpBackendConfig config_;
  std::atomic<std::size_t> network_calls_{0};
};

// Content-addressed response store: <dir>/<first 2 hex>/<key>.txt, written
// through a temp file and rename so readers never see partial entries.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& response) const;
  std::filesystem::path path_for(const std::string& key) const;

 private:
  std::filesystem::path dir_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
  double jitter = 0.25;  // +- fraction of each delay
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleep_for
};

// Delay before retry number `attempt` (1-based), jitter drawn from `u` in
// [0, 1).
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt, double u);

// Token bucket; capacity equals one minute's allowance.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double requests_per_minute);

  // Blocks until a token is available. No-op when the rate is <= 0.
  void acquire();
  // Non-blocking variant; true if a token was taken at `now`.
  bool try_acquire(Clock::time_point now);

 private:
  double rate_per_s_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mu_;
};

struct ProviderOptions {
  std::optional<std::filesystem::path> cache_dir;
  RetryPolicy retry;
  double requests_per_minute = 0.0;  // 0 = unlimited
  std::size_t max_in_flight = 4;
};

struct ProviderStats {
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  std::size_t backend_calls = 0;
  std::size_t retries = 0;
};

// The `complete` contract callers see: cache, rate limit, in-flight cap and
// retry wrapped around any Backend. Thread-safe.
class Provider {
 public:
  Provider(std::shared_ptr<Backend> backend, ProviderOptions options = {});

  std::string complete(const ProviderRequest& request);

  ProviderStats stats() const;
  const Backend& backend() const { return *backend_; }

 private:
  std::string call_backend(const ProviderRequest& request);

  std::shared_ptr<Backend> backend_;
  ProviderOptions options_;
  std::optional<ResponseCache> cache_;
  RateLimiter limiter_;

  std::mutex flight_mu_;
  std::condition_variable flight_cv_;
  std::size_t in_flight_ = 0;

  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> retries_{0};
};

enum class MvType {
  LivePerformance,
  LyricVideo,
  Animation,
  StoryNarrative,
  ArtisticAbstract,
  DancePerformance,
  BehindTheScenes,
  NatureScenic,
  PictureMontage,
  CinematicDrama,
};

const std::array<MvType, 10>& all_mv_types();
std::string_view mv_type_name(MvType type);
// Case-insensitive, tolerant of surrounding whitespace, quotes and a trailing
// period. nullopt for anything outside the ten categories.
std::optional<MvType> parse_mv_type(std::string_view text);
// Throwing variant.
MvType mv_type_from_string(std::string_view text);

inline constexpr int kMvTypeFrameCount = 8;

std::string caption_music(Provider& provider, const PromptLibrary& prompts,
                          const std::filesystem::path& audio_path);

std::string understand_lyrics(Provider& provider, const PromptLibrary& prompts,
                              const std::string& lyrics);

std::string caption_frame(Provider& provider, const PromptLibrary& prompts,
                          const std::string& png, double t_s);

// One constrained re-prompt on an unparseable answer; a second failure
// throws TaggingError.
MvType tag_mv_type(Provider& provider, const PromptLibrary& prompts,
                   const std::vector<std::string>& png_frames);

// Renders the feature block used in the unified-caption prompt.
std::map<std::string, std::string> feature_prompt_fields(const LowLevelFeatures& features);

std::string compose_unified_caption(Provider& provider, const PromptLibrary& prompts,
                                    const std::string& music_caption,
                                    const LowLevelFeatures& features,
                                    const std::string& lyrics_understanding);

// The response must carry an overview and exactly the input timestamps; on
// mismatch one stricter re-prompt is made, then ProtocolError.
MvDescription compose_mv_description(Provider& provider, const PromptLibrary& prompts,
                                     const std::vector<FrameCaption>& frame_captions,
                                     const std::string& unified_caption,
                                     const std::string& lyrics_understanding,
                                     double interval_s = kFrameIntervalSeconds);

// Parses a compose response against the expected timestamps. Throws
// ProtocolError.
MvDescription parse_description_response(const std::string& response,
                                         const std::vector<FrameCaption>& expected);

}  // namespace mvforge
