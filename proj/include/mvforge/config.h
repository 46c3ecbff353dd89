#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace mvforge {

struct Config {
  struct Paths {
    std::filesystem::path manifest;
    std::filesystem::path cache_dir;    // empty: <output_dir>/cache
    std::filesystem::path prompts_dir;  // empty: built-in templates
    std::filesystem::path output_dir = "mvforge-out";
  } paths;

  struct Provider {
    std::string backend = "mock";  // mock | http
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o-mini";
    std::string api_key;  // MVFORGE_API_KEY wins when set
    double requests_per_minute = 0.0;
    std::size_t max_in_flight = 4;
    double timeout_s = 60.0;
    int max_attempts = 3;
    std::uint64_t seed = 0;  // mock only
  } provider;

  struct Audio {
    int meter = 4;
    std::map<std::string, int> meter_overrides;
    double static_threshold = 2.0;
    int sample_count = 16;
    double frame_interval_s = 2.0;
  } audio;

  struct Split {
    std::size_t train_count = 55000;
    std::uint64_t seed = 0;
  } split;

  struct Eval {
    std::string embedder = "hashed";  // hashed | onehot | http
    std::size_t embedding_dim = 64;
    std::string embedding_model = "text-embedding-3-small";
    int highlight_top = 3;
  } eval;
};

// Parses a YAML document. Unknown keys and out-of-range values throw
// ArgumentError naming the key. Relative paths resolve against the file's
// directory.
Config load_config(const std::filesystem::path& path);
Config parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir = {});

// Throws ArgumentError on the first out-of-range field.
void validate_config(const Config& config);

// Canonical JSON of everything except the API key.
std::string config_to_json(const Config& config);
std::string config_hash(const Config& config);

// The API key from MVFORGE_API_KEY, falling back to the configured one.
std::string resolve_api_key(const Config& config);

}  // namespace mvforge
