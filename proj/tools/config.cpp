#include "mvforge/config.h"

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "mvforge/digest.h"
#include "mvforge/error.h"

namespace mvforge {
namespace {

using Handler = std::function<void(const YAML::Node&)>;

void walk(const YAML::Node& node, const std::string& where, const std::map<std::string, Handler>& handlers) {
  if (!node.IsMap()) throw ArgumentError("config: " + (where.empty() ? "document" : where) + " must be a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    const std::string full = where.empty() ? key : where + "." + key;
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw ArgumentError("config: unknown key '" + full + "'");
    try {
      it->second(kv.second);
    } catch (const YAML::Exception& e) {
      throw ArgumentError("config: bad value for '" + full + "': " + e.msg);
    }
  }
}

template <typename T>
Handler set(T& field) {
  return [&field](const YAML::Node& n) { field = n.as<T>(); };
}

Handler set_path(std::filesystem::path& field, const std::filesystem::path& base) {
  return [&field, base](const YAML::Node& n) {
    std::filesystem::path p = n.as<std::string>();
    field = (p.is_relative() && !base.empty()) ? base / p : p;
  };
}

}  // namespace

Config parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ArgumentError("config: " + e.msg);
  }
  Config c;
  if (root.IsNull()) return c;
  walk(root, "",
       {{"paths",
         [&](const YAML::Node& n) {
           walk(n, "paths",
                {{"manifest", set_path(c.paths.manifest, base_dir)},
                 {"cache_dir", set_path(c.paths.cache_dir, base_dir)},
                 {"prompts_dir", set_path(c.paths.prompts_dir, base_dir)},
                 {"output_dir", set_path(c.paths.output_dir, base_dir)}});
         }},
        {"provider",
         [&](const YAML::Node& n) {
           walk(n, "provider",
                {{"backend", set(c.provider.backend)},
                 {"base_url", set(c.provider.base_url)},
                 {"model", set(c.provider.model)},
                 {"api_key", set(c.provider.api_key)},
                 {"requests_per_minute", set(c.provider.requests_per_minute)},
                 {"max_in_flight", set(c.provider.max_in_flight)},
                 {"timeout_s", set(c.provider.timeout_s)},
                 {"max_attempts", set(c.provider.max_attempts)},
                 {"seed", set(c.provider.seed)}});
         }},
        {"audio",
         [&](const YAML::Node& n) {
           walk(n, "audio",
                {{"meter", set(c.audio.meter)},
                 {"meter_overrides", set(c.audio.meter_overrides)},
                 {"static_threshold", set(c.audio.static_threshold)},
                 {"sample_count", set(c.audio.sample_count)},
                 {"frame_interval_s", set(c.audio.frame_interval_s)}});
         }},
        {"split",
         [&](const YAML::Node& n) {
           walk(n, "split", {{"train_count", set(c.split.train_count)}, {"seed", set(c.split.seed)}});
         }},
        {"eval", [&](const YAML::Node& n) {
           walk(n, "eval",
                {{"embedder", set(c.eval.embedder)},
                 {"embedding_dim", set(c.eval.embedding_dim)},
                 {"embedding_model", set(c.eval.embedding_model)},
                 {"highlight_top", set(c.eval.highlight_top)}});
         }}});
  validate_config(c);
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void validate_config(const Config& c) {
  auto fail = [](const std::string& key, const std::string& why) { throw ArgumentError("config: " + key + " " + why); };
  if (c.provider.backend != "mock" && c.provider.backend != "http") fail("provider.backend", "must be mock or http");
  if (c.provider.requests_per_minute < 0) fail("provider.requests_per_minute", "must be >= 0");
  if (c.provider.max_in_flight < 1 || c.provider.max_in_flight > 256) fail("provider.max_in_flight", "must be in 1..256");
  if (!(c.provider.timeout_s > 0)) fail("provider.timeout_s", "must be > 0");
  if (c.provider.max_attempts < 1 || c.provider.max_attempts > 10) fail("provider.max_attempts", "must be in 1..10");
  if (c.audio.meter != 3 && c.audio.meter != 4) fail("audio.meter", "must be 3 or 4");
  for (const auto& [id, m] : c.audio.meter_overrides)
    if (m != 3 && m != 4) fail("audio.meter_overrides." + id, "must be 3 or 4");
  if (!(c.audio.static_threshold > 0)) fail("audio.static_threshold", "must be > 0");
  if (c.audio.sample_count < 2) fail("audio.sample_count", "must be >= 2");
  if (!(c.audio.frame_interval_s > 0)) fail("audio.frame_interval_s", "must be > 0");
  if (c.split.train_count < 1) fail("split.train_count", "must be >= 1");
  if (c.eval.embedder != "hashed" && c.eval.embedder != "onehot" && c.eval.embedder != "http")
    fail("eval.embedder", "must be hashed, onehot or http");
  if (c.eval.embedding_dim < 1 || c.eval.embedding_dim > 4096) fail("eval.embedding_dim", "must be in 1..4096");
  if (c.eval.highlight_top < 0) fail("eval.highlight_top", "must be >= 0");
}

std::string config_to_json(const Config& c) {
  nlohmann::ordered_json j;
  j["paths"] = {{"manifest", c.paths.manifest.generic_string()},
                {"cache_dir", c.paths.cache_dir.generic_string()},
                {"prompts_dir", c.paths.prompts_dir.generic_string()},
                {"output_dir", c.paths.output_dir.generic_string()}};
  j["provider"] = {{"backend", c.provider.backend},
                   {"base_url", c.provider.base_url},
                   {"model", c.provider.model},
                   {"requests_per_minute", c.provider.requests_per_minute},
                   {"max_in_flight", c.provider.max_in_flight},
                   {"timeout_s", c.provider.timeout_s},
                   {"max_attempts", c.provider.max_attempts},
                   {"seed", c.provider.seed}};
  j["audio"] = {{"meter", c.audio.meter},
                {"meter_overrides", c.audio.meter_overrides},
                {"static_threshold", c.audio.static_threshold},
                {"sample_count", c.audio.sample_count},
                {"frame_interval_s", c.audio.frame_interval_s}};
  j["split"] = {{"train_count", c.split.train_count}, {"seed", c.split.seed}};
  j["eval"] = {{"embedder", c.eval.embedder},
               {"embedding_dim", c.eval.embedding_dim},
               {"embedding_model", c.eval.embedding_model},
               {"highlight_top", c.eval.highlight_top}};
  return j.dump();
}

std::string config_hash(const Config& config) { return sha256_hex(config_to_json(config)); }

std::string resolve_api_key(const Config& config) {
  if (const char* env = std::getenv("MVFORGE_API_KEY"); env && *env) return env;
  return config.provider.api_key;
}

}  // namespace mvforge
