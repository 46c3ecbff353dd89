#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <regex>

#include "mvforge/error.h"
#include "mvforge/metrics.h"

namespace mvforge {

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {}

std::string HttpEmbedder::id() const { return "http-embed:" + config_.base_url + "|" + config_.model; }

std::size_t HttpEmbedder::dimension() const {
  std::lock_guard lock(mu_);
  return dim_;
}

std::vector<Embedding> HttpEmbedder::embed(const TokenSeq& tokens) const {
  using json = nlohmann::json;
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mu_);
    for (const std::string& t : tokens)
      if (!memo_.count(t) && std::find(missing.begin(), missing.end(), t) == missing.end()) missing.push_back(t);
  }
  if (!missing.empty()) {
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.base_url, m, url_re)) throw ArgumentError("invalid base URL: " + config_.base_url);
    std::string path = m[2].str();
    while (!path.empty() && path.back() == '/') path.pop_back();

    httplib::Client client(m[1].str());
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(config_.timeout_s));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    const json body = {{"model", config_.model}, {"input", missing}};
    const auto res = client.Post(path + "/embeddings", headers, body.dump(), "application/json");
    if (!res) throw TransportError("embedding request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw TransportError("embedding endpoint returned HTTP " + std::to_string(res->status));
    const json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("data") || !parsed["data"].is_array() ||
        parsed["data"].size() != missing.size())
      throw ProtocolError("malformed embedding response", res->body);

    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      const auto raw = parsed["data"][i].at("embedding").get<std::vector<double>>();
      if (raw.empty() || (dim_ != 0 && raw.size() != dim_)) throw ProtocolError("embedding dimension changed", res->body);
      dim_ = raw.size();
      double norm = 0.0;
      for (double x : raw) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) throw ProtocolError("zero embedding for token " + missing[i], res->body);
      Embedding e(raw.size());
      for (std::size_t k = 0; k < raw.size(); ++k) e[k] = static_cast<float>(raw[k] / norm);
      memo_.emplace(missing[i], std::move(e));
    }
  }
  std::lock_guard lock(mu_);
  std::vector<Embedding> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) out.push_back(memo_.at(t));
  return out;
}

}  // namespace mvforge
