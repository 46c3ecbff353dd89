#pragma once

#include <string>
#include <string_view>

namespace mvforge {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

std::string base64_encode(std::string_view data);

// Incremental SHA-256 for composite keys. Each field is length-prefixed so
// ("ab","c") and ("a","bc") hash differently.
class Sha256Builder {
 public:
  Sha256Builder();
  ~Sha256Builder();
  Sha256Builder(const Sha256Builder&) = delete;
  Sha256Builder& operator=(const Sha256Builder&) = delete;

  Sha256Builder& field(std::string_view data);
  std::string hex();

 private:
  void* ctx_;
};

}  // namespace mvforge
