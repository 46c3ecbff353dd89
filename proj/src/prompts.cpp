#include "mvforge/prompts.h"

#include <fstream>
#include <sstream>
#include <utility>

#include "mvforge/digest.h"
#include "mvforge/error.h"

namespace mvforge {
namespace {

struct BuiltinPrompt {
  const char* name;
  const char* text;
};

const BuiltinPrompt kBuiltinPrompts[] = {
#include "mvforge/builtin_prompts.inc"
};

bool is_field_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

// Length of a `{name}`, `{?name}` or `{/name}` tag at `pos`, or 0.
std::size_t tag_length(const std::string& s, std::size_t pos) {
  std::size_t i = pos + 1;
  if (i < s.size() && (s[i] == '?' || s[i] == '/')) ++i;
  const std::size_t start = i;
  while (i < s.size() && is_field_char(s[i])) ++i;
  if (i == start || i >= s.size() || s[i] != '}') return 0;
  return i + 1 - pos;
}

std::string render_range(const std::string& text, std::size_t& pos, const std::string& closing,
                         const std::map<std::string, std::string>& fields, const std::string& name) {
  std::string out;
  while (pos < text.size()) {
    const char c = text[pos];
    const std::size_t len = c == '{' ? tag_length(text, pos) : 0;
    if (len == 0) {
      out.push_back(c);
      ++pos;
      continue;
    }
    const char kind = text[pos + 1];
    if (kind == '/') {
      const std::string field = text.substr(pos + 2, len - 3);
      if (field != closing) throw ArgumentError("prompt " + name + ": unexpected {/" + field + "}");
      pos += len;
      return out;
    }
    if (kind == '?') {
      const std::string field = text.substr(pos + 2, len - 3);
      pos += len;
      const std::string inner = render_range(text, pos, field, fields, name);
      const auto it = fields.find(field);
      if (it != fields.end() && !it->second.empty()) out += inner;
      continue;
    }
    const std::string field = text.substr(pos + 1, len - 2);
    const auto it = fields.find(field);
    if (it == fields.end()) throw ArgumentError("prompt " + name + ": missing field {" + field + "}");
    out += it->second;
    pos += len;
  }
  if (!closing.empty()) throw ArgumentError("prompt " + name + ": unclosed {?" + closing + "}");
  return out;
}

// Conditional sections render their fields only when present, so a missing
// optional field must not fail inside a dropped section. Filling absent
// conditional fields with "" gives exactly that.
std::map<std::string, std::string> with_optional_defaults(const std::string& text,
                                                          std::map<std::string, std::string> fields) {
  for (std::size_t pos = text.find("{?"); pos != std::string::npos; pos = text.find("{?", pos + 1)) {
    const std::size_t len = tag_length(text, pos);
    if (len == 0) continue;
    fields.try_emplace(text.substr(pos + 2, len - 3), "");
  }
  return fields;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read prompt " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, std::string text)
    : name_(std::move(name)), text_(std::move(text)), hash_(sha256_hex(text_)) {}

std::string PromptTemplate::render(const std::map<std::string, std::string>& fields) const {
  const auto all = with_optional_defaults(text_, fields);
  std::size_t pos = 0;
  std::string out = render_range(text_, pos, "", all, name_);
  while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
  return out;
}

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary lib;
  for (const BuiltinPrompt& p : kBuiltinPrompts) lib.templates_.emplace(p.name, PromptTemplate(p.name, p.text));
  return lib;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  PromptLibrary lib = builtin();
  if (!std::filesystem::is_directory(dir)) throw ArgumentError("prompts dir not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    const std::string name = entry.path().stem().string();
    lib.templates_.insert_or_assign(name, PromptTemplate(name, read_text(entry.path())));
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(const std::string& name) const {
  const auto it = templates_.find(name);
  if (it == templates_.end()) throw ArgumentError("unknown prompt template: " + name);
  return it->second;
}

std::map<std::string, std::string> PromptLibrary::hashes() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, t] : templates_) out.emplace(name, t.hash());
  return out;
}

std::vector<std::string> PromptLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : templates_) out.push_back(name);
  return out;
}

}  // namespace mvforge
