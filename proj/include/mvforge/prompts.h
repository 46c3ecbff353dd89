#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mvforge {

// Plain-text template with `{field}` placeholders. A section
// `{?field} ... {/field}` is kept only when `field` is nonempty.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  PromptTemplate(std::string name, std::string text);

  const std::string& name() const { return name_; }
  const std::string& text() const { return text_; }
  const std::string& hash() const { return hash_; }

  // Throws ArgumentError on a missing field or unbalanced section.
  std::string render(const std::map<std::string, std::string>& fields) const;

 private:
  std::string name_;
  std::string text_;
  std::string hash_;
};

class PromptLibrary {
 public:
  // Templates compiled in from the repository's prompts/ directory.
  static PromptLibrary builtin();
  // Every *.txt in `dir`; templates absent from `dir` fall back to builtin.
  static PromptLibrary load(const std::filesystem::path& dir);

  const PromptTemplate& get(const std::string& name) const;
  std::map<std::string, std::string> hashes() const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

}  // namespace mvforge
