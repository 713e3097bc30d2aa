#pragma once

#include <map>
#include <string>
#include <string_view>

namespace streamcheck {

inline constexpr const char* kNormalizeTemplate = "normalize_v1";
inline constexpr const char* kDecomposeTemplate = "decompose_v1";
inline constexpr const char* kTopicTemplate = "topic_v1";
inline constexpr const char* kJustifyTemplate = "justify_v1";

// Replaces {name} placeholders whose name is a known variable. Unknown
// placeholders are left untouched; substituted values are not rescanned.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& variables);

// The compiled-in copies of prompts/*.txt.
const std::map<std::string, std::string>& default_prompt_templates();

class PromptStore {
 public:
  static PromptStore defaults();
  // Defaults, overridden by any <template_id>.txt present in `dir`.
  static PromptStore load_dir(const std::string& dir);

  // Throws InvalidConfig for an unknown id.
  const std::string& get(const std::string& template_id) const;
  std::string render(const std::string& template_id, const std::map<std::string, std::string>& variables) const;
  void set(const std::string& template_id, std::string text) { templates_[template_id] = std::move(text); }

 private:
  std::map<std::string, std::string> templates_;
};

}  // namespace streamcheck
