#include "streamcheck/prompts.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "streamcheck/error.hpp"

namespace streamcheck {

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& variables) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const std::string name(tmpl.substr(i + 1, close - i - 1));
        auto it = variables.find(name);
        if (it != variables.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

PromptStore PromptStore::defaults() {
  PromptStore store;
  store.templates_ = default_prompt_templates();
  return store;
}

PromptStore PromptStore::load_dir(const std::string& dir) {
  PromptStore store = defaults();
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InvalidConfig("prompt directory not found: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    store.templates_[entry.path().stem().string()] =
        std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  return store;
}

const std::string& PromptStore::get(const std::string& template_id) const {
  auto it = templates_.find(template_id);
  if (it == templates_.end()) throw InvalidConfig("unknown prompt template: " + template_id);
  return it->second;
}

std::string PromptStore::render(const std::string& template_id,
                                const std::map<std::string, std::string>& variables) const {
  return render_template(get(template_id), variables);
}

}  // namespace streamcheck
