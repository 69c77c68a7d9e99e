#include "textcue/prompts.hpp"

#include <algorithm>
#include <cctype>

#include "prompt_assets.hpp"

namespace textcue::prompts {

std::optional<std::string_view> get(std::string_view key) {
  for (const auto& a : detail::kPromptAssets) {
    if (a.key == key) return a.text;
  }
  return std::nullopt;
}

std::vector<std::string_view> keys() {
  std::vector<std::string_view> out;
  for (const auto& a : detail::kPromptAssets) out.push_back(a.key);
  std::sort(out.begin(), out.end());
  return out;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const std::string name(tmpl.substr(i + 1, close - i - 1));
        if (auto it = values.find(name); it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

std::string key_for(std::string_view subset, std::string_view mode, std::string_view modality) {
  auto lower = [](std::string_view s) {
    std::string r(s);
    for (char& c : r) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return r;
  };
  return lower(subset) + "." + lower(modality) + "." + lower(mode);
}

std::string format_options(const std::vector<std::string>& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i) out.push_back('\n');
    out.push_back(static_cast<char>('A' + i));
    out += ". ";
    out += options[i];
  }
  return out;
}

}  // namespace textcue::prompts
