#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace textcue::prompts {

/// Template text for a key such as "gen.image.cot", or nullopt. Templates are
/// the files under assets/prompts, compiled into the library.
std::optional<std::string_view> get(std::string_view key);

std::vector<std::string_view> keys();

/// Replaces every {name} placeholder that appears in `values`; unknown
/// placeholders are left untouched.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// "gen" | "real", "cot" | "direct", "image" | "text" | "ocr_text".
std::string key_for(std::string_view subset, std::string_view mode, std::string_view modality);

/// "A. first\nB. second\n..." layout used for the {options} placeholder.
std::string format_options(const std::vector<std::string>& options);

}  // namespace textcue::prompts
