#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace langweave::preamble {

struct PreambleTemplate {
    std::string id;
    std::string instruction;  // may contain a {language} placeholder
    std::vector<std::string> considerations;
    std::vector<std::string> constraints;
    std::vector<std::pair<std::string, std::string>> examples;  // input, expected output
};

// "ja" -> "Japanese" etc. Unknown codes throw ConfigError unless registered
// in `extra`.
std::string language_display_name(std::string_view code,
                                  const std::map<std::string, std::string>& extra = {});

// Deterministic prompt skeleton:
//   ## Instructions
//   <instruction, {language} interpolated>
//
//   Ensure that:
//   - <consideration>...
//
//   Note: <constraints joined>
//
//   ## Examples
//   ### Example k
//   Input:
//   <in>
//   Expected Output:
//   <out>
//
//   Input:
//   <input_text>
//   Expected Output:
std::string render_prompt(const PreambleTemplate& pre, std::string_view target_language,
                          std::string_view input_text,
                          const std::map<std::string, std::string>& extra_names = {});

PreambleTemplate load_preamble(const std::filesystem::path& path);

// Loads every *.json in the directory, sorted by id. Duplicate ids are errors.
std::vector<PreambleTemplate> load_preamble_dir(const std::filesystem::path& dir);

void validate_preamble(const PreambleTemplate& pre);

}  // namespace langweave::preamble
