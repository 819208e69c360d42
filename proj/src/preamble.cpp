#include "langweave/preamble.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "langweave/errors.hpp"
#include "langweave/util.hpp"

namespace langweave::preamble {

using json = nlohmann::ordered_json;

std::string language_display_name(std::string_view code,
                                  const std::map<std::string, std::string>& extra) {
    static const std::map<std::string, std::string> names = {
        {"en", "English"}, {"zh", "Chinese"}, {"fr", "French"},
        {"es", "Spanish"}, {"ru", "Russian"}, {"hi", "Hindi"},
        {"ja", "Japanese"}, {"ar", "Arabic"},
    };
    std::string c = util::to_lower_ascii(util::trim(code));
    if (auto it = names.find(c); it != names.end()) return it->second;
    if (auto it = extra.find(c); it != extra.end()) return it->second;
    throw ConfigError("no display name for language code '" + c + "'");
}

void validate_preamble(const PreambleTemplate& pre) {
    if (pre.id.empty()) throw ValidationError("preamble with empty id");
    if (util::trim(pre.instruction).empty())
        throw ValidationError("preamble " + pre.id + ": empty instruction");
}

namespace {

std::string interpolate_language(std::string_view instruction, const std::string& name) {
    std::string out;
    out.reserve(instruction.size() + name.size());
    size_t pos = 0;
    while (pos < instruction.size()) {
        size_t found = instruction.find("{language}", pos);
        if (found == std::string_view::npos) {
            out.append(instruction.substr(pos));
            break;
        }
        out.append(instruction.substr(pos, found - pos));
        out.append(name);
        pos = found + 10;
    }
    return out;
}

}  // namespace

std::string render_prompt(const PreambleTemplate& pre, std::string_view target_language,
                          std::string_view input_text,
                          const std::map<std::string, std::string>& extra_names) {
    validate_preamble(pre);
    const std::string lang_name = language_display_name(target_language, extra_names);

    std::string out;
    out += "## Instructions\n";
    out += interpolate_language(pre.instruction, lang_name);
    out += "\n\nEnsure that:\n";
    for (const auto& c : pre.considerations) {
        out += "- ";
        out += c;
        out += "\n";
    }
    out += "\nNote:";
    for (const auto& c : pre.constraints) {
        out += " ";
        out += c;
    }
    out += "\n\n## Examples\n";
    for (size_t i = 0; i < pre.examples.size(); ++i) {
        out += "### Example " + std::to_string(i + 1) + "\n";
        out += "Input:\n";
        out += pre.examples[i].first;
        out += "\nExpected Output:\n";
        out += pre.examples[i].second;
        out += "\n";
    }
    out += "\nInput:\n";
    out += input_text;
    out += "\nExpected Output:\n";
    return out;
}

PreambleTemplate load_preamble(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(util::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
    }
    PreambleTemplate pre;
    pre.id = j.value("id", path.stem().string());
    if (!j.contains("instruction") || !j["instruction"].is_string())
        throw ValidationError(path.string() + ": preamble requires a string 'instruction'");
    pre.instruction = j["instruction"].get<std::string>();
    for (const auto& c : j.value("considerations", json::array()))
        pre.considerations.push_back(c.get<std::string>());
    for (const auto& c : j.value("constraints", json::array()))
        pre.constraints.push_back(c.get<std::string>());
    for (const auto& e : j.value("examples", json::array())) {
        pre.examples.emplace_back(e.at("input").get<std::string>(),
                                  e.at("expected_output").get<std::string>());
    }
    validate_preamble(pre);
    return pre;
}

std::vector<PreambleTemplate> load_preamble_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("preamble directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<PreambleTemplate> out;
    std::set<std::string> ids;
    for (const auto& f : files) {
        PreambleTemplate p = load_preamble(f);
        if (!ids.insert(p.id).second)
            throw ValidationError("duplicate preamble id '" + p.id + "' in " + dir.string());
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(),
              [](const PreambleTemplate& a, const PreambleTemplate& b) { return a.id < b.id; });
    if (out.empty()) throw ConfigError("no preamble files in " + dir.string());
    return out;
}

}  // namespace langweave::preamble
