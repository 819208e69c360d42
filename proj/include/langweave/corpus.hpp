#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace langweave::corpus {

using json = nlohmann::ordered_json;

// Built-in language codes. Extra codes can be admitted via config.
const std::vector<std::string>& builtin_languages();

bool is_supported_language(std::string_view code,
                           const std::vector<std::string>& extra = {});

std::string normalize_language(std::string_view code);

struct ConversationTurn {
    std::string from;   // "human" or "gpt"
    std::string value;  // may contain one "<image>" placeholder
    json extra = json::object();  // unknown keys, preserved on round-trip
};

struct ImageTextRecord {
    std::string id;
    std::string image;
    std::vector<ConversationTurn> conversations;
    json extra = json::object();
};

struct ProvenanceEntry {
    std::string step;
    std::string config_digest;
    std::string timestamp;
    uint64_t input_count = 0;
    uint64_t output_count = 0;
};

struct DatasetManifest {
    std::string name;
    std::string language = "en";
    std::vector<ImageTextRecord> records;
    std::vector<ProvenanceEntry> provenance;
};

struct QualityFilterConfig {
    size_t min_chars = 3;          // codepoints, after trimming
    bool reject_control = true;    // C0 controls other than \n and \t
    bool require_valid_utf8 = true;
    bool include_human_turns = false;  // default: gpt turns only
};

struct TranslationUnit {
    std::string record_id;
    size_t turn_index = 0;
    std::string source_text;
    std::string source_language;
    std::string target_language;
    std::string content_hash;  // sha256 hex of source_text + target_language
};

std::string content_hash(std::string_view source_text, std::string_view target_language);

struct ExtractStats {
    uint64_t considered = 0;
    uint64_t accepted = 0;
    std::map<std::string, uint64_t> rejected;  // reason -> count
};

// Throws ValidationError on structural problems; messages name the record id
// and turn index. Malformed JSON reports the byte offset.
DatasetManifest load_manifest(const std::filesystem::path& path,
                              std::string_view language = "en");

void validate_record(const ImageTextRecord& rec);

// Writes the record array plus a provenance sidecar next to it.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& manifest_path);

std::vector<TranslationUnit> extract_targets(const DatasetManifest& manifest,
                                             std::string_view target,
                                             const QualityFilterConfig& filter = {},
                                             ExtractStats* stats = nullptr);

void append_provenance(DatasetManifest& manifest, std::string_view step,
                       std::string_view config_digest, uint64_t input_count,
                       uint64_t output_count);

// JSON conversions shared with the CLI and bindings.
json record_to_json(const ImageTextRecord& rec);
ImageTextRecord record_from_json(const json& j);
json provenance_to_json(const std::vector<ProvenanceEntry>& entries);
std::vector<ProvenanceEntry> provenance_from_json(const json& j);

}  // namespace langweave::corpus
