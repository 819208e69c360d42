#include "langweave/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "langweave/errors.hpp"
#include "langweave/util.hpp"

namespace langweave::corpus {

const std::vector<std::string>& builtin_languages() {
    static const std::vector<std::string> langs = {"en", "zh", "fr", "es",
                                                   "ru", "hi", "ja", "ar"};
    return langs;
}

bool is_supported_language(std::string_view code, const std::vector<std::string>& extra) {
    std::string c = normalize_language(code);
    for (const auto& l : builtin_languages())
        if (l == c) return true;
    for (const auto& l : extra)
        if (normalize_language(l) == c) return true;
    return false;
}

std::string normalize_language(std::string_view code) {
    return util::to_lower_ascii(util::trim(code));
}

std::string content_hash(std::string_view source_text, std::string_view target_language) {
    std::string buf;
    buf.reserve(source_text.size() + target_language.size());
    buf.append(source_text);
    buf.append(target_language);
    return util::sha256_hex(buf);
}

namespace {

size_t count_image_placeholders(std::string_view value) {
    size_t n = 0, pos = 0;
    while ((pos = value.find("<image>", pos)) != std::string_view::npos) {
        ++n;
        pos += 7;
    }
    return n;
}

bool valid_utf8(std::string_view s) {
    size_t i = 0;
    while (i < s.size()) {
        size_t before = i;
        char32_t cp = util::decode_utf8(s, i);
        if (cp == 0xFFFD) {
            // decode_utf8 only yields FFFD for actual U+FFFD bytes or errors;
            // distinguish by re-checking the raw bytes.
            if (s.substr(before, i - before) != "\xEF\xBF\xBD") return false;
        }
    }
    return true;
}

}  // namespace

void validate_record(const ImageTextRecord& rec) {
    if (rec.id.empty()) throw ValidationError("record with empty id");
    if (rec.conversations.empty() || rec.conversations.size() % 2 != 0) {
        throw ValidationError("record " + rec.id + ": conversations must have even length >= 2, got " +
                              std::to_string(rec.conversations.size()));
    }
    for (size_t i = 0; i < rec.conversations.size(); ++i) {
        const auto& t = rec.conversations[i];
        const char* expect = (i % 2 == 0) ? "human" : "gpt";
        if (t.from != expect) {
            throw ValidationError("record " + rec.id + ", turn " + std::to_string(i) +
                                  ": expected role '" + expect + "', got '" + t.from + "'");
        }
        if (util::trim(t.value).empty()) {
            throw ValidationError("record " + rec.id + ", turn " + std::to_string(i) +
                                  ": empty value");
        }
        if (count_image_placeholders(t.value) > 1) {
            throw ValidationError("record " + rec.id + ", turn " + std::to_string(i) +
                                  ": more than one <image> placeholder");
        }
    }
}

ImageTextRecord record_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("manifest entry is not an object");
    ImageTextRecord rec;
    for (const auto& [key, val] : j.items()) {
        if (key == "id") {
            if (!val.is_string()) throw ValidationError("record id must be a string");
            rec.id = val.get<std::string>();
        } else if (key == "image") {
            if (!val.is_string()) throw ValidationError("record image must be a string");
            rec.image = val.get<std::string>();
        } else if (key == "conversations") {
            if (!val.is_array())
                throw ValidationError("record conversations must be an array");
            for (const auto& tj : val) {
                ConversationTurn turn;
                for (const auto& [tk, tv] : tj.items()) {
                    if (tk == "from") turn.from = tv.get<std::string>();
                    else if (tk == "value") turn.value = tv.get<std::string>();
                    else turn.extra[tk] = tv;
                }
                rec.conversations.push_back(std::move(turn));
            }
        } else {
            rec.extra[key] = val;
        }
    }
    return rec;
}

json record_to_json(const ImageTextRecord& rec) {
    json j = json::object();
    j["id"] = rec.id;
    j["image"] = rec.image;
    json convs = json::array();
    for (const auto& t : rec.conversations) {
        json tj = json::object();
        tj["from"] = t.from;
        tj["value"] = t.value;
        for (const auto& [k, v] : t.extra.items()) tj[k] = v;
        convs.push_back(std::move(tj));
    }
    j["conversations"] = std::move(convs);
    for (const auto& [k, v] : rec.extra.items()) j[k] = v;
    return j;
}

json provenance_to_json(const std::vector<ProvenanceEntry>& entries) {
    json arr = json::array();
    for (const auto& e : entries) {
        json j = json::object();
        j["step"] = e.step;
        j["config_digest"] = e.config_digest;
        j["timestamp"] = e.timestamp;
        j["input_count"] = e.input_count;
        j["output_count"] = e.output_count;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<ProvenanceEntry> provenance_from_json(const json& j) {
    std::vector<ProvenanceEntry> out;
    if (!j.is_array()) throw ValidationError("provenance sidecar must be a JSON array");
    for (const auto& e : j) {
        ProvenanceEntry p;
        p.step = e.at("step").get<std::string>();
        p.config_digest = e.value("config_digest", "");
        p.timestamp = e.value("timestamp", "");
        p.input_count = e.value("input_count", 0ull);
        p.output_count = e.value("output_count", 0ull);
        out.push_back(std::move(p));
    }
    return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& manifest_path) {
    std::filesystem::path p = manifest_path;
    p.replace_extension();
    p += ".provenance.json";
    return p;
}

DatasetManifest load_manifest(const std::filesystem::path& path, std::string_view language) {
    std::string data = util::read_file(path);
    json root;
    try {
        root = json::parse(data);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path.string() + " at byte " +
                              std::to_string(e.byte) + ": " + e.what());
    }
    if (!root.is_array())
        throw ValidationError(path.string() + ": manifest must be a JSON array");

    DatasetManifest m;
    m.name = path.stem().string();
    m.language = normalize_language(language);
    m.records.reserve(root.size());
    std::set<std::string> seen;
    for (const auto& rj : root) {
        ImageTextRecord rec = record_from_json(rj);
        validate_record(rec);
        if (!seen.insert(rec.id).second)
            throw ValidationError("duplicate record id \"" + rec.id + "\"");
        m.records.push_back(std::move(rec));
    }

    auto side = sidecar_path(path);
    if (std::filesystem::exists(side)) {
        m.provenance = provenance_from_json(json::parse(util::read_file(side)));
    } else {
        ProvenanceEntry e;
        e.step = "ingest";
        e.config_digest = util::sha256_hex("ingest");
        e.timestamp = util::iso8601_now();
        e.input_count = m.records.size();
        e.output_count = m.records.size();
        m.provenance.push_back(std::move(e));
    }
    return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    json arr = json::array();
    for (const auto& rec : manifest.records) arr.push_back(record_to_json(rec));
    util::write_file_atomic(path, arr.dump(2) + "\n");
    util::write_file_atomic(sidecar_path(path),
                            provenance_to_json(manifest.provenance).dump(2) + "\n");
}

void append_provenance(DatasetManifest& manifest, std::string_view step,
                       std::string_view config_digest, uint64_t input_count,
                       uint64_t output_count) {
    ProvenanceEntry e;
    e.step = std::string(step);
    e.config_digest = std::string(config_digest);
    e.timestamp = util::iso8601_now();
    e.input_count = input_count;
    e.output_count = output_count;
    manifest.provenance.push_back(std::move(e));
}

namespace {

std::optional<std::string> rejection_reason(std::string_view value,
                                            const QualityFilterConfig& f) {
    std::string trimmed = util::trim(value);
    if (trimmed.empty()) return "empty_after_trim";
    if (f.require_valid_utf8 && !valid_utf8(value)) return "invalid_utf8";
    if (util::codepoint_count(trimmed) < f.min_chars) return "below_min_chars";
    if (f.reject_control) {
        for (unsigned char c : value) {
            if (c < 0x20 && c != '\n' && c != '\t') return "control_characters";
        }
    }
    return std::nullopt;
}

}  // namespace

std::vector<TranslationUnit> extract_targets(const DatasetManifest& manifest,
                                             std::string_view target,
                                             const QualityFilterConfig& filter,
                                             ExtractStats* stats) {
    std::string tgt = normalize_language(target);
    if (tgt == normalize_language(manifest.language))
        throw ConfigError("target language equals manifest language: " + tgt);

    std::vector<TranslationUnit> units;
    ExtractStats local;
    for (const auto& rec : manifest.records) {
        for (size_t i = 0; i < rec.conversations.size(); ++i) {
            const auto& turn = rec.conversations[i];
            bool eligible = turn.from == "gpt" ||
                            (filter.include_human_turns && turn.from == "human");
            if (!eligible) continue;
            ++local.considered;
            if (auto reason = rejection_reason(turn.value, filter)) {
                ++local.rejected[*reason];
                continue;
            }
            TranslationUnit u;
            u.record_id = rec.id;
            u.turn_index = i;
            u.source_text = turn.value;
            u.source_language = manifest.language;
            u.target_language = tgt;
            u.content_hash = content_hash(u.source_text, u.target_language);
            units.push_back(std::move(u));
            ++local.accepted;
        }
    }
    if (stats) *stats = std::move(local);
    return units;
}

}  // namespace langweave::corpus
