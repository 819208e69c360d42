#include "langweave/config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "langweave/errors.hpp"
#include "langweave/util.hpp"

namespace langweave::config {

using json = nlohmann::ordered_json;

PipelineConfig default_config() {
    PipelineConfig cfg;
    cfg.languages = {"zh", "fr", "es", "ru", "hi", "ja", "ar"};
    return cfg;
}

namespace {

json effective_json(const PipelineConfig& cfg) {
    json j = json::object();
    j["languages"] = cfg.languages;
    j["source_language"] = cfg.source_language;
    j["extra_languages"] = cfg.extra_languages;
    json names = json::object();
    for (const auto& [k, v] : cfg.language_names) names[k] = v;
    j["language_names"] = std::move(names);
    json backends_j = json::object();
    for (const auto& [name, b] : cfg.backend_registry) {
        backends_j[name] = {{"base_url", b.base_url},
                            {"auth_env", b.auth_env},
                            {"timeout_ms", b.timeout.count()}};
    }
    j["backends"] = std::move(backends_j);
    j["quality_filter"] = {{"min_chars", cfg.quality_filter.min_chars},
                           {"reject_control", cfg.quality_filter.reject_control},
                           {"require_valid_utf8", cfg.quality_filter.require_valid_utf8},
                           {"include_human_turns", cfg.quality_filter.include_human_turns}};
    j["sampling"] = {{"k", cfg.sampling.k},
                     {"bins", cfg.sampling.bins},
                     {"seed", cfg.sampling.seed},
                     {"per_language", cfg.sampling.per_language}};
    j["preamble_dir"] = cfg.preamble_dir.string();
    j["verification_threshold"] = cfg.verification_threshold;
    j["toxicity"] = {{"caption_threshold", cfg.toxicity.caption_threshold},
                     {"extra_categories", cfg.toxicity.extra_categories}};
    j["retry"] = {{"max_attempts", cfg.retry.max_attempts},
                  {"initial_backoff_ms", cfg.retry.initial_backoff.count()},
                  {"multiplier", cfg.retry.multiplier}};
    j["concurrency"] = cfg.concurrency;
    j["shard_size"] = cfg.shard_size;
    return j;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

}  // namespace

std::string config_digest(const PipelineConfig& cfg) {
    return util::sha256_hex(effective_json(cfg).dump());
}

PipelineConfig load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(util::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed config " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object: " + path.string());

    static const std::set<std::string> known = {
        "languages",   "source_language", "extra_languages", "language_names",
        "backends",    "quality_filter",  "sampling",        "preamble_dir",
        "verification_threshold", "toxicity", "retry", "concurrency", "shard_size"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key))
            throw ConfigError("unknown config key '" + key + "' in " + path.string());
    }

    PipelineConfig cfg = default_config();
    if (j.contains("languages")) {
        cfg.languages.clear();
        for (const auto& l : j.at("languages"))
            cfg.languages.push_back(corpus::normalize_language(l.get<std::string>()));
    }
    cfg.source_language = corpus::normalize_language(
        get_or<std::string>(j, "source_language", cfg.source_language));
    if (j.contains("extra_languages")) {
        for (const auto& l : j.at("extra_languages"))
            cfg.extra_languages.push_back(corpus::normalize_language(l.get<std::string>()));
    }
    if (j.contains("language_names")) {
        for (const auto& [k, v] : j.at("language_names").items())
            cfg.language_names[corpus::normalize_language(k)] = v.get<std::string>();
    }
    if (j.contains("backends")) {
        for (const auto& [name, b] : j.at("backends").items()) {
            backends::HttpBackendConfig hb;
            hb.name = name;
            hb.base_url = b.at("base_url").get<std::string>();
            hb.auth_env = b.value("auth_env", "");
            hb.timeout = std::chrono::milliseconds(b.value("timeout_ms", 30000));
            cfg.backend_registry[name] = std::move(hb);
        }
    }
    if (j.contains("quality_filter")) {
        const auto& q = j.at("quality_filter");
        cfg.quality_filter.min_chars = get_or<size_t>(q, "min_chars", cfg.quality_filter.min_chars);
        cfg.quality_filter.reject_control =
            get_or<bool>(q, "reject_control", cfg.quality_filter.reject_control);
        cfg.quality_filter.require_valid_utf8 =
            get_or<bool>(q, "require_valid_utf8", cfg.quality_filter.require_valid_utf8);
        cfg.quality_filter.include_human_turns =
            get_or<bool>(q, "include_human_turns", cfg.quality_filter.include_human_turns);
    }
    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        cfg.sampling.k = get_or<size_t>(s, "k", cfg.sampling.k);
        cfg.sampling.bins = get_or<size_t>(s, "bins", cfg.sampling.bins);
        cfg.sampling.seed = get_or<uint64_t>(s, "seed", cfg.sampling.seed);
        cfg.sampling.per_language = get_or<bool>(s, "per_language", cfg.sampling.per_language);
    }
    if (j.contains("preamble_dir"))
        cfg.preamble_dir = j.at("preamble_dir").get<std::string>();
    cfg.verification_threshold =
        get_or<double>(j, "verification_threshold", cfg.verification_threshold);
    if (j.contains("toxicity")) {
        const auto& t = j.at("toxicity");
        cfg.toxicity.caption_threshold =
            get_or<double>(t, "caption_threshold", cfg.toxicity.caption_threshold);
        if (t.contains("extra_categories"))
            for (const auto& c : t.at("extra_categories"))
                cfg.toxicity.extra_categories.push_back(c.get<std::string>());
    }
    if (j.contains("retry")) {
        const auto& r = j.at("retry");
        cfg.retry.max_attempts = get_or<size_t>(r, "max_attempts", cfg.retry.max_attempts);
        cfg.retry.initial_backoff = std::chrono::milliseconds(
            get_or<long long>(r, "initial_backoff_ms", cfg.retry.initial_backoff.count()));
        cfg.retry.multiplier = get_or<double>(r, "multiplier", cfg.retry.multiplier);
    }
    cfg.concurrency = get_or<size_t>(j, "concurrency", cfg.concurrency);
    cfg.shard_size = get_or<size_t>(j, "shard_size", cfg.shard_size);

    validate_config(cfg);
    cfg.digest = config_digest(cfg);
    return cfg;
}

void validate_config(const PipelineConfig& cfg) {
    if (cfg.languages.empty()) throw ConfigError("config: languages must be non-empty");
    for (const auto& l : cfg.languages) {
        if (!corpus::is_supported_language(l, cfg.extra_languages))
            throw ConfigError("config: unsupported language '" + l +
                              "'; add it to extra_languages to register it");
        if (l == cfg.source_language)
            throw ConfigError("config: target language '" + l + "' equals source_language");
    }
    for (const auto& l : cfg.extra_languages) {
        if (!cfg.language_names.count(l))
            throw ConfigError("config: extra language '" + l +
                              "' needs a display name in language_names");
    }
    if (cfg.verification_threshold < 0.0 || cfg.verification_threshold > 1.0)
        throw ConfigError("config: verification_threshold must be in [0,1]");
    if (cfg.toxicity.caption_threshold < 0.0 || cfg.toxicity.caption_threshold > 1.0)
        throw ConfigError("config: toxicity.caption_threshold must be in [0,1]");
    if (cfg.sampling.bins < 1) throw ConfigError("config: sampling.bins must be >= 1");
    if (cfg.retry.max_attempts < 1) throw ConfigError("config: retry.max_attempts must be >= 1");
    if (cfg.concurrency < 1) throw ConfigError("config: concurrency must be >= 1");
}

}  // namespace langweave::config
