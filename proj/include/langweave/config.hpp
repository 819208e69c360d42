#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "langweave/backends.hpp"
#include "langweave/corpus.hpp"

namespace langweave::config {

struct SamplingConfig {
    size_t k = 30;
    size_t bins = 3;
    uint64_t seed = 42;
    bool per_language = false;  // default: one shared sample set
};

struct ToxicityConfig {
    double caption_threshold = 0.80;  // strict >
    std::vector<std::string> extra_categories;
};

struct PipelineConfig {
    std::vector<std::string> languages;  // targets, source excluded
    std::string source_language = "en";
    std::vector<std::string> extra_languages;           // admitted beyond the builtin set
    std::map<std::string, std::string> language_names;  // code -> display name
    std::map<std::string, backends::HttpBackendConfig> backend_registry;
    corpus::QualityFilterConfig quality_filter;
    SamplingConfig sampling;
    std::filesystem::path preamble_dir;
    double verification_threshold = 0.6;
    ToxicityConfig toxicity;
    backends::RetryPolicy retry;
    size_t concurrency = 8;
    size_t shard_size = 64;

    // Raw parsed document; the digest covers exactly what the user wrote.
    std::string digest;
};

// Parses the JSON config file. Unknown top-level keys are errors (they are
// usually typos); unset keys keep their defaults.
PipelineConfig load_config(const std::filesystem::path& path);

PipelineConfig default_config();

// sha256 of the canonicalized effective configuration.
std::string config_digest(const PipelineConfig& cfg);

void validate_config(const PipelineConfig& cfg);

}  // namespace langweave::config
