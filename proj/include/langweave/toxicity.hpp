#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "langweave/backends.hpp"
#include "langweave/corpus.hpp"
#include "langweave/preamble.hpp"

namespace langweave::toxicity {

struct SafetyFinding {
    std::string record_id;
    std::string rating;  // safe | unsafe | highly_unsafe
    std::string category;
    std::string rationale;
};

struct ArbitrationVerdict {
    std::string record_id;
    bool confirmed = false;
    std::string judge_rationale;
};

struct ToxicityFlag {
    std::string record_id;
    std::string category;
    double confidence = 0.0;
};

const std::vector<std::string>& category_registry();

// Per-category counts over the registry plus "other"; unknown categories are
// binned under "other".
std::map<std::string, size_t> category_histogram(const std::vector<std::string>& categories,
                                                 const std::vector<std::string>& extra_registry = {});

struct ScanImagesResult {
    std::vector<SafetyFinding> flagged;        // non-safe findings, record order
    std::vector<std::string> unscanned_ids;    // classifier exhausted retries
    size_t scanned = 0;
};

ScanImagesResult scan_images(const corpus::DatasetManifest& manifest,
                             backends::ImageSafetyBackend& classifier,
                             const backends::RetryPolicy& policy = {},
                             size_t concurrency = 8);

struct ArbitrateResult {
    std::vector<ArbitrationVerdict> verdicts;  // one per finding, same order
    size_t judge_failures = 0;                 // kept confirmed (fail-closed)
};

ArbitrateResult arbitrate(const std::vector<SafetyFinding>& findings,
                          backends::JudgeBackend& judge,
                          const preamble::PreambleTemplate& pre,
                          const backends::RetryPolicy& policy = {},
                          size_t concurrency = 8);

struct ScanCaptionsResult {
    std::vector<ToxicityFlag> flags;  // record order; max-confidence category
    std::vector<std::string> unscanned_ids;
    size_t scanned = 0;
};

// Caption text is the concatenation of the record's gpt-turn values. A record
// is flagged when its max per-category confidence exceeds the threshold
// strictly.
ScanCaptionsResult scan_captions(const corpus::DatasetManifest& manifest,
                                 backends::TextToxicityBackend& classifier,
                                 double threshold = 0.80,
                                 const backends::RetryPolicy& policy = {},
                                 size_t concurrency = 8);

std::set<std::string> merge_flags(const std::set<std::string>& confirmed,
                                  const std::set<std::string>& caption_flags);

// Keeps exactly the records whose id is not toxic, in order; appends a
// provenance entry carrying the removal count.
corpus::DatasetManifest filter_dataset(const corpus::DatasetManifest& manifest,
                                       const std::set<std::string>& toxic_ids,
                                       std::string_view config_digest = "");

std::string caption_text(const corpus::ImageTextRecord& rec);

}  // namespace langweave::toxicity
