#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace langweave::backends {

struct RetryPolicy {
    size_t max_attempts = 3;
    std::chrono::milliseconds initial_backoff{100};
    double multiplier = 2.0;

    std::chrono::milliseconds backoff_for(size_t attempt) const;  // attempt is 1-based
};

struct TranslateRequest {
    std::string prompt;
    std::string target_language;
};

class TranslationBackend {
public:
    virtual ~TranslationBackend() = default;
    virtual std::string name() const = 0;
    // Throws BackendError on failure; retry is the caller's job.
    virtual std::string translate(const TranslateRequest& req) = 0;
};

struct ImageSafetyResult {
    std::string rating;  // safe | unsafe | highly_unsafe
    std::string category;
    std::string rationale;
};

class ImageSafetyBackend {
public:
    virtual ~ImageSafetyBackend() = default;
    virtual std::string name() const = 0;
    virtual ImageSafetyResult assess(const std::string& record_id,
                                     const std::string& image) = 0;
};

class TextToxicityBackend {
public:
    virtual ~TextToxicityBackend() = default;
    virtual std::string name() const = 0;
    // category -> confidence in [0,1]
    virtual std::map<std::string, double> score(const std::string& text) = 0;
};

struct JudgeVerdict {
    bool confirmed = true;
    std::string rationale;
};

class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;
    virtual std::string name() const = 0;
    virtual JudgeVerdict arbitrate(const std::string& prompt, const std::string& record_id,
                                   const ImageSafetyResult& finding) = 0;
};

// Deterministic mock translation backends, selected by name:
//   identity     returns the prompt payload unchanged
//   bijective    token-prefix encode; decodes its own output (round-trip id)
//   lossy:p      drops a deterministic hash-selected fraction p of tokens
//   corrupt:p    mangles a fraction p of tokens; a "corruption-rate: X"
//                directive inside the prompt overrides p per request
//   flaky:k      every k-th call fails once, otherwise behaves as bijective
// The payload is the text between the last "Input:\n" and the trailing
// "\nExpected Output:\n" marker, or the whole prompt if markers are absent.
std::unique_ptr<TranslationBackend> make_mock_translator(std::string_view spec);

bool is_mock_translator_name(std::string_view spec);

// Extracts the payload the mocks operate on (exposed for oracle tests).
std::string prompt_payload(std::string_view prompt);

// Mock image-safety backends:
//   safe     everything safe
//   marker   unsafe iff image path contains "#unsafe:<category>[:borderline]"
std::unique_ptr<ImageSafetyBackend> make_mock_image_safety(std::string_view spec);
bool is_mock_image_safety_name(std::string_view spec);

// Mock caption-toxicity backends:
//   zero     all scores empty
//   marker   captions containing "[toxic:<category>]" score 0.95 for that
//            category; "[toxic:<category>:<conf>]" sets the confidence
std::unique_ptr<TextToxicityBackend> make_mock_text_toxicity(std::string_view spec);
bool is_mock_text_toxicity_name(std::string_view spec);

// Mock judges:
//   confirm            confirms every finding
//   clear-borderline   clears findings whose rationale contains "borderline"
//   clear-category:c   clears findings with category c
std::unique_ptr<JudgeBackend> make_mock_judge(std::string_view spec);
bool is_mock_judge_name(std::string_view spec);

// HTTP adapters. Wire protocol (JSON over POST):
//   {base}/v1/translate     {"prompt","target_language"} -> {"text"}
//   {base}/v1/image-safety  {"record_id","image"} -> {"rating","category","rationale"}
//   {base}/v1/text-toxicity {"text"} -> {"scores":{category:confidence}}
//   {base}/v1/judge         {"prompt","record_id","rating","category","rationale"}
//                              -> {"confirmed","rationale"}
// A Bearer token is read from auth_env when the variable is set and non-empty.
struct HttpBackendConfig {
    std::string name;
    std::string base_url;
    std::string auth_env;
    std::chrono::milliseconds timeout{30000};
};

std::unique_ptr<TranslationBackend> make_http_translator(const HttpBackendConfig& cfg);
std::unique_ptr<ImageSafetyBackend> make_http_image_safety(const HttpBackendConfig& cfg);
std::unique_ptr<TextToxicityBackend> make_http_text_toxicity(const HttpBackendConfig& cfg);
std::unique_ptr<JudgeBackend> make_http_judge(const HttpBackendConfig& cfg);

}  // namespace langweave::backends
