#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "langweave/backends.hpp"
#include "langweave/checkpoint.hpp"
#include "langweave/corpus.hpp"
#include "langweave/preamble.hpp"

namespace langweave::translate {

// "<image>" is structural, not linguistic: it is detached before the backend
// sees the text and reattached verbatim afterwards. A leading placeholder
// keeps its position (and trailing whitespace); anything else is reattached
// at the end, preserving the whitespace that preceded it.
struct MaskedText {
    std::string text;              // source with the placeholder removed
    bool had_placeholder = false;
    bool leading = false;
    std::string affix;             // the exact bytes to reattach
};

MaskedText mask_placeholder(std::string_view source);
std::string restore_placeholder(const MaskedText& masked, std::string_view translated);

size_t count_placeholders(std::string_view text);

struct Translation {
    corpus::TranslationUnit unit;
    std::string target_text;
    std::string backend_name;
    uint64_t attempt = 0;
    std::string created_at;
};

struct BatchOptions {
    size_t shard_size = 64;
    size_t concurrency = 8;
    std::filesystem::path debug_log;  // JSON lines; empty disables
};

struct BatchResult {
    std::vector<Translation> translations;  // input order, done units only
    std::vector<std::string> failed_hashes;
    size_t reused_from_checkpoint = 0;
    size_t backend_calls = 0;
    size_t retries = 0;
};

// Drives the backend over all units not already done in the checkpoint.
// Every unit ends with exactly one done entry or (after max_attempts) a
// failed entry. Results cover all done units, previously done included.
BatchResult translate_batch(const std::vector<corpus::TranslationUnit>& units,
                            backends::TranslationBackend& backend,
                            const preamble::PreambleTemplate& pre,
                            checkpoint::Checkpoint& ckpt,
                            const backends::RetryPolicy& policy = {},
                            const BatchOptions& options = {});

// Units whose content_hash has no done entry, input order preserved.
std::vector<corpus::TranslationUnit> resume(const checkpoint::Checkpoint& ckpt,
                                            const std::vector<corpus::TranslationUnit>& units);

struct VerificationResult {
    corpus::TranslationUnit unit;
    std::string target_text;
    std::string back_text;
    std::optional<double> similarity;  // absent when back-translation failed
    std::string status;                // "pass" or "flagged"
};

// Back-translates target_text to the unit's source language and scores
// avg_ngram_bleu(back tokens, [source tokens]) with placeholders masked on
// both sides. pass iff similarity >= threshold.
VerificationResult back_translate_verify(const Translation& translation,
                                         backends::TranslationBackend& backend,
                                         double threshold = 0.6,
                                         const preamble::PreambleTemplate* pre = nullptr,
                                         const backends::RetryPolicy& policy = {});

std::vector<VerificationResult> verify_batch(const std::vector<Translation>& translations,
                                             backends::TranslationBackend& backend,
                                             double threshold,
                                             const preamble::PreambleTemplate* pre,
                                             const backends::RetryPolicy& policy,
                                             size_t concurrency);

// JSON-lines serialization used by the CLI: one object per translation with
// stable fields only (no attempts or timestamps), so interrupted-and-resumed
// runs emit byte-identical files.
std::string translation_jsonl_line(const Translation& t);
void write_translations_jsonl(const std::vector<Translation>& translations,
                              const std::filesystem::path& path);
std::vector<Translation> read_translations_jsonl(const std::filesystem::path& path);

void write_review_queue(const std::vector<VerificationResult>& results,
                        const std::filesystem::path& path);

// The built-in preamble used when none is supplied (also the back-translation
// default).
const preamble::PreambleTemplate& default_preamble();

}  // namespace langweave::translate
