#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "langweave/backends.hpp"
#include "langweave/preamble.hpp"

namespace langweave::prompteval {

struct EvalSample {
    std::string source;
    std::string language;   // target language code
    std::string reference;  // trusted reference translation
};

// CSV (header: source,language,reference) or JSON lines, by file extension.
std::vector<EvalSample> load_evalset(const std::filesystem::path& path);

struct CellScore {
    std::array<double, 4> per_order{};  // mean cumulative BLEU-1..4 over samples
    double averaged = 0.0;              // mean avg_ngram_bleu over samples
    size_t sample_count = 0;
    bool present = false;
};

struct PreambleScoreMatrix {
    std::vector<std::string> preamble_ids;  // sorted ascending
    std::vector<std::string> languages;     // sorted ascending
    std::map<std::pair<std::string, std::string>, CellScore> cells;  // (preamble, lang)
    size_t eval_set_size = 0;

    const CellScore& at(const std::string& pre, const std::string& lang) const;
    bool complete() const;
    std::vector<std::pair<std::string, std::string>> absent_cells() const;
};

struct EvalOptions {
    backends::RetryPolicy retry;
    size_t concurrency = 8;
    std::filesystem::path call_log;  // JSON lines; empty disables
};

// Fills every (preamble, language) cell by translating each evalset sample
// for that language with the preamble and scoring sentence-level
// avg_ngram_bleu against the reference, then averaging over samples. A cell
// whose backend calls exhaust retries is marked absent; the caller treats an
// incomplete matrix as a partial failure.
PreambleScoreMatrix evaluate_preambles(const std::vector<preamble::PreambleTemplate>& preambles,
                                       const std::vector<EvalSample>& evalset,
                                       backends::TranslationBackend& backend,
                                       const EvalOptions& options = {});

struct Ranking {
    std::map<std::string, std::vector<std::string>> per_language;  // best first
    std::vector<std::string> overall;  // by cross-language mean
};

// Descending averaged score, ties broken by ascending preamble id. Throws
// PartialFailure listing absent cells when the matrix is incomplete.
Ranking rank_preambles(const PreambleScoreMatrix& matrix);

// Writes bar series (CSV: one row per preamble x language with per-order and
// averaged scores) and radar series (JSON: per preamble, per-order means
// across languages). The pair of files is lossless for the matrix.
void emit_figure_series(const PreambleScoreMatrix& matrix,
                        const std::filesystem::path& out_dir);

PreambleScoreMatrix read_figure_series(const std::filesystem::path& out_dir);

}  // namespace langweave::prompteval
