#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace langweave::metrics {

// Tokenization: Unicode-whitespace split with leading/trailing ASCII
// punctuation peeled into separate tokens. For zh/ja the text is split into
// single characters, which is the usual convention for BLEU on CJK text
// without a segmenter.
std::vector<std::string> tokenize(std::string_view text, std::string_view language);

enum class Smoothing {
    none,
    add_epsilon,  // replace zero precisions with epsilon
};

struct BleuBreakdown {
    std::vector<double> precisions;  // raw clipped precisions, order 1..max_n
    std::vector<double> smoothed;    // precisions after the smoothing policy
    std::vector<double> weights;
    double brevity_penalty = 1.0;
    double score = 0.0;
    size_t hyp_length = 0;
    size_t ref_length = 0;
    bool empty_hyp = false;
};

// Clipped n-gram counts: matched = sum over hyp n-grams of
// min(count in hyp, max count in any ref); total = hyp n-gram count.
std::pair<size_t, size_t> modified_precision(const std::vector<std::string>& hyp,
                                             const std::vector<std::vector<std::string>>& refs,
                                             size_t n);

inline constexpr double kBleuEpsilon = 1e-9;

BleuBreakdown bleu(const std::vector<std::string>& hyp,
                   const std::vector<std::vector<std::string>>& refs,
                   size_t max_n = 4,
                   Smoothing smoothing = Smoothing::add_epsilon,
                   double epsilon = kBleuEpsilon);

// Mean of cumulative BLEU-1..4 (uniform 1/n weights each), epsilon smoothing.
double avg_ngram_bleu(const std::vector<std::string>& hyp,
                      const std::vector<std::vector<std::string>>& refs);

struct LengthStats {
    size_t characters = 0;  // Unicode codepoints, whitespace included
    size_t words = 0;
    size_t sentences = 0;
    size_t syllables = 0;
};

LengthStats length_analysis(std::string_view text);

size_t count_syllables_word(std::string_view word);

// 206.835 - 1.015*(words/sentences) - 84.6*(syllables/words).
// Throws ValidationError on zero words.
double flesch_reading_ease(std::string_view text);

// 0.39*(words/sentences) + 11.8*(syllables/words) - 15.59.
double fkgl(std::string_view text);

}  // namespace langweave::metrics
