#include "langweave/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "langweave/errors.hpp"
#include "langweave/util.hpp"

namespace langweave::metrics {

namespace {

bool is_ascii_punct(char32_t cp) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
}

void split_word(const std::u32string& run, std::vector<std::u32string>& out) {
    size_t b = 0, e = run.size();
    size_t lead_end = b;
    while (lead_end < e && is_ascii_punct(run[lead_end])) ++lead_end;
    if (lead_end == e) {
        // all punctuation: each mark is its own token
        for (size_t i = b; i < e; ++i) out.push_back(run.substr(i, 1));
        return;
    }
    size_t tail_begin = e;
    while (tail_begin > lead_end && is_ascii_punct(run[tail_begin - 1])) --tail_begin;
    for (size_t i = b; i < lead_end; ++i) out.push_back(run.substr(i, 1));
    out.push_back(run.substr(lead_end, tail_begin - lead_end));
    for (size_t i = tail_begin; i < e; ++i) out.push_back(run.substr(i, 1));
}

std::string encode(const std::u32string& s) {
    std::string out;
    for (char32_t cp : s) util::append_utf8(out, cp);
    return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, std::string_view language) {
    std::vector<std::string> tokens;
    const std::string lang = util::to_lower_ascii(language);
    if (lang == "zh" || lang == "ja") {
        size_t i = 0;
        while (i < text.size()) {
            size_t start = i;
            char32_t cp = util::decode_utf8(text, i);
            if (!util::is_space(cp)) tokens.emplace_back(text.substr(start, i - start));
        }
        return tokens;
    }
    std::vector<std::u32string> words;
    std::u32string cur;
    size_t i = 0;
    while (i < text.size()) {
        char32_t cp = util::decode_utf8(text, i);
        if (util::is_space(cp)) {
            if (!cur.empty()) {
                split_word(cur, words);
                cur.clear();
            }
        } else {
            cur.push_back(cp);
        }
    }
    if (!cur.empty()) split_word(cur, words);
    tokens.reserve(words.size());
    for (const auto& w : words) tokens.push_back(encode(w));
    return tokens;
}

std::pair<size_t, size_t> modified_precision(const std::vector<std::string>& hyp,
                                             const std::vector<std::vector<std::string>>& refs,
                                             size_t n) {
    if (n < 1) throw ValidationError("n-gram order must be >= 1");
    if (hyp.size() < n) return {0, 0};

    auto gram_counts = [n](const std::vector<std::string>& toks) {
        std::map<std::vector<std::string>, size_t> counts;
        if (toks.size() < n) return counts;
        for (size_t i = 0; i + n <= toks.size(); ++i) {
            std::vector<std::string> g(toks.begin() + i, toks.begin() + i + n);
            ++counts[std::move(g)];
        }
        return counts;
    };

    auto hyp_counts = gram_counts(hyp);
    std::map<std::vector<std::string>, size_t> max_ref;
    for (const auto& r : refs) {
        for (auto& [g, c] : gram_counts(r)) {
            auto it = max_ref.find(g);
            if (it == max_ref.end()) max_ref.emplace(g, c);
            else it->second = std::max(it->second, c);
        }
    }
    size_t matched = 0, total = 0;
    for (const auto& [g, c] : hyp_counts) {
        total += c;
        auto it = max_ref.find(g);
        if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    return {matched, total};
}

BleuBreakdown bleu(const std::vector<std::string>& hyp,
                   const std::vector<std::vector<std::string>>& refs,
                   size_t max_n,
                   Smoothing smoothing,
                   double epsilon) {
    if (max_n < 1) throw ValidationError("max_n must be >= 1");
    if (refs.empty()) throw ValidationError("bleu requires at least one reference");
    bool any_ref = std::any_of(refs.begin(), refs.end(),
                               [](const auto& r) { return !r.empty(); });
    if (!any_ref) throw ValidationError("bleu requires a non-empty reference");

    BleuBreakdown b;
    b.hyp_length = hyp.size();
    b.weights.assign(max_n, 1.0 / static_cast<double>(max_n));

    // Closest reference length; ties go to the shorter reference.
    size_t best_len = refs.front().size();
    for (const auto& r : refs) {
        auto diff = [&](size_t len) {
            return len > hyp.size() ? len - hyp.size() : hyp.size() - len;
        };
        if (diff(r.size()) < diff(best_len) ||
            (diff(r.size()) == diff(best_len) && r.size() < best_len)) {
            best_len = r.size();
        }
    }
    b.ref_length = best_len;

    if (hyp.empty()) {
        b.empty_hyp = true;
        b.precisions.assign(max_n, 0.0);
        b.smoothed.assign(max_n, 0.0);
        b.brevity_penalty = 0.0;
        b.score = 0.0;
        return b;
    }

    b.brevity_penalty =
        b.hyp_length >= b.ref_length
            ? 1.0
            : std::exp(1.0 - static_cast<double>(b.ref_length) /
                                 static_cast<double>(b.hyp_length));

    b.precisions.reserve(max_n);
    b.smoothed.reserve(max_n);
    double log_sum = 0.0;
    bool zero_unsmoothable = false;
    for (size_t n = 1; n <= max_n; ++n) {
        auto [matched, total] = modified_precision(hyp, refs, n);
        double p = total == 0 ? 0.0
                              : static_cast<double>(matched) / static_cast<double>(total);
        b.precisions.push_back(p);
        double sp = p;
        if (sp <= 0.0) {
            if (smoothing == Smoothing::add_epsilon) sp = epsilon;
            else zero_unsmoothable = true;
        }
        b.smoothed.push_back(sp);
        if (sp > 0.0) log_sum += b.weights[n - 1] * std::log(sp);
    }
    b.score = zero_unsmoothable ? 0.0 : b.brevity_penalty * std::exp(log_sum);
    return b;
}

double avg_ngram_bleu(const std::vector<std::string>& hyp,
                      const std::vector<std::vector<std::string>>& refs) {
    double sum = 0.0;
    for (size_t n = 1; n <= 4; ++n)
        sum += bleu(hyp, refs, n, Smoothing::add_epsilon).score;
    return sum / 4.0;
}

namespace {

bool is_vowel(char c) {
    switch (c) {
        case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
            return true;
        default:
            return false;
    }
}

}  // namespace

size_t count_syllables_word(std::string_view word) {
    if (word.empty()) return 0;
    std::string w = util::to_lower_ascii(word);
    // drop non-letters (apostrophes, digits, trailing punctuation)
    std::string letters;
    for (char c : w)
        if (c >= 'a' && c <= 'z') letters.push_back(c);
    if (letters.empty()) return 1;

    size_t runs = 0;
    bool in_run = false;
    for (char c : letters) {
        if (is_vowel(c)) {
            if (!in_run) ++runs;
            in_run = true;
        } else {
            in_run = false;
        }
    }
    // silent final e: "whale" -> 1, but keep "-le" after a consonant: "table" -> 2
    size_t n = letters.size();
    if (n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2])) {
        bool consonant_le = n >= 3 && letters[n - 1] == 'e' && letters[n - 2] == 'l' &&
                            !is_vowel(letters[n - 3]);
        if (!consonant_le && runs > 1) --runs;
    }
    return runs == 0 ? 1 : runs;
}

LengthStats length_analysis(std::string_view text) {
    LengthStats st;
    st.characters = util::codepoint_count(text);

    // A word is a whitespace-delimited run containing at least one ASCII
    // alphanumeric or any non-ASCII codepoint.
    std::vector<std::string> runs = util::split_ws(text);
    for (const auto& run : runs) {
        bool wordish = false;
        size_t i = 0;
        while (i < run.size()) {
            char32_t cp = util::decode_utf8(run, i);
            if (util::is_ascii_alnum(cp) || cp >= 0x80) {
                wordish = true;
                break;
            }
        }
        if (!wordish) continue;
        ++st.words;
        st.syllables += count_syllables_word(run);
    }

    // Sentence boundaries: . ! ? followed by whitespace or end of text.
    char32_t prev = 0;
    for (char32_t cp : util::to_codepoints(text)) {
        bool terminator = prev == U'.' || prev == U'!' || prev == U'?';
        if (terminator && util::is_space(cp)) ++st.sentences;
        prev = cp;
    }
    if (prev == U'.' || prev == U'!' || prev == U'?') ++st.sentences;
    if (st.words >= 1 && st.sentences == 0) st.sentences = 1;
    return st;
}

double flesch_reading_ease(std::string_view text) {
    LengthStats st = length_analysis(text);
    if (st.words == 0) throw ValidationError("readability undefined for zero words");
    double wps = static_cast<double>(st.words) / static_cast<double>(st.sentences);
    double spw = static_cast<double>(st.syllables) / static_cast<double>(st.words);
    return 206.835 - 1.015 * wps - 84.6 * spw;
}

double fkgl(std::string_view text) {
    LengthStats st = length_analysis(text);
    if (st.words == 0) throw ValidationError("readability undefined for zero words");
    double wps = static_cast<double>(st.words) / static_cast<double>(st.sentences);
    double spw = static_cast<double>(st.syllables) / static_cast<double>(st.words);
    return 0.39 * wps + 11.8 * spw - 15.59;
}

}  // namespace langweave::metrics
