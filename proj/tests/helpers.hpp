// Shared test scaffolding: temp directories, fixture builders, and an
// independent brute-force BLEU oracle written directly from the metric's
// definition (kept deliberately naive; never shares code with src/).
#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "langweave/corpus.hpp"

namespace testutil {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            auto candidate = base / ("langweave-" + tag + "-" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("could not create temp dir for " + tag);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

inline langweave::corpus::ImageTextRecord make_record(const std::string& id,
                                                      const std::string& caption,
                                                      const std::string& image = "") {
    langweave::corpus::ImageTextRecord rec;
    rec.id = id;
    rec.image = image.empty() ? "images/" + id + ".jpg" : image;
    langweave::corpus::ConversationTurn q, a;
    q.from = "human";
    q.value = "<image>\nDescribe the picture.";
    a.from = "gpt";
    a.value = caption;
    rec.conversations = {q, a};
    return rec;
}

inline langweave::corpus::DatasetManifest make_manifest(
    const std::vector<std::pair<std::string, std::string>>& id_captions,
    const std::string& language = "en") {
    langweave::corpus::DatasetManifest m;
    m.name = "test";
    m.language = language;
    for (const auto& [id, cap] : id_captions) m.records.push_back(make_record(id, cap));
    return m;
}

// ---- brute-force BLEU oracle -------------------------------------------------
//
// Clipped n-gram precision + closest-ref brevity penalty, straight from the
// definition. O(n^2) n-gram maps, no shared state with the library.

using Tokens = std::vector<std::string>;

inline std::map<Tokens, int> oracle_ngram_counts(const Tokens& toks, size_t n) {
    std::map<Tokens, int> counts;
    if (toks.size() < n) return counts;
    for (size_t i = 0; i + n <= toks.size(); ++i)
        counts[Tokens(toks.begin() + i, toks.begin() + i + n)] += 1;
    return counts;
}

struct OracleBleu {
    std::vector<double> precisions;  // smoothed, order 1..max_n
    double bp = 0.0;
    double score = 0.0;
};

inline OracleBleu oracle_bleu(const Tokens& hyp, const std::vector<Tokens>& refs,
                              size_t max_n, bool smooth, double epsilon = 1e-9) {
    OracleBleu out;
    if (hyp.empty()) return out;  // defined as score 0, bp 0

    // closest reference length, ties to the shorter
    size_t ref_len = refs.front().size();
    for (const auto& r : refs) {
        auto diff = [&](size_t len) {
            return len > hyp.size() ? len - hyp.size() : hyp.size() - len;
        };
        if (diff(r.size()) < diff(ref_len) || (diff(r.size()) == diff(ref_len) && r.size() < ref_len))
            ref_len = r.size();
    }
    out.bp = hyp.size() >= ref_len
                 ? 1.0
                 : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp.size()));

    double log_sum = 0.0;
    bool dead = false;
    for (size_t n = 1; n <= max_n; ++n) {
        auto hyp_counts = oracle_ngram_counts(hyp, n);
        long matched = 0, total = 0;
        for (const auto& [gram, count] : hyp_counts) {
            total += count;
            int best = 0;
            for (const auto& r : refs) {
                auto rc = oracle_ngram_counts(r, n);
                auto it = rc.find(gram);
                if (it != rc.end() && it->second > best) best = it->second;
            }
            matched += std::min<long>(count, best);
        }
        double p = total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(total);
        if (p == 0.0) {
            if (smooth) p = epsilon;
            else dead = true;
        }
        out.precisions.push_back(p);
        if (!dead) log_sum += std::log(p) / static_cast<double>(max_n);
    }
    out.score = dead ? 0.0 : out.bp * std::exp(log_sum);
    return out;
}

inline double oracle_avg_ngram_bleu(const Tokens& hyp, const std::vector<Tokens>& refs) {
    double sum = 0.0;
    for (size_t n = 1; n <= 4; ++n) sum += oracle_bleu(hyp, refs, n, true).score;
    return sum / 4.0;
}

inline Tokens random_tokens(std::mt19937& rng, size_t max_len, size_t min_len = 1) {
    static const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g", "h"};
    std::uniform_int_distribution<size_t> len_dist(min_len, max_len);
    std::uniform_int_distribution<size_t> tok_dist(0, vocab.size() - 1);
    Tokens out(len_dist(rng));
    for (auto& t : out) t = vocab[tok_dist(rng)];
    return out;
}

}  // namespace testutil
