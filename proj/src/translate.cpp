#include "langweave/translate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "langweave/errors.hpp"
#include "langweave/metrics.hpp"
#include "langweave/util.hpp"

namespace langweave::translate {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kPlaceholder = "<image>";

size_t ws_run_end(std::string_view s, size_t from) {
    size_t i = from;
    while (i < s.size()) {
        size_t j = i;
        char32_t cp = util::decode_utf8(s, j);
        if (!util::is_space(cp)) break;
        i = j;
    }
    return i;
}

// Start of the whitespace run that ends at `upto` (scans from the front;
// the texts involved are short).
size_t ws_run_begin(std::string_view s, size_t upto) {
    size_t i = 0, last_non_ws_end = 0;
    while (i < upto) {
        size_t j = i;
        char32_t cp = util::decode_utf8(s, j);
        if (!util::is_space(cp)) last_non_ws_end = j;
        i = j;
    }
    return last_non_ws_end;
}

}  // namespace

size_t count_placeholders(std::string_view text) {
    size_t n = 0, pos = 0;
    while ((pos = text.find(kPlaceholder, pos)) != std::string_view::npos) {
        ++n;
        pos += kPlaceholder.size();
    }
    return n;
}

MaskedText mask_placeholder(std::string_view source) {
    MaskedText m;
    size_t pos = source.find(kPlaceholder);
    if (pos == std::string_view::npos) {
        m.text = std::string(source);
        return m;
    }
    m.had_placeholder = true;
    size_t end = pos + kPlaceholder.size();
    // leading: only whitespace before the placeholder
    bool leading = util::trim(std::string(source.substr(0, pos))).empty();
    if (leading) {
        size_t affix_end = ws_run_end(source, end);
        m.leading = true;
        m.affix = std::string(source.substr(0, affix_end));
        m.text = std::string(source.substr(affix_end));
    } else {
        size_t affix_begin = ws_run_begin(source, pos);
        m.leading = false;
        m.affix = std::string(source.substr(affix_begin, end - affix_begin));
        // drop the placeholder span; keep whatever follows it
        m.text = std::string(source.substr(0, affix_begin)) +
                 std::string(source.substr(end));
    }
    return m;
}

std::string restore_placeholder(const MaskedText& masked, std::string_view translated) {
    if (!masked.had_placeholder) return std::string(translated);
    if (masked.leading) return masked.affix + std::string(translated);
    return std::string(translated) + masked.affix;
}

const preamble::PreambleTemplate& default_preamble() {
    static const preamble::PreambleTemplate pre = [] {
        preamble::PreambleTemplate p;
        p.id = "builtin-default";
        p.instruction =
            "You are an expert in translations. \nYour job is to translate the input "
            "to {language} in\nthe given chat.";
        p.considerations = {"The translation preserves the meaning of the input.",
                            "The translation keeps numbers and names unchanged."};
        p.constraints = {"Output only the translated text."};
        return p;
    }();
    return pre;
}

namespace {

struct DebugLogger {
    explicit DebugLogger(const std::filesystem::path& path) {
        if (!path.empty()) {
            out.open(path, std::ios::binary | std::ios::app);
            if (!out) throw IoError("cannot open debug log " + path.string());
        }
    }
    void log(const json& j) {
        if (!out.is_open()) return;
        std::lock_guard<std::mutex> lk(mu);
        out << j.dump() << '\n';
        out.flush();
    }
    std::ofstream out;
    std::mutex mu;
};

// One unit end to end: mask, render, call with retries, restore.
struct UnitOutcome {
    bool done = false;
    std::string target_text;
    uint64_t attempt = 0;
    std::string error;
    size_t retries = 0;
    size_t calls = 0;
};

UnitOutcome run_unit(const corpus::TranslationUnit& unit,
                     backends::TranslationBackend& backend,
                     const preamble::PreambleTemplate& pre,
                     const backends::RetryPolicy& policy, DebugLogger& dbg) {
    UnitOutcome out;
    MaskedText masked = mask_placeholder(unit.source_text);
    backends::TranslateRequest req;
    req.prompt = preamble::render_prompt(pre, unit.target_language, masked.text);
    req.target_language = unit.target_language;

    for (uint64_t attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        auto t0 = std::chrono::steady_clock::now();
        try {
            ++out.calls;
            std::string text = backend.translate(req);
            auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
            out.done = true;
            out.attempt = attempt;
            out.target_text = restore_placeholder(masked, text);
            dbg.log({{"event", "translate"},
                     {"hash", unit.content_hash},
                     {"record_id", unit.record_id},
                     {"turn_index", unit.turn_index},
                     {"attempt", attempt},
                     {"latency_ms", ms},
                     {"status", "ok"}});
            return out;
        } catch (const BackendError& e) {
            auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
            out.error = e.what();
            out.attempt = attempt;
            dbg.log({{"event", "translate"},
                     {"hash", unit.content_hash},
                     {"record_id", unit.record_id},
                     {"turn_index", unit.turn_index},
                     {"attempt", attempt},
                     {"latency_ms", ms},
                     {"status", "error"},
                     {"error", e.what()}});
            if (attempt < policy.max_attempts) {
                ++out.retries;
                std::this_thread::sleep_for(policy.backoff_for(attempt));
            }
        }
    }
    return out;
}

}  // namespace

std::vector<corpus::TranslationUnit> resume(const checkpoint::Checkpoint& ckpt,
                                            const std::vector<corpus::TranslationUnit>& units) {
    std::vector<corpus::TranslationUnit> pending;
    for (const auto& u : units)
        if (!ckpt.is_done(u.content_hash)) pending.push_back(u);
    return pending;
}

BatchResult translate_batch(const std::vector<corpus::TranslationUnit>& units,
                            backends::TranslationBackend& backend,
                            const preamble::PreambleTemplate& pre,
                            checkpoint::Checkpoint& ckpt,
                            const backends::RetryPolicy& policy,
                            const BatchOptions& options) {
    if (!units.empty()) {
        const std::string& tgt = units.front().target_language;
        for (const auto& u : units)
            if (u.target_language != tgt)
                throw ValidationError("translate_batch requires a single target language");
    }

    DebugLogger dbg(options.debug_log);
    BatchResult result;

    std::vector<size_t> pending_idx;
    for (size_t i = 0; i < units.size(); ++i) {
        if (ckpt.is_done(units[i].content_hash)) ++result.reused_from_checkpoint;
        else pending_idx.push_back(i);
    }

    // Identical hashes only need one backend call; later duplicates reuse the
    // checkpoint entry.
    std::mutex in_flight_mu;
    std::set<std::string> claimed;

    std::atomic<size_t> calls{0}, retries{0};
    const size_t shard = options.shard_size == 0 ? 64 : options.shard_size;
    for (size_t base = 0; base < pending_idx.size(); base += shard) {
        size_t count = std::min(shard, pending_idx.size() - base);
        util::parallel_for(count, options.concurrency, [&](size_t k) {
            const auto& unit = units[pending_idx[base + k]];
            {
                std::lock_guard<std::mutex> lk(in_flight_mu);
                if (ckpt.is_done(unit.content_hash) || !claimed.insert(unit.content_hash).second)
                    return;  // duplicate hash handled by the first claimant
            }
            UnitOutcome out = run_unit(unit, backend, pre, policy, dbg);
            calls += out.calls;
            retries += out.retries;
            if (out.done) {
                ckpt.record_done(unit.content_hash, out.target_text, backend.name(),
                                 out.attempt);
            } else {
                ckpt.record_failed(unit.content_hash, backend.name(), out.attempt,
                                   out.error);
            }
            {
                std::lock_guard<std::mutex> lk(in_flight_mu);
                claimed.erase(unit.content_hash);
            }
        });
    }
    result.backend_calls = calls;
    result.retries = retries;

    for (const auto& u : units) {
        if (const checkpoint::Entry* e = ckpt.done_entry(u.content_hash)) {
            Translation t;
            t.unit = u;
            t.target_text = e->target_text;
            t.backend_name = e->backend;
            t.attempt = e->attempt;
            t.created_at = e->ts;
            result.translations.push_back(std::move(t));
        } else {
            result.failed_hashes.push_back(u.content_hash);
        }
    }
    return result;
}

VerificationResult back_translate_verify(const Translation& translation,
                                         backends::TranslationBackend& backend,
                                         double threshold,
                                         const preamble::PreambleTemplate* pre,
                                         const backends::RetryPolicy& policy) {
    const preamble::PreambleTemplate& p = pre ? *pre : default_preamble();
    VerificationResult res;
    res.unit = translation.unit;
    res.target_text = translation.target_text;

    MaskedText masked_target = mask_placeholder(translation.target_text);
    backends::TranslateRequest req;
    req.prompt = preamble::render_prompt(p, translation.unit.source_language,
                                         masked_target.text);
    req.target_language = translation.unit.source_language;

    std::string back;
    bool ok = false;
    for (uint64_t attempt = 1; attempt <= policy.max_attempts && !ok; ++attempt) {
        try {
            back = backend.translate(req);
            ok = true;
        } catch (const BackendError&) {
            if (attempt < policy.max_attempts)
                std::this_thread::sleep_for(policy.backoff_for(attempt));
        }
    }
    if (!ok) {
        res.status = "flagged";
        return res;
    }
    res.back_text = back;

    MaskedText masked_source = mask_placeholder(translation.unit.source_text);
    const std::string& lang = translation.unit.source_language;
    auto back_tokens = metrics::tokenize(back, lang);
    auto src_tokens = metrics::tokenize(masked_source.text, lang);
    double sim;
    if (src_tokens.empty()) {
        sim = back_tokens.empty() ? 1.0 : 0.0;
    } else if (back_tokens.empty()) {
        sim = 0.0;
    } else {
        sim = metrics::avg_ngram_bleu(back_tokens, {src_tokens});
    }
    res.similarity = sim;
    res.status = sim >= threshold ? "pass" : "flagged";
    return res;
}

std::vector<VerificationResult> verify_batch(const std::vector<Translation>& translations,
                                             backends::TranslationBackend& backend,
                                             double threshold,
                                             const preamble::PreambleTemplate* pre,
                                             const backends::RetryPolicy& policy,
                                             size_t concurrency) {
    std::vector<VerificationResult> out(translations.size());
    util::parallel_for(translations.size(), concurrency, [&](size_t i) {
        out[i] = back_translate_verify(translations[i], backend, threshold, pre, policy);
    });
    return out;
}

std::string translation_jsonl_line(const Translation& t) {
    json j = json::object();
    j["record_id"] = t.unit.record_id;
    j["turn_index"] = t.unit.turn_index;
    j["hash"] = t.unit.content_hash;
    j["source_language"] = t.unit.source_language;
    j["target_language"] = t.unit.target_language;
    j["source_text"] = t.unit.source_text;
    j["target_text"] = t.target_text;
    j["backend"] = t.backend_name;
    return j.dump();
}

void write_translations_jsonl(const std::vector<Translation>& translations,
                              const std::filesystem::path& path) {
    std::string buf;
    for (const auto& t : translations) {
        buf += translation_jsonl_line(t);
        buf += '\n';
    }
    util::write_file_atomic(path, buf);
}

std::vector<Translation> read_translations_jsonl(const std::filesystem::path& path) {
    std::vector<Translation> out;
    for (const auto& line : util::read_lines(path)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        Translation t;
        t.unit.record_id = j.at("record_id").get<std::string>();
        t.unit.turn_index = j.at("turn_index").get<size_t>();
        t.unit.content_hash = j.at("hash").get<std::string>();
        t.unit.source_language = j.at("source_language").get<std::string>();
        t.unit.target_language = j.at("target_language").get<std::string>();
        t.unit.source_text = j.at("source_text").get<std::string>();
        t.target_text = j.at("target_text").get<std::string>();
        t.backend_name = j.value("backend", "");
        out.push_back(std::move(t));
    }
    return out;
}

void write_review_queue(const std::vector<VerificationResult>& results,
                        const std::filesystem::path& path) {
    std::string buf;
    for (const auto& r : results) {
        if (r.status != "flagged") continue;
        json j = json::object();
        j["record_id"] = r.unit.record_id;
        j["turn_index"] = r.unit.turn_index;
        j["hash"] = r.unit.content_hash;
        j["source_text"] = r.unit.source_text;
        j["target_text"] = r.target_text;
        j["back_text"] = r.back_text;
        if (r.similarity) j["similarity"] = *r.similarity;
        else j["similarity"] = nullptr;
        j["status"] = r.status;
        buf += j.dump();
        buf += '\n';
    }
    util::write_file_atomic(path, buf);
}

}  // namespace langweave::translate
