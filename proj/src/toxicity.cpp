#include "langweave/toxicity.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "langweave/errors.hpp"
#include "langweave/util.hpp"

namespace langweave::toxicity {

const std::vector<std::string>& category_registry() {
    static const std::vector<std::string> cats = {
        "sexual_content", "hate_speech", "violence", "substance_abuse", "other"};
    return cats;
}

std::map<std::string, size_t> category_histogram(const std::vector<std::string>& categories,
                                                 const std::vector<std::string>& extra_registry) {
    std::map<std::string, size_t> hist;
    for (const auto& c : category_registry()) hist[c] = 0;
    for (const auto& c : extra_registry) hist[c] = 0;
    for (const auto& c : categories) {
        auto it = hist.find(c);
        if (it != hist.end()) ++it->second;
        else ++hist["other"];
    }
    return hist;
}

std::string caption_text(const corpus::ImageTextRecord& rec) {
    std::string text;
    for (const auto& t : rec.conversations) {
        if (t.from != "gpt") continue;
        if (!text.empty()) text.push_back('\n');
        text.append(t.value);
    }
    return text;
}

namespace {

// Retry wrapper shared by the scan loops; returns false when exhausted.
template <typename Fn>
bool with_retries(const backends::RetryPolicy& policy, Fn&& fn) {
    for (size_t attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        try {
            fn();
            return true;
        } catch (const BackendError&) {
            if (attempt < policy.max_attempts)
                std::this_thread::sleep_for(policy.backoff_for(attempt));
        }
    }
    return false;
}

}  // namespace

ScanImagesResult scan_images(const corpus::DatasetManifest& manifest,
                             backends::ImageSafetyBackend& classifier,
                             const backends::RetryPolicy& policy, size_t concurrency) {
    const size_t n = manifest.records.size();
    std::vector<backends::ImageSafetyResult> results(n);
    std::vector<char> ok(n, 0);
    util::parallel_for(n, concurrency, [&](size_t i) {
        const auto& rec = manifest.records[i];
        ok[i] = with_retries(policy, [&] { results[i] = classifier.assess(rec.id, rec.image); })
                    ? 1
                    : 0;
    });

    ScanImagesResult out;
    out.scanned = 0;
    for (size_t i = 0; i < n; ++i) {
        const auto& rec = manifest.records[i];
        if (!ok[i]) {
            out.unscanned_ids.push_back(rec.id);
            continue;
        }
        ++out.scanned;
        if (results[i].rating == "safe") continue;
        SafetyFinding f;
        f.record_id = rec.id;
        f.rating = results[i].rating;
        f.category = results[i].category.empty() ? "other" : results[i].category;
        f.rationale = results[i].rationale;
        if (f.rationale.empty())
            throw ValidationError("non-safe finding without rationale for record " + f.record_id);
        out.flagged.push_back(std::move(f));
    }
    return out;
}

ArbitrateResult arbitrate(const std::vector<SafetyFinding>& findings,
                          backends::JudgeBackend& judge,
                          const preamble::PreambleTemplate& pre,
                          const backends::RetryPolicy& policy, size_t concurrency) {
    for (const auto& f : findings)
        if (f.rating == "safe")
            throw ValidationError("arbitrate expects non-safe findings; record " +
                                  f.record_id + " is safe");

    const size_t n = findings.size();
    ArbitrateResult out;
    out.verdicts.resize(n);
    std::atomic<size_t> failures{0};
    util::parallel_for(n, concurrency, [&](size_t i) {
        const auto& f = findings[i];
        backends::ImageSafetyResult finding{f.rating, f.category, f.rationale};
        std::string prompt = preamble::render_prompt(
            pre, "en",
            "rating: " + f.rating + "\ncategory: " + f.category +
                "\nrationale: " + f.rationale);
        backends::JudgeVerdict v;
        bool ok = with_retries(policy, [&] { v = judge.arbitrate(prompt, f.record_id, finding); });
        ArbitrationVerdict verdict;
        verdict.record_id = f.record_id;
        if (ok) {
            verdict.confirmed = v.confirmed;
            verdict.judge_rationale = v.rationale;
        } else {
            // fail-closed: an unreachable judge never clears a flag
            verdict.confirmed = true;
            verdict.judge_rationale = "judge unavailable; kept confirmed";
            ++failures;
        }
        out.verdicts[i] = std::move(verdict);
    });
    out.judge_failures = failures;
    return out;
}

ScanCaptionsResult scan_captions(const corpus::DatasetManifest& manifest,
                                 backends::TextToxicityBackend& classifier,
                                 double threshold, const backends::RetryPolicy& policy,
                                 size_t concurrency) {
    const size_t n = manifest.records.size();
    std::vector<std::map<std::string, double>> scores(n);
    std::vector<char> ok(n, 0);
    util::parallel_for(n, concurrency, [&](size_t i) {
        std::string text = caption_text(manifest.records[i]);
        ok[i] = with_retries(policy, [&] { scores[i] = classifier.score(text); }) ? 1 : 0;
    });

    ScanCaptionsResult out;
    for (size_t i = 0; i < n; ++i) {
        const auto& rec = manifest.records[i];
        if (!ok[i]) {
            out.unscanned_ids.push_back(rec.id);
            continue;
        }
        ++out.scanned;
        std::string best_cat;
        double best = -1.0;
        for (const auto& [cat, conf] : scores[i]) {
            if (conf > best) {
                best = conf;
                best_cat = cat;
            }
        }
        if (best > threshold) {  // strict, per "greater than 80% confidence"
            out.flags.push_back({rec.id, best_cat, best});
        }
    }
    return out;
}

std::set<std::string> merge_flags(const std::set<std::string>& confirmed,
                                  const std::set<std::string>& caption_flags) {
    std::set<std::string> merged = confirmed;
    merged.insert(caption_flags.begin(), caption_flags.end());
    return merged;
}

corpus::DatasetManifest filter_dataset(const corpus::DatasetManifest& manifest,
                                       const std::set<std::string>& toxic_ids,
                                       std::string_view config_digest) {
    corpus::DatasetManifest out;
    out.name = manifest.name;
    out.language = manifest.language;
    out.provenance = manifest.provenance;
    out.records.reserve(manifest.records.size());
    size_t removed = 0;
    for (const auto& rec : manifest.records) {
        if (toxic_ids.count(rec.id)) ++removed;
        else out.records.push_back(rec);
    }
    corpus::append_provenance(out, "detox-filter",
                              config_digest.empty()
                                  ? util::sha256_hex("detox-filter:" + std::to_string(removed))
                                  : std::string(config_digest),
                              manifest.records.size(), out.records.size());
    return out;
}

}  // namespace langweave::toxicity
