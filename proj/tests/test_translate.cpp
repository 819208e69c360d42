#include <doctest/doctest.h>

#include <atomic>
#include <fstream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "langweave/backends.hpp"
#include "langweave/checkpoint.hpp"
#include "langweave/errors.hpp"
#include "langweave/metrics.hpp"
#include "langweave/translate.hpp"
#include "langweave/util.hpp"

using namespace langweave;
using json = nlohmann::ordered_json;

namespace {

corpus::TranslationUnit unit_of(const std::string& id, const std::string& text,
                                const std::string& target = "zh") {
    corpus::TranslationUnit u;
    u.record_id = id;
    u.turn_index = 1;
    u.source_text = text;
    u.source_language = "en";
    u.target_language = target;
    u.content_hash = corpus::content_hash(text, target);
    return u;
}

// Counts calls passing through to an inner backend.
class CountingBackend : public backends::TranslationBackend {
public:
    explicit CountingBackend(std::unique_ptr<backends::TranslationBackend> inner)
        : inner_(std::move(inner)) {}
    std::string name() const override { return inner_->name(); }
    std::string translate(const backends::TranslateRequest& req) override {
        ++calls;
        return inner_->translate(req);
    }
    std::atomic<size_t> calls{0};

private:
    std::unique_ptr<backends::TranslationBackend> inner_;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

backends::RetryPolicy fast_policy(size_t attempts) {
    backends::RetryPolicy pol;
    pol.max_attempts = attempts;
    pol.initial_backoff = std::chrono::milliseconds(1);
    return pol;
}

}  // namespace

TEST_CASE("mask_placeholder leaves plain text alone") {
    auto m = translate::mask_placeholder("A red bus.");
    CHECK_FALSE(m.had_placeholder);
    CHECK(m.text == "A red bus.");
    CHECK(translate::restore_placeholder(m, "X Y") == "X Y");
}

TEST_CASE("mask_placeholder keeps a leading placeholder with its whitespace") {
    auto m = translate::mask_placeholder("<image>\nDescribe the picture.");
    CHECK(m.had_placeholder);
    CHECK(m.leading);
    CHECK(m.affix == "<image>\n");
    CHECK(m.text == "Describe the picture.");
    CHECK(translate::restore_placeholder(m, "X") == "<image>\nX");
}

TEST_CASE("mask_placeholder treats whitespace-then-placeholder as leading") {
    auto m = translate::mask_placeholder("  <image>  \n Hello");
    CHECK(m.had_placeholder);
    CHECK(m.leading);
    CHECK(m.affix == "  <image>  \n ");
    CHECK(m.text == "Hello");
    CHECK(translate::restore_placeholder(m, "Bonjour") == "  <image>  \n Bonjour");
}

TEST_CASE("mask_placeholder reattaches a trailing placeholder at the end") {
    auto m = translate::mask_placeholder("A cat. <image>");
    CHECK(m.had_placeholder);
    CHECK_FALSE(m.leading);
    CHECK(m.affix == " <image>");
    CHECK(m.text == "A cat.");
    CHECK(translate::restore_placeholder(m, "Un chat.") == "Un chat. <image>");
}

TEST_CASE("mask_placeholder moves a mid-text placeholder to the end") {
    auto m = translate::mask_placeholder("before <image> after");
    CHECK(m.had_placeholder);
    CHECK_FALSE(m.leading);
    CHECK(m.affix == " <image>");
    CHECK(m.text == "before after");
    CHECK(translate::restore_placeholder(m, "avant apres") == "avant apres <image>");
}

TEST_CASE("mask_placeholder on a placeholder-only value") {
    auto m = translate::mask_placeholder("<image>");
    CHECK(m.had_placeholder);
    CHECK(m.leading);
    CHECK(m.affix == "<image>");
    CHECK(m.text.empty());
    CHECK(translate::restore_placeholder(m, "") == "<image>");
}

TEST_CASE("leading and trailing masks round-trip under identity translation") {
    for (const std::string src : {"<image>\nHi there.", "Tail case <image>",
                                  "plain text only", "<image>   spaced out"}) {
        auto m = translate::mask_placeholder(src);
        CHECK(translate::restore_placeholder(m, m.text) == src);
    }
}

TEST_CASE("count_placeholders") {
    CHECK(translate::count_placeholders("") == 0);
    CHECK(translate::count_placeholders("no tags here") == 0);
    CHECK(translate::count_placeholders("<image>\nx") == 1);
    CHECK(translate::count_placeholders("<image><image>") == 2);
    CHECK(translate::count_placeholders("a <image> b <image> c") == 2);
}

TEST_CASE("default_preamble renders with the target language filled in") {
    const auto& pre = translate::default_preamble();
    CHECK(pre.id == "builtin-default");
    std::string prompt = preamble::render_prompt(pre, "zh", "A red bus.");
    CHECK(prompt.find("translate the input\nto Chinese in") == std::string::npos);
    CHECK(prompt.find("Chinese") != std::string::npos);
    CHECK(prompt.find("{language}") == std::string::npos);
    CHECK(prompt.find("Input:\nA red bus.\nExpected Output:\n") != std::string::npos);
}

TEST_CASE("translate_batch over no units does nothing") {
    testutil::TempDir td("tb-empty");
    checkpoint::Checkpoint ckpt(td / "ckpt.jsonl");
    auto backend = backends::make_mock_translator("bijective");
    auto res = translate::translate_batch({}, *backend, translate::default_preamble(), ckpt);
    CHECK(res.translations.empty());
    CHECK(res.failed_hashes.empty());
    CHECK(res.backend_calls == 0);
    CHECK(res.reused_from_checkpoint == 0);
}

TEST_CASE("translate_batch rejects mixed target languages") {
    testutil::TempDir td("tb-mixed");
    checkpoint::Checkpoint ckpt(td / "ckpt.jsonl");
    auto backend = backends::make_mock_translator("bijective");
    std::vector<corpus::TranslationUnit> units = {unit_of("a", "one", "zh"),
                                                  unit_of("b", "two", "fr")};
    CHECK_THROWS_AS(
        translate::translate_batch(units, *backend, translate::default_preamble(), ckpt),
        ValidationError);
}

TEST_CASE("translate_batch returns input order and restores placeholders") {
    testutil::TempDir td("tb-order");
    checkpoint::Checkpoint ckpt(td / "ckpt.jsonl");
    auto backend = backends::make_mock_translator("bijective");

    std::vector<corpus::TranslationUnit> units;
    units.push_back(unit_of("r1", "<image>\nA red bus."));
    units.push_back(unit_of("r2", "Small dog runs."));
    units.push_back(unit_of("r3", "Tall trees. <image>"));
    units.push_back(unit_of("r4", "Blue sky above."));

    auto res = translate::translate_batch(units, *backend, translate::default_preamble(), ckpt);
    REQUIRE(res.translations.size() == 4);
    CHECK(res.failed_hashes.empty());
    CHECK(res.backend_calls == 4);
    for (size_t i = 0; i < units.size(); ++i)
        CHECK(res.translations[i].unit.record_id == units[i].record_id);

    CHECK(res.translations[0].target_text == "<image>\n⟦zh⟧A ⟦zh⟧red ⟦zh⟧bus.");
    CHECK(res.translations[2].target_text == "⟦zh⟧Tall ⟦zh⟧trees. <image>");
    for (const auto& t : res.translations) {
        CHECK(t.target_text.find("⟦zh⟧") != std::string::npos);
        CHECK(t.backend_name == "bijective");
        CHECK(t.attempt == 1);
    }
    CHECK(ckpt.done_count() == 4);
}

TEST_CASE("translate_batch reuses the checkpoint instead of calling again") {
    testutil::TempDir td("tb-reuse");
    std::vector<corpus::TranslationUnit> units;
    for (int i = 0; i < 6; ++i)
        units.push_back(unit_of("r" + std::to_string(i), "caption number " + std::to_string(i)));

    checkpoint::Checkpoint ckpt(td / "ckpt.jsonl");
    CountingBackend backend(backends::make_mock_translator("bijective"));

    std::vector<corpus::TranslationUnit> first3(units.begin(), units.begin() + 3);
    auto res1 = translate::translate_batch(first3, backend, translate::default_preamble(), ckpt);
    CHECK(res1.translations.size() == 3);
    CHECK(backend.calls == 3);

    auto res2 = translate::translate_batch(units, backend, translate::default_preamble(), ckpt);
    CHECK(res2.translations.size() == 6);
    CHECK(res2.reused_from_checkpoint == 3);
    CHECK(backend.calls == 6);
    for (size_t i = 0; i < units.size(); ++i)
        CHECK(res2.translations[i].unit.content_hash == units[i].content_hash);
}

TEST_CASE("duplicate hashes cost one backend call and share the result") {
    testutil::TempDir td("tb-dup");
    checkpoint::Checkpoint ckpt(td / "ckpt.jsonl");
    CountingBackend backend(backends::make_mock_translator("bijective"));

    std::vector<corpus::TranslationUnit> units;
    units.push_back(unit_of("a", "same caption text"));
    units.push_back(unit_of("b", "different caption"));
    units.push_back(unit_of("c", "same caption text"));  // hash equals unit a
    REQUIRE(units[0].content_hash == units[2].content_hash);

    translate::BatchOptions opt;
    opt.concurrency = 1;
    auto res = translate::translate_batch(units, backend, translate::default_preamble(), ckpt,
                                          {}, opt);
    REQUIRE(res.translations.size() == 3);
    CHECK(backend.calls == 2);
    CHECK(ckpt.done_count() == 2);
    CHECK(res.translations[0].target_text == res.translations[2].target_text);
    CHECK(res.translations[0].unit.record_id == "a");
    CHECK(res.translations[2].unit.record_id == "c");
}

TEST_CASE("flaky backend recovers through retries") {
    testutil::TempDir td("tb-flaky");
    checkpoint::Checkpoint ckpt(td / "ckpt.jsonl");
    auto backend = backends::make_mock_translator("flaky:2");

    std::vector<corpus::TranslationUnit> units;
    for (int i = 0; i < 5; ++i)
        units.push_back(unit_of("r" + std::to_string(i), "flaky caption " + std::to_string(i)));

    translate::BatchOptions opt;
    opt.concurrency = 1;
    opt.debug_log = td / "debug.jsonl";
    auto res = translate::translate_batch(units, *backend, translate::default_preamble(), ckpt,
                                          fast_policy(3), opt);
    CHECK(res.translations.size() == 5);
    CHECK(res.failed_hashes.empty());
    // every even-numbered call throws, so the 5 successes land on calls 1..9
    CHECK(res.backend_calls == 9);
    CHECK(res.retries == 4);

    // compare against an untroubled bijective run: same texts either way
    testutil::TempDir td2("tb-flaky-ref");
    checkpoint::Checkpoint ckpt2(td2 / "ckpt.jsonl");
    auto clean = backends::make_mock_translator("bijective");
    auto ref = translate::translate_batch(units, *clean, translate::default_preamble(), ckpt2);
    REQUIRE(ref.translations.size() == 5);
    for (size_t i = 0; i < 5; ++i)
        CHECK(res.translations[i].target_text == ref.translations[i].target_text);

    // debug log has one parseable line per call with ok/error status
    auto lines = util::read_lines(td / "debug.jsonl");
    size_t ok = 0, err = 0;
    for (const auto& line : lines) {
        if (line.empty()) continue;
        json j = json::parse(line);
        CHECK(j.at("event") == "translate");
        std::string status = j.at("status").get<std::string>();
        if (status == "ok") ++ok;
        else if (status == "error") ++err;
    }
    CHECK(ok == 5);
    CHECK(err == 4);
}

TEST_CASE("a backend that always fails leaves failed entries, not done ones") {
    testutil::TempDir td("tb-dead");
    checkpoint::Checkpoint ckpt(td / "ckpt.jsonl");
    auto backend = backends::make_mock_translator("flaky:1");

    std::vector<corpus::TranslationUnit> units = {unit_of("a", "first text"),
                                                  unit_of("b", "second text")};
    auto res = translate::translate_batch(units, *backend, translate::default_preamble(), ckpt,
                                          fast_policy(2));
    CHECK(res.translations.empty());
    REQUIRE(res.failed_hashes.size() == 2);
    CHECK(res.backend_calls == 4);
    CHECK(ckpt.done_count() == 0);
    CHECK(ckpt.failed_count() == 2);
    CHECK(ckpt.is_failed(units[0].content_hash));

    // a later run with a working backend clears the failures
    auto good = backends::make_mock_translator("bijective");
    auto res2 = translate::translate_batch(units, *good, translate::default_preamble(), ckpt);
    CHECK(res2.translations.size() == 2);
    CHECK(res2.failed_hashes.empty());
    CHECK(ckpt.done_count() == 2);
}

TEST_CASE("interrupted and clean runs emit byte-identical translations files") {
    std::vector<corpus::TranslationUnit> units;
    for (int i = 0; i < 8; ++i)
        units.push_back(unit_of("rec-" + std::to_string(i),
                                "caption " + std::to_string(i) + " with words"));

    testutil::TempDir td("tb-bytes");
    auto backend = backends::make_mock_translator("bijective");

    // run one: first half, then reopen the checkpoint and finish
    {
        checkpoint::Checkpoint ckpt(td / "a.jsonl");
        std::vector<corpus::TranslationUnit> half(units.begin(), units.begin() + 4);
        translate::translate_batch(half, *backend, translate::default_preamble(), ckpt);
    }
    checkpoint::Checkpoint resumed(td / "a.jsonl");
    CHECK(resumed.done_count() == 4);
    auto resa = translate::translate_batch(units, *backend, translate::default_preamble(), resumed);
    translate::write_translations_jsonl(resa.translations, td / "a_out.jsonl");

    // run two: uninterrupted
    checkpoint::Checkpoint fresh(td / "b.jsonl");
    auto resb = translate::translate_batch(units, *backend, translate::default_preamble(), fresh);
    translate::write_translations_jsonl(resb.translations, td / "b_out.jsonl");

    CHECK(slurp(td / "a_out.jsonl") == slurp(td / "b_out.jsonl"));
}

TEST_CASE("resume keeps only pending units, in input order") {
    testutil::TempDir td("tb-resume");
    checkpoint::Checkpoint ckpt(td / "ckpt.jsonl");
    std::vector<corpus::TranslationUnit> units;
    for (int i = 0; i < 10; ++i)
        units.push_back(unit_of("r" + std::to_string(i), "resume text " + std::to_string(i)));
    for (size_t i : {1u, 4u, 7u})
        ckpt.record_done(units[i].content_hash, "done", "test", 1);

    auto pending = translate::resume(ckpt, units);
    REQUIRE(pending.size() == 7);
    std::vector<std::string> ids;
    for (const auto& u : pending) ids.push_back(u.record_id);
    CHECK(ids == std::vector<std::string>{"r0", "r2", "r3", "r5", "r6", "r8", "r9"});
}

TEST_CASE("back_translate_verify round-trips the bijective mock at similarity 1") {
    auto backend = backends::make_mock_translator("bijective");
    testutil::TempDir td("verify-bij");
    checkpoint::Checkpoint ckpt(td / "ckpt.jsonl");

    std::vector<corpus::TranslationUnit> units = {
        unit_of("a", "<image>\nA red bus stops near the tall gate."),
        unit_of("b", "Small dog runs fast."),
        unit_of("c", "Quiet rivers bend around old stones.")};
    auto batch = translate::translate_batch(units, *backend, translate::default_preamble(), ckpt);
    REQUIRE(batch.translations.size() == 3);

    for (const auto& t : batch.translations) {
        auto v = translate::back_translate_verify(t, *backend, 0.6);
        REQUIRE(v.similarity.has_value());
        CHECK(*v.similarity == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(v.status == "pass");
        CHECK(v.unit.record_id == t.unit.record_id);
    }
}

TEST_CASE("very short texts round-trip below 1.0 because high orders smooth") {
    auto backend = backends::make_mock_translator("bijective");
    testutil::TempDir td("verify-short");
    checkpoint::Checkpoint ckpt(td / "ckpt.jsonl");

    std::vector<corpus::TranslationUnit> units = {unit_of("a", "Hi.")};
    auto batch = translate::translate_batch(units, *backend, translate::default_preamble(), ckpt);
    REQUIRE(batch.translations.size() == 1);

    auto v = translate::back_translate_verify(batch.translations[0], *backend, 0.6);
    REQUIRE(v.similarity.has_value());
    // an exact 2-token round trip: orders 3 and 4 fall back to the epsilon floor
    auto toks = metrics::tokenize("Hi.", "en");
    double expected = testutil::oracle_avg_ngram_bleu(toks, {toks});
    CHECK(*v.similarity == doctest::Approx(expected).epsilon(1e-12));
    CHECK(*v.similarity < 0.6);
    CHECK(v.status == "flagged");
}

TEST_CASE("back_translate_verify honors the threshold boundary") {
    auto backend = backends::make_mock_translator("identity");
    translate::Translation t;
    t.unit = unit_of("a", "word one two three");
    t.target_text = "word one two three";  // identity back-translation scores 1.0
    auto v = translate::back_translate_verify(t, *backend, 1.0);
    REQUIRE(v.similarity.has_value());
    CHECK(*v.similarity == doctest::Approx(1.0));
    CHECK(v.status == "pass");  // pass at exactly the threshold

    // a lossy target loses tokens on the way back
    translate::Translation worse;
    worse.unit = unit_of("b", "alpha beta gamma delta epsilon zeta");
    worse.target_text = "alpha beta";
    auto w = translate::back_translate_verify(worse, *backend, 0.9);
    REQUIRE(w.similarity.has_value());
    CHECK(*w.similarity < 0.9);
    CHECK(w.status == "flagged");
}

TEST_CASE("back_translate_verify edge cases around empty text") {
    auto backend = backends::make_mock_translator("identity");

    translate::Translation both_empty;
    both_empty.unit = unit_of("a", "");
    both_empty.target_text = "";
    auto v1 = translate::back_translate_verify(both_empty, *backend, 0.6);
    REQUIRE(v1.similarity.has_value());
    CHECK(*v1.similarity == doctest::Approx(1.0));
    CHECK(v1.status == "pass");

    translate::Translation lost_all;
    lost_all.unit = unit_of("b", "hello there");
    lost_all.target_text = "";
    auto v2 = translate::back_translate_verify(lost_all, *backend, 0.6);
    REQUIRE(v2.similarity.has_value());
    CHECK(*v2.similarity == doctest::Approx(0.0));
    CHECK(v2.status == "flagged");
}

TEST_CASE("back_translation failure flags the unit with no similarity") {
    auto backend = backends::make_mock_translator("flaky:1");
    translate::Translation t;
    t.unit = unit_of("a", "some source text");
    t.target_text = "some target text";
    auto v = translate::back_translate_verify(t, *backend, 0.6, nullptr, fast_policy(2));
    CHECK_FALSE(v.similarity.has_value());
    CHECK(v.status == "flagged");
}

TEST_CASE("verify_batch preserves order under concurrency") {
    auto backend = backends::make_mock_translator("bijective");
    testutil::TempDir td("verify-batch");
    checkpoint::Checkpoint ckpt(td / "ckpt.jsonl");

    std::vector<corpus::TranslationUnit> units;
    for (int i = 0; i < 10; ++i)
        units.push_back(unit_of("r" + std::to_string(i),
                                "caption " + std::to_string(i) + " has several words"));
    auto batch = translate::translate_batch(units, *backend, translate::default_preamble(), ckpt);
    auto results = translate::verify_batch(batch.translations, *backend, 0.6, nullptr, {}, 4);
    REQUIRE(results.size() == 10);
    for (size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].unit.record_id == units[i].record_id);
        CHECK(results[i].status == "pass");
    }
}

TEST_CASE("translations JSON lines round-trip") {
    std::vector<translate::Translation> ts;
    translate::Translation t1;
    t1.unit = unit_of("rec-1", "<image>\nA cat sat.", "ja");
    t1.target_text = "<image>\n猫が座った。";
    t1.backend_name = "bijective";
    t1.attempt = 2;
    t1.created_at = "2026-01-01T00:00:00Z";
    translate::Translation t2;
    t2.unit = unit_of("rec-2", "Plain words here.", "ja");
    t2.target_text = "tagged output";
    t2.backend_name = "identity";
    ts = {t1, t2};

    testutil::TempDir td("jsonl-rt");
    translate::write_translations_jsonl(ts, td / "t.jsonl");
    auto back = translate::read_translations_jsonl(td / "t.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].unit.record_id == "rec-1");
    CHECK(back[0].unit.turn_index == 1);
    CHECK(back[0].unit.content_hash == t1.unit.content_hash);
    CHECK(back[0].unit.source_language == "en");
    CHECK(back[0].unit.target_language == "ja");
    CHECK(back[0].unit.source_text == "<image>\nA cat sat.");
    CHECK(back[0].target_text == t1.target_text);
    CHECK(back[0].backend_name == "bijective");
    CHECK(back[1].target_text == "tagged output");

    // volatile fields stay out of the file so resumed runs stay byte-stable
    auto lines = util::read_lines(td / "t.jsonl");
    REQUIRE(lines.size() >= 2);
    json j = json::parse(lines[0]);
    CHECK_FALSE(j.contains("attempt"));
    CHECK_FALSE(j.contains("created_at"));
}

TEST_CASE("review queue keeps flagged rows only, with null similarity when absent") {
    std::vector<translate::VerificationResult> results(3);
    results[0].unit = unit_of("ok", "fine text");
    results[0].target_text = "fine";
    results[0].similarity = 0.91;
    results[0].status = "pass";
    results[1].unit = unit_of("low", "poor text");
    results[1].target_text = "poor";
    results[1].back_text = "unrelated";
    results[1].similarity = 0.12;
    results[1].status = "flagged";
    results[2].unit = unit_of("err", "broken text");
    results[2].target_text = "broken";
    results[2].status = "flagged";  // backend failed: no similarity at all

    testutil::TempDir td("review-q");
    translate::write_review_queue(results, td / "review.jsonl");
    auto lines = util::read_lines(td / "review.jsonl");
    std::vector<json> rows;
    for (const auto& line : lines)
        if (!line.empty()) rows.push_back(json::parse(line));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].at("record_id") == "low");
    CHECK(rows[0].at("similarity").get<double>() == doctest::Approx(0.12));
    CHECK(rows[1].at("record_id") == "err");
    CHECK(rows[1].at("similarity").is_null());
    for (const auto& r : rows) CHECK(r.at("status") == "flagged");
}
