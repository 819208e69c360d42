#include <doctest/doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "langweave/config.hpp"
#include "langweave/errors.hpp"

using namespace langweave;

namespace {

void write_text(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
}

}  // namespace

TEST_CASE("default config covers the seven standard targets") {
    auto cfg = config::default_config();
    CHECK(cfg.languages ==
          std::vector<std::string>{"zh", "fr", "es", "ru", "hi", "ja", "ar"});
    CHECK(cfg.source_language == "en");
    CHECK(cfg.sampling.k == 30);
    CHECK(cfg.sampling.bins == 3);
    CHECK(cfg.sampling.seed == 42);
    CHECK_FALSE(cfg.sampling.per_language);
    CHECK(cfg.verification_threshold == doctest::Approx(0.6));
    CHECK(cfg.toxicity.caption_threshold == doctest::Approx(0.80));
    CHECK(cfg.quality_filter.min_chars == 3);
    CHECK_FALSE(cfg.quality_filter.include_human_turns);
    CHECK(cfg.retry.max_attempts == 3);
    config::validate_config(cfg);  // must not throw
}

TEST_CASE("load_config parses nested sections and keeps defaults elsewhere") {
    testutil::TempDir td("cfg-load");
    write_text(td / "cfg.json", R"({
  "languages": ["ZH", "fr"],
  "sampling": {"k": 12, "seed": 7},
  "quality_filter": {"min_chars": 5},
  "toxicity": {"caption_threshold": 0.9, "extra_categories": ["spam"]},
  "retry": {"max_attempts": 2, "initial_backoff_ms": 50},
  "verification_threshold": 0.47,
  "concurrency": 4,
  "backends": {
    "prod": {"base_url": "http://translate.internal:8080", "auth_env": "PROD_TOKEN"}
  }
})");
    auto cfg = config::load_config(td / "cfg.json");
    CHECK(cfg.languages == std::vector<std::string>{"zh", "fr"});
    CHECK(cfg.sampling.k == 12);
    CHECK(cfg.sampling.seed == 7);
    CHECK(cfg.sampling.bins == 3);  // untouched default
    CHECK(cfg.quality_filter.min_chars == 5);
    CHECK(cfg.quality_filter.reject_control);
    CHECK(cfg.toxicity.caption_threshold == doctest::Approx(0.9));
    CHECK(cfg.toxicity.extra_categories == std::vector<std::string>{"spam"});
    CHECK(cfg.retry.max_attempts == 2);
    CHECK(cfg.retry.initial_backoff.count() == 50);
    CHECK(cfg.verification_threshold == doctest::Approx(0.47));
    CHECK(cfg.concurrency == 4);
    REQUIRE(cfg.backend_registry.count("prod") == 1);
    CHECK(cfg.backend_registry.at("prod").base_url == "http://translate.internal:8080");
    CHECK(cfg.backend_registry.at("prod").auth_env == "PROD_TOKEN");
    CHECK(cfg.backend_registry.at("prod").timeout.count() == 30000);
    CHECK_FALSE(cfg.digest.empty());
}

TEST_CASE("unknown top-level keys are rejected as typos") {
    testutil::TempDir td("cfg-unknown");
    write_text(td / "cfg.json", R"({"langauges": ["zh"]})");
    try {
        config::load_config(td / "cfg.json");
        FAIL("load_config should have thrown");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("langauges") != std::string::npos);
    }
}

TEST_CASE("malformed or non-object configs raise ConfigError") {
    testutil::TempDir td("cfg-bad");
    write_text(td / "broken.json", "{ not json");
    CHECK_THROWS_AS(config::load_config(td / "broken.json"), ConfigError);
    write_text(td / "array.json", "[1,2,3]");
    CHECK_THROWS_AS(config::load_config(td / "array.json"), ConfigError);
}

TEST_CASE("extra languages need display names; then they load") {
    testutil::TempDir td("cfg-extra");
    write_text(td / "missing.json", R"({
  "languages": ["tlh"],
  "extra_languages": ["tlh"]
})");
    CHECK_THROWS_AS(config::load_config(td / "missing.json"), ConfigError);

    write_text(td / "named.json", R"({
  "languages": ["tlh"],
  "extra_languages": ["tlh"],
  "language_names": {"tlh": "Klingon"}
})");
    auto cfg = config::load_config(td / "named.json");
    CHECK(cfg.languages == std::vector<std::string>{"tlh"});
    CHECK(cfg.language_names.at("tlh") == "Klingon");
}

TEST_CASE("validation errors") {
    auto cfg = config::default_config();

    SUBCASE("empty languages") {
        cfg.languages.clear();
        CHECK_THROWS_AS(config::validate_config(cfg), ConfigError);
    }
    SUBCASE("unsupported language") {
        cfg.languages = {"xx"};
        CHECK_THROWS_AS(config::validate_config(cfg), ConfigError);
    }
    SUBCASE("target equals source") {
        cfg.languages = {"en"};
        CHECK_THROWS_AS(config::validate_config(cfg), ConfigError);
    }
    SUBCASE("verification threshold out of range") {
        cfg.verification_threshold = 1.5;
        CHECK_THROWS_AS(config::validate_config(cfg), ConfigError);
    }
    SUBCASE("caption threshold out of range") {
        cfg.toxicity.caption_threshold = -0.1;
        CHECK_THROWS_AS(config::validate_config(cfg), ConfigError);
    }
    SUBCASE("zero bins") {
        cfg.sampling.bins = 0;
        CHECK_THROWS_AS(config::validate_config(cfg), ConfigError);
    }
    SUBCASE("zero retry attempts") {
        cfg.retry.max_attempts = 0;
        CHECK_THROWS_AS(config::validate_config(cfg), ConfigError);
    }
    SUBCASE("zero concurrency") {
        cfg.concurrency = 0;
        CHECK_THROWS_AS(config::validate_config(cfg), ConfigError);
    }
}

TEST_CASE("config digest is stable and tracks effective settings") {
    auto a = config::default_config();
    auto b = config::default_config();
    CHECK(config::config_digest(a) == config::config_digest(b));
    CHECK(config::config_digest(a).size() == 64);

    b.sampling.seed = 43;
    CHECK(config::config_digest(a) != config::config_digest(b));

    // two files with equal effective settings share the digest, regardless of
    // key order or formatting in the source document
    testutil::TempDir td("cfg-digest");
    write_text(td / "one.json", R"({"sampling": {"k": 9}, "concurrency": 2})");
    write_text(td / "two.json", "{\n  \"concurrency\": 2,\n  \"sampling\": {\"k\": 9}\n}\n");
    auto c1 = config::load_config(td / "one.json");
    auto c2 = config::load_config(td / "two.json");
    CHECK(c1.digest == c2.digest);
    CHECK(c1.digest == config::config_digest(c1));
}
