#include <doctest/doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "langweave/errors.hpp"
#include "langweave/preamble.hpp"

using namespace langweave;
using testutil::TempDir;

namespace {

preamble::PreambleTemplate minimal() {
    preamble::PreambleTemplate p;
    p.id = "p-min";
    p.instruction = "Translate the input to {language}.";
    return p;
}

}  // namespace

TEST_CASE("render_prompt with no optional sections is headers plus input") {
    std::string prompt = preamble::render_prompt(minimal(), "ja", "A red bus.");
    CHECK(prompt ==
          "## Instructions\n"
          "Translate the input to Japanese.\n"
          "\n"
          "Ensure that:\n"
          "\n"
          "Note:\n"
          "\n"
          "## Examples\n"
          "\n"
          "Input:\n"
          "A red bus.\n"
          "Expected Output:\n");
}

TEST_CASE("render_prompt emits the full skeleton in order") {
    preamble::PreambleTemplate p;
    p.id = "p-full";
    p.instruction = "You are an expert in translations. Translate the input to {language}.";
    p.considerations = {"Meaning is preserved.", "Names stay unchanged."};
    p.constraints = {"Output only the translation."};
    p.examples = {{"One dog.", "Un chien."}, {"Two cats.", "Deux chats."}};

    std::string prompt = preamble::render_prompt(p, "fr", "Three birds.");
    CHECK(prompt ==
          "## Instructions\n"
          "You are an expert in translations. Translate the input to French.\n"
          "\n"
          "Ensure that:\n"
          "- Meaning is preserved.\n"
          "- Names stay unchanged.\n"
          "\n"
          "Note: Output only the translation.\n"
          "\n"
          "## Examples\n"
          "### Example 1\n"
          "Input:\n"
          "One dog.\n"
          "Expected Output:\n"
          "Un chien.\n"
          "### Example 2\n"
          "Input:\n"
          "Two cats.\n"
          "Expected Output:\n"
          "Deux chats.\n"
          "\n"
          "Input:\n"
          "Three birds.\n"
          "Expected Output:\n");
}

TEST_CASE("render_prompt interpolates the language display name") {
    auto p = minimal();
    std::string prompt = preamble::render_prompt(p, "ja", "x");
    CHECK(prompt.find("Translate the input to Japanese.") != std::string::npos);
    CHECK(preamble::render_prompt(p, "zh", "x").find("Chinese") != std::string::npos);
    CHECK_THROWS_AS(preamble::render_prompt(p, "xx", "x"), ConfigError);
    // extension languages resolve through the extra name map
    CHECK(preamble::render_prompt(p, "xx", "x", {{"xx", "Xxish"}})
              .find("Xxish") != std::string::npos);
}

TEST_CASE("render_prompt is byte-deterministic") {
    auto p = minimal();
    CHECK(preamble::render_prompt(p, "ru", "Same input.") ==
          preamble::render_prompt(p, "ru", "Same input."));
}

TEST_CASE("load_preamble reads the fixture schema, id defaults to the stem") {
    TempDir dir("preamble");
    {
        std::ofstream f(dir / "fancy.json");
        f << R"({"instruction": "Translate to {language}.",
                 "considerations": ["c1"],
                 "constraints": ["k1"],
                 "examples": [{"input": "a", "expected_output": "b"}]})";
    }
    auto p = preamble::load_preamble(dir / "fancy.json");
    CHECK(p.id == "fancy");
    CHECK(p.considerations == std::vector<std::string>{"c1"});
    CHECK(p.constraints == std::vector<std::string>{"k1"});
    REQUIRE(p.examples.size() == 1);
    CHECK(p.examples[0].first == "a");
    CHECK(p.examples[0].second == "b");
}

TEST_CASE("load_preamble_dir loads sorted, unique ids, rejects empty dirs") {
    TempDir dir("predir");
    for (const char* name : {"b.json", "a.json"}) {
        std::ofstream f(dir / name);
        f << R"({"instruction": "T {language}."})";
    }
    auto all = preamble::load_preamble_dir(dir.path());
    REQUIRE(all.size() == 2);
    CHECK(all[0].id == "a");
    CHECK(all[1].id == "b");

    {
        std::ofstream f(dir / "c.json");
        f << R"({"id": "a", "instruction": "dup {language}"})";
    }
    CHECK_THROWS_AS(preamble::load_preamble_dir(dir.path()), ValidationError);

    TempDir empty("predir-empty");
    CHECK_THROWS_AS(preamble::load_preamble_dir(empty.path()), ConfigError);
    CHECK_THROWS_AS(preamble::load_preamble_dir(empty / "missing"), ConfigError);
}

TEST_CASE("missing instruction is rejected") {
    TempDir dir("prebad");
    {
        std::ofstream f(dir / "bad.json");
        f << R"({"considerations": ["no instruction"]})";
    }
    CHECK_THROWS_AS(preamble::load_preamble(dir / "bad.json"), ValidationError);
}

TEST_CASE("the shipped preamble fixtures load and render") {
    auto dir = std::filesystem::path(__FILE__).parent_path().parent_path() / "preambles";
    REQUIRE(std::filesystem::is_directory(dir));
    auto all = preamble::load_preamble_dir(dir);
    CHECK(all.size() == 6);
    for (const auto& p : all) {
        std::string prompt = preamble::render_prompt(p, "hi", "A test caption.");
        CHECK(prompt.find("## Instructions\n") == 0);
        CHECK(prompt.rfind("\nExpected Output:\n") == prompt.size() - 18);
        CHECK(prompt.find("Hindi") != std::string::npos);
    }
}

TEST_CASE("language display names cover the eight built-ins") {
    CHECK(preamble::language_display_name("en", {}) == "English");
    CHECK(preamble::language_display_name("zh", {}) == "Chinese");
    CHECK(preamble::language_display_name("fr", {}) == "French");
    CHECK(preamble::language_display_name("es", {}) == "Spanish");
    CHECK(preamble::language_display_name("ru", {}) == "Russian");
    CHECK(preamble::language_display_name("hi", {}) == "Hindi");
    CHECK(preamble::language_display_name("ja", {}) == "Japanese");
    CHECK(preamble::language_display_name("ar", {}) == "Arabic");
    CHECK_THROWS_AS(preamble::language_display_name("xx", {}), ConfigError);
}
