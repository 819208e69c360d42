#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "langweave/assemble.hpp"
#include "langweave/backends.hpp"
#include "langweave/corpus.hpp"
#include "langweave/errors.hpp"
#include "langweave/metrics.hpp"
#include "langweave/preamble.hpp"
#include "langweave/sampling.hpp"
#include "langweave/toxicity.hpp"
#include "langweave/translate.hpp"
#include "langweave/util.hpp"

namespace py = pybind11;

using namespace langweave;

namespace {

metrics::Smoothing smoothing_from_string(const std::string& s) {
    if (s == "none") return metrics::Smoothing::none;
    if (s == "add_epsilon") return metrics::Smoothing::add_epsilon;
    throw ConfigError("unknown smoothing policy '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multilingual dataset curation toolkit (C++ core)";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<BackendError>(m, "BackendError", PyExc_RuntimeError);

    // metrics
    py::class_<metrics::BleuBreakdown>(m, "BleuBreakdown")
        .def_readonly("precisions", &metrics::BleuBreakdown::precisions)
        .def_readonly("smoothed", &metrics::BleuBreakdown::smoothed)
        .def_readonly("weights", &metrics::BleuBreakdown::weights)
        .def_readonly("brevity_penalty", &metrics::BleuBreakdown::brevity_penalty)
        .def_readonly("score", &metrics::BleuBreakdown::score)
        .def_readonly("hyp_length", &metrics::BleuBreakdown::hyp_length)
        .def_readonly("ref_length", &metrics::BleuBreakdown::ref_length)
        .def_readonly("empty_hyp", &metrics::BleuBreakdown::empty_hyp);

    py::class_<metrics::LengthStats>(m, "LengthStats")
        .def_readonly("characters", &metrics::LengthStats::characters)
        .def_readonly("words", &metrics::LengthStats::words)
        .def_readonly("sentences", &metrics::LengthStats::sentences)
        .def_readonly("syllables", &metrics::LengthStats::syllables);

    m.def("tokenize", &metrics::tokenize, py::arg("text"), py::arg("language") = "en");
    m.def("modified_precision", &metrics::modified_precision, py::arg("hyp"),
          py::arg("refs"), py::arg("n"));
    m.def(
        "bleu",
        [](const std::vector<std::string>& hyp,
           const std::vector<std::vector<std::string>>& refs, size_t max_n,
           const std::string& smoothing, double epsilon) {
            return metrics::bleu(hyp, refs, max_n, smoothing_from_string(smoothing), epsilon);
        },
        py::arg("hyp"), py::arg("refs"), py::arg("max_n") = 4,
        py::arg("smoothing") = "add_epsilon", py::arg("epsilon") = metrics::kBleuEpsilon);
    m.def("avg_ngram_bleu", &metrics::avg_ngram_bleu, py::arg("hyp"), py::arg("refs"));
    m.def("flesch_reading_ease", &metrics::flesch_reading_ease, py::arg("text"));
    m.def("fkgl", &metrics::fkgl, py::arg("text"));
    m.def("length_analysis", &metrics::length_analysis, py::arg("text"));

    // corpus
    py::class_<corpus::ConversationTurn>(m, "ConversationTurn")
        .def_readonly("role", &corpus::ConversationTurn::from)
        .def_readonly("value", &corpus::ConversationTurn::value);

    py::class_<corpus::ImageTextRecord>(m, "ImageTextRecord")
        .def_readonly("id", &corpus::ImageTextRecord::id)
        .def_readonly("image", &corpus::ImageTextRecord::image)
        .def_readonly("conversations", &corpus::ImageTextRecord::conversations);

    py::class_<corpus::DatasetManifest>(m, "DatasetManifest")
        .def_readonly("name", &corpus::DatasetManifest::name)
        .def_readonly("language", &corpus::DatasetManifest::language)
        .def_readonly("records", &corpus::DatasetManifest::records)
        .def("__len__",
             [](const corpus::DatasetManifest& mf) { return mf.records.size(); })
        .def("record_ids", [](const corpus::DatasetManifest& mf) {
            std::vector<std::string> ids;
            ids.reserve(mf.records.size());
            for (const auto& r : mf.records) ids.push_back(r.id);
            return ids;
        });

    py::class_<corpus::TranslationUnit>(m, "TranslationUnit")
        .def_readonly("record_id", &corpus::TranslationUnit::record_id)
        .def_readonly("turn_index", &corpus::TranslationUnit::turn_index)
        .def_readonly("source_text", &corpus::TranslationUnit::source_text)
        .def_readonly("source_language", &corpus::TranslationUnit::source_language)
        .def_readonly("target_language", &corpus::TranslationUnit::target_language)
        .def_readonly("content_hash", &corpus::TranslationUnit::content_hash);

    m.def("load_manifest", &corpus::load_manifest, py::arg("path"),
          py::arg("language") = "en");
    m.def("save_manifest", &corpus::save_manifest, py::arg("manifest"), py::arg("path"));
    m.def(
        "extract_targets",
        [](const corpus::DatasetManifest& manifest, const std::string& target,
           size_t min_chars, bool include_human_turns) {
            corpus::QualityFilterConfig f;
            f.min_chars = min_chars;
            f.include_human_turns = include_human_turns;
            return corpus::extract_targets(manifest, target, f);
        },
        py::arg("manifest"), py::arg("target"), py::arg("min_chars") = 3,
        py::arg("include_human_turns") = false);
    m.def("content_hash", &corpus::content_hash, py::arg("source_text"),
          py::arg("target_language"));

    // sampling
    py::class_<sampling::StratumAssignment>(m, "StratumAssignment")
        .def_readonly("record_id", &sampling::StratumAssignment::record_id)
        .def_readonly("la_bin", &sampling::StratumAssignment::la_bin)
        .def_readonly("fre_bin", &sampling::StratumAssignment::fre_bin)
        .def_readonly("fkgl_bin", &sampling::StratumAssignment::fkgl_bin)
        .def_readonly("stratum_key", &sampling::StratumAssignment::stratum_key);

    m.def(
        "stratify",
        [](const corpus::DatasetManifest& manifest, size_t bins) {
            return sampling::stratify(manifest, bins).assignments;
        },
        py::arg("manifest"), py::arg("bins") = 3);
    m.def("sample_representative", &sampling::sample_representative, py::arg("manifest"),
          py::arg("k"), py::arg("seed"), py::arg("bins") = 3);

    // preamble + prompt rendering
    py::class_<preamble::PreambleTemplate>(m, "PreambleTemplate")
        .def(py::init([](const std::string& id, const std::string& instruction,
                         const std::vector<std::string>& considerations,
                         const std::vector<std::string>& constraints,
                         const std::vector<std::pair<std::string, std::string>>& examples) {
                 preamble::PreambleTemplate p;
                 p.id = id;
                 p.instruction = instruction;
                 p.considerations = considerations;
                 p.constraints = constraints;
                 p.examples = examples;
                 preamble::validate_preamble(p);
                 return p;
             }),
             py::arg("id"), py::arg("instruction"),
             py::arg("considerations") = std::vector<std::string>{},
             py::arg("constraints") = std::vector<std::string>{},
             py::arg("examples") = std::vector<std::pair<std::string, std::string>>{})
        .def_readonly("id", &preamble::PreambleTemplate::id)
        .def_readonly("instruction", &preamble::PreambleTemplate::instruction)
        .def_readonly("considerations", &preamble::PreambleTemplate::considerations)
        .def_readonly("constraints", &preamble::PreambleTemplate::constraints)
        .def_readonly("examples", &preamble::PreambleTemplate::examples);

    m.def("load_preamble", &preamble::load_preamble, py::arg("path"));
    m.def(
        "render_prompt",
        [](const preamble::PreambleTemplate& pre, const std::string& target_language,
           const std::string& input_text) {
            return preamble::render_prompt(pre, target_language, input_text);
        },
        py::arg("preamble"), py::arg("target_language"), py::arg("input_text"));
    m.def("language_display_name",
          [](const std::string& code) { return preamble::language_display_name(code); },
          py::arg("code"));

    // translation via named mock backend (remote backends stay CLI territory)
    m.def(
        "translate_text",
        [](const std::string& backend_spec, const preamble::PreambleTemplate& pre,
           const std::string& target_language, const std::string& text) {
            auto backend = backends::make_mock_translator(backend_spec);
            translate::MaskedText masked = translate::mask_placeholder(text);
            backends::TranslateRequest req;
            req.prompt = preamble::render_prompt(pre, target_language, masked.text);
            req.target_language = target_language;
            return translate::restore_placeholder(masked, backend->translate(req));
        },
        py::arg("backend"), py::arg("preamble"), py::arg("target_language"), py::arg("text"));
    m.def("count_placeholders", &translate::count_placeholders, py::arg("text"));
    m.def("default_preamble", &translate::default_preamble,
          py::return_value_policy::copy);

    // toxicity set algebra
    m.def("merge_flags", &toxicity::merge_flags, py::arg("confirmed"),
          py::arg("caption_flags"));
    m.def(
        "filter_dataset",
        [](const corpus::DatasetManifest& manifest, const std::set<std::string>& toxic) {
            return toxicity::filter_dataset(manifest, toxic);
        },
        py::arg("manifest"), py::arg("toxic_ids"));

    m.def("sha256_hex", &util::sha256_hex, py::arg("data"));
    m.attr("__version__") = "0.1.0";
}
