#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "langweave/corpus.hpp"

namespace langweave::assemble {

struct MultilingualBundle {
    std::map<std::string, corpus::DatasetManifest> variants;  // language -> manifest
    bool toxicity_filtered = false;
    uint64_t total_records = 0;
};

// Validates that every language carries the identical id set; a mismatch
// throws ValidationError naming up to 10 differing ids per side.
MultilingualBundle merge_languages(std::map<std::string, corpus::DatasetManifest> manifests,
                                   bool toxicity_filtered = false);

// One manifest file per language (manifest_<lang>.json + provenance sidecar)
// plus bundle.json: languages, per-language counts, total, provenance digests.
void write_bundle(const MultilingualBundle& bundle, const std::filesystem::path& dir);

MultilingualBundle load_bundle(const std::filesystem::path& dir);

// Everything a report needs, collected from stage outputs. All values are
// re-derivable from the corresponding artifacts.
struct RunReport {
    std::map<std::string, uint64_t> per_language_counts;
    std::map<std::string, uint64_t> exclusion_reasons;       // extract-filter tallies
    std::map<std::string, size_t> image_category_counts;     // image findings histogram
    std::map<std::string, size_t> caption_category_counts;   // caption flags histogram
    uint64_t flagged_images = 0;
    uint64_t confirmed_images = 0;
    uint64_t caption_flags = 0;
    uint64_t merged_toxic = 0;
    uint64_t removed_records = 0;
    uint64_t remaining_records = 0;
    uint64_t verification_pass = 0;
    uint64_t verification_flagged = 0;
};

// Writes report.json plus CSV tables (per-language counts, exclusion reasons,
// category histograms). Pure function of its inputs; with pinned time the
// bytes are reproducible.
void emit_reports(const RunReport& report, const std::filesystem::path& out_dir);

RunReport read_report(const std::filesystem::path& out_dir);

}  // namespace langweave::assemble
