#include "langweave/assemble.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "langweave/errors.hpp"
#include "langweave/util.hpp"

namespace langweave::assemble {

using json = nlohmann::ordered_json;

MultilingualBundle merge_languages(std::map<std::string, corpus::DatasetManifest> manifests,
                                   bool toxicity_filtered) {
    if (manifests.empty()) throw ValidationError("merge_languages needs at least one manifest");

    const auto& [first_lang, first_manifest] = *manifests.begin();
    std::set<std::string> base_ids;
    for (const auto& r : first_manifest.records) base_ids.insert(r.id);

    for (const auto& [lang, manifest] : manifests) {
        std::set<std::string> ids;
        for (const auto& r : manifest.records) ids.insert(r.id);
        if (ids == base_ids) continue;

        std::vector<std::string> missing, extra;
        std::set_difference(base_ids.begin(), base_ids.end(), ids.begin(), ids.end(),
                            std::back_inserter(missing));
        std::set_difference(ids.begin(), ids.end(), base_ids.begin(), base_ids.end(),
                            std::back_inserter(extra));
        auto head = [](const std::vector<std::string>& v) {
            std::string s;
            for (size_t i = 0; i < v.size() && i < 10; ++i) {
                if (i) s += ", ";
                s += v[i];
            }
            if (v.size() > 10) s += ", ...";
            return s.empty() ? std::string("none") : s;
        };
        throw ValidationError("id set mismatch between '" + first_lang + "' and '" + lang +
                              "': missing in " + lang + ": [" + head(missing) +
                              "]; extra in " + lang + ": [" + head(extra) + "]");
    }

    MultilingualBundle b;
    b.toxicity_filtered = toxicity_filtered;
    b.total_records = 0;
    for (const auto& [lang, manifest] : manifests)
        b.total_records += manifest.records.size();
    b.variants = std::move(manifests);
    return b;
}

void write_bundle(const MultilingualBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json desc = json::object();
    json langs = json::array();
    json counts = json::object();
    json digests = json::object();
    for (const auto& [lang, manifest] : bundle.variants) {
        corpus::save_manifest(manifest, dir / ("manifest_" + lang + ".json"));
        langs.push_back(lang);
        counts[lang] = manifest.records.size();
        // digest of the provenance chain identifies the variant's history
        digests[lang] =
            util::sha256_hex(corpus::provenance_to_json(manifest.provenance).dump());
    }
    desc["languages"] = std::move(langs);
    desc["per_language_counts"] = std::move(counts);
    desc["total_records"] = bundle.total_records;
    desc["toxicity_filtered"] = bundle.toxicity_filtered;
    desc["provenance_digests"] = std::move(digests);
    desc["created_at"] = util::iso8601_now();
    util::write_file_atomic(dir / "bundle.json", desc.dump(2) + "\n");
}

MultilingualBundle load_bundle(const std::filesystem::path& dir) {
    json desc = json::parse(util::read_file(dir / "bundle.json"));
    std::map<std::string, corpus::DatasetManifest> manifests;
    for (const auto& lang : desc.at("languages")) {
        std::string l = lang.get<std::string>();
        manifests[l] = corpus::load_manifest(dir / ("manifest_" + l + ".json"), l);
    }
    return merge_languages(std::move(manifests), desc.value("toxicity_filtered", false));
}

namespace {

template <typename Map>
std::string counts_csv(std::string_view key_header, const Map& counts) {
    std::string csv = std::string(key_header) + ",count\n";
    for (const auto& [k, v] : counts)
        csv += util::csv_escape(k) + "," + std::to_string(v) + "\n";
    return csv;
}

template <typename Map>
json counts_json(const Map& counts) {
    json j = json::object();
    for (const auto& [k, v] : counts) j[k] = v;
    return j;
}

}  // namespace

void emit_reports(const RunReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    json j = json::object();
    j["generated_at"] = util::iso8601_now();
    j["per_language_counts"] = counts_json(report.per_language_counts);
    j["exclusion_reasons"] = counts_json(report.exclusion_reasons);
    j["image_category_counts"] = counts_json(report.image_category_counts);
    j["caption_category_counts"] = counts_json(report.caption_category_counts);
    j["flagged_images"] = report.flagged_images;
    j["confirmed_images"] = report.confirmed_images;
    j["caption_flags"] = report.caption_flags;
    j["merged_toxic"] = report.merged_toxic;
    j["removed_records"] = report.removed_records;
    j["remaining_records"] = report.remaining_records;
    j["verification_pass"] = report.verification_pass;
    j["verification_flagged"] = report.verification_flagged;
    util::write_file_atomic(out_dir / "report.json", j.dump(2) + "\n");

    util::write_file_atomic(out_dir / "per_language_counts.csv",
                            counts_csv("language", report.per_language_counts));
    util::write_file_atomic(out_dir / "exclusion_reasons.csv",
                            counts_csv("reason", report.exclusion_reasons));
    util::write_file_atomic(out_dir / "image_category_histogram.csv",
                            counts_csv("category", report.image_category_counts));
    util::write_file_atomic(out_dir / "caption_category_histogram.csv",
                            counts_csv("category", report.caption_category_counts));
}

RunReport read_report(const std::filesystem::path& out_dir) {
    json j = json::parse(util::read_file(out_dir / "report.json"));
    RunReport r;
    // bind before iterating: items() on a temporary would dangle
    json langs = j.value("per_language_counts", json::object());
    for (const auto& [k, v] : langs.items()) r.per_language_counts[k] = v.get<uint64_t>();
    json reasons = j.value("exclusion_reasons", json::object());
    for (const auto& [k, v] : reasons.items()) r.exclusion_reasons[k] = v.get<uint64_t>();
    json img = j.value("image_category_counts", json::object());
    for (const auto& [k, v] : img.items()) r.image_category_counts[k] = v.get<size_t>();
    json cap = j.value("caption_category_counts", json::object());
    for (const auto& [k, v] : cap.items()) r.caption_category_counts[k] = v.get<size_t>();
    r.flagged_images = j.value("flagged_images", 0ull);
    r.confirmed_images = j.value("confirmed_images", 0ull);
    r.caption_flags = j.value("caption_flags", 0ull);
    r.merged_toxic = j.value("merged_toxic", 0ull);
    r.removed_records = j.value("removed_records", 0ull);
    r.remaining_records = j.value("remaining_records", 0ull);
    r.verification_pass = j.value("verification_pass", 0ull);
    r.verification_flagged = j.value("verification_flagged", 0ull);
    return r;
}

}  // namespace langweave::assemble
