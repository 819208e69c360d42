// langweave: multilingual image-text dataset curation pipeline.
//
// Subcommands mirror the pipeline stages: ingest, sample, eval-preambles,
// translate, verify, detox, assemble, report. Every run writes a
// machine-readable run summary and a JSON-lines run log into --out.
//
// Exit codes: 0 success, 2 usage, 3 config/input validation,
// 4 partial backend failure, 5 internal error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "langweave/assemble.hpp"
#include "langweave/backends.hpp"
#include "langweave/checkpoint.hpp"
#include "langweave/config.hpp"
#include "langweave/corpus.hpp"
#include "langweave/errors.hpp"
#include "langweave/prompteval.hpp"
#include "langweave/sampling.hpp"
#include "langweave/toxicity.hpp"
#include "langweave/translate.hpp"
#include "langweave/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace langweave;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    bool dry_run = false;
    bool pin_time = false;
    bool verbose = false;
    int concurrency_override = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Pipeline config file (JSON)");
    cmd->add_option("--out", args.out_dir, "Output directory")->required();
    cmd->add_flag("--dry-run", args.dry_run,
                  "Validate inputs and print the work plan without side effects");
    cmd->add_flag("--pin-time", args.pin_time,
                  "Pin timestamps and durations for reproducible artifacts");
    cmd->add_flag("-v,--verbose", args.verbose, "Chatty progress on stderr");
    cmd->add_option("--concurrency", args.concurrency_override,
                    "Override the configured in-flight bound");
}

class Run {
public:
    Run(const std::string& stage, const CommonArgs& args) : stage_(stage), args_(args) {
        util::pin_time(args.pin_time);
        start_ = std::chrono::steady_clock::now();
        cfg_ = args.config_path.empty() ? config::default_config()
                                        : config::load_config(args.config_path);
        if (cfg_.digest.empty()) cfg_.digest = config::config_digest(cfg_);
        if (args.concurrency_override > 0)
            cfg_.concurrency = static_cast<size_t>(args.concurrency_override);
        if (!args.dry_run) {
            fs::create_directories(args.out_dir);
            log_.open(fs::path(args.out_dir) / "run_log.jsonl",
                      std::ios::binary | std::ios::app);
        }
        info("stage " + stage_ + " starting");
    }

    config::PipelineConfig& cfg() { return cfg_; }
    fs::path out() const { return args_.out_dir; }
    bool dry_run() const { return args_.dry_run; }

    void info(const std::string& msg, json extra = json::object()) {
        if (args_.verbose) std::cerr << "[" << stage_ << "] " << msg << "\n";
        log_event("info", msg, std::move(extra));
    }

    void warn(const std::string& msg, json extra = json::object()) {
        std::cerr << "[" << stage_ << "] warning: " << msg << "\n";
        log_event("warn", msg, std::move(extra));
    }

    void input(const std::string& key, const fs::path& path) { inputs_[key] = path.string(); }
    void output(const std::string& key, const fs::path& path) { outputs_[key] = path.string(); }
    void count(const std::string& key, uint64_t value) { counts_[key] = value; }

    // Writes {stage, inputs, outputs, counts, duration} and a final log line.
    void finish(const std::string& status) {
        double duration = 0.0;
        if (!util::time_pinned()) {
            duration = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                     start_)
                           .count();
        }
        if (args_.dry_run) return;
        json summary = json::object();
        summary["stage"] = stage_;
        summary["status"] = status;
        summary["inputs"] = inputs_;
        summary["outputs"] = outputs_;
        summary["counts"] = counts_;
        summary["duration"] = duration;
        summary["config_digest"] = cfg_.digest;
        summary["finished_at"] = util::iso8601_now();
        util::write_file_atomic(fs::path(args_.out_dir) / "run_summary.json",
                                summary.dump(2) + "\n");
        log_event("info", "stage " + stage_ + " finished: " + status,
                  {{"counts", counts_}});
    }

private:
    void log_event(const std::string& level, const std::string& msg, json extra) {
        if (!log_.is_open()) return;
        json j = json::object();
        j["ts"] = util::iso8601_now();
        j["level"] = level;
        j["stage"] = stage_;
        j["msg"] = msg;
        for (auto& [k, v] : extra.items()) j[k] = v;
        log_ << j.dump() << '\n';
        log_.flush();
    }

    std::string stage_;
    CommonArgs args_;
    config::PipelineConfig cfg_;
    std::chrono::steady_clock::time_point start_;
    std::ofstream log_;
    json inputs_ = json::object();
    json outputs_ = json::object();
    json counts_ = json::object();
};

std::unique_ptr<backends::TranslationBackend> resolve_translator(
    const config::PipelineConfig& cfg, const std::string& name) {
    if (backends::is_mock_translator_name(name)) return backends::make_mock_translator(name);
    if (auto it = cfg.backend_registry.find(name); it != cfg.backend_registry.end())
        return backends::make_http_translator(it->second);
    throw ConfigError("unknown translation backend '" + name +
                      "'; not a mock and not registered in config");
}

std::unique_ptr<backends::ImageSafetyBackend> resolve_image_safety(
    const config::PipelineConfig& cfg, const std::string& name) {
    if (backends::is_mock_image_safety_name(name)) return backends::make_mock_image_safety(name);
    if (auto it = cfg.backend_registry.find(name); it != cfg.backend_registry.end())
        return backends::make_http_image_safety(it->second);
    throw ConfigError("unknown image-safety backend '" + name + "'");
}

std::unique_ptr<backends::TextToxicityBackend> resolve_text_toxicity(
    const config::PipelineConfig& cfg, const std::string& name) {
    if (backends::is_mock_text_toxicity_name(name))
        return backends::make_mock_text_toxicity(name);
    if (auto it = cfg.backend_registry.find(name); it != cfg.backend_registry.end())
        return backends::make_http_text_toxicity(it->second);
    throw ConfigError("unknown caption-toxicity backend '" + name + "'");
}

std::unique_ptr<backends::JudgeBackend> resolve_judge(const config::PipelineConfig& cfg,
                                                      const std::string& name) {
    if (backends::is_mock_judge_name(name)) return backends::make_mock_judge(name);
    if (auto it = cfg.backend_registry.find(name); it != cfg.backend_registry.end())
        return backends::make_http_judge(it->second);
    throw ConfigError("unknown judge backend '" + name + "'");
}

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw ConfigError(what + " not found: " + p.string());
}

void print_plan(const std::string& stage, const json& plan) {
    json j = plan;
    j["stage"] = stage;
    j["dry_run"] = true;
    std::cout << j.dump(2) << "\n";
}

// --- ingest ----------------------------------------------------------------

int cmd_ingest(const CommonArgs& args, const std::string& manifest_path,
               const std::string& language) {
    Run run("ingest", args);
    require_file(manifest_path, "manifest");
    if (run.dry_run()) {
        print_plan("ingest", {{"manifest", manifest_path},
                              {"language", language},
                              {"out", args.out_dir}});
        return 0;
    }
    corpus::DatasetManifest m = corpus::load_manifest(manifest_path, language);
    fs::path out_manifest = run.out() / "manifest.json";
    corpus::save_manifest(m, out_manifest);
    run.input("manifest", manifest_path);
    run.output("manifest", out_manifest);
    run.count("records", m.records.size());
    run.info("ingested " + std::to_string(m.records.size()) + " records");
    run.finish("ok");
    return 0;
}

// --- sample ----------------------------------------------------------------

int cmd_sample(const CommonArgs& args, const std::string& manifest_path, int k_flag,
               int bins_flag, long long seed_flag) {
    Run run("sample", args);
    auto& cfg = run.cfg();
    if (k_flag > 0) cfg.sampling.k = static_cast<size_t>(k_flag);
    if (bins_flag > 0) cfg.sampling.bins = static_cast<size_t>(bins_flag);
    if (seed_flag >= 0) cfg.sampling.seed = static_cast<uint64_t>(seed_flag);
    require_file(manifest_path, "manifest");
    if (run.dry_run()) {
        print_plan("sample", {{"manifest", manifest_path},
                              {"k", cfg.sampling.k},
                              {"bins", cfg.sampling.bins},
                              {"seed", cfg.sampling.seed}});
        return 0;
    }
    corpus::DatasetManifest m = corpus::load_manifest(manifest_path, cfg.source_language);
    std::vector<sampling::StratumSummary> summary;
    corpus::DatasetManifest subset = sampling::sample_with_report(
        m, cfg.sampling.k, cfg.sampling.seed, cfg.sampling.bins, summary);
    corpus::append_provenance(subset, "sample", cfg.digest, m.records.size(),
                              subset.records.size());

    fs::path out_manifest = run.out() / "sample_manifest.json";
    corpus::save_manifest(subset, out_manifest);

    std::string csv = "stratum_key,size,chosen_ids\n";
    for (const auto& s : summary) {
        std::string ids;
        for (size_t i = 0; i < s.chosen_ids.size(); ++i) {
            if (i) ids += " ";
            ids += s.chosen_ids[i];
        }
        csv += util::csv_escape(s.stratum_key) + "," + std::to_string(s.size) + "," +
               util::csv_escape(ids) + "\n";
    }
    fs::path report = run.out() / "strata_report.csv";
    util::write_file_atomic(report, csv);

    run.input("manifest", manifest_path);
    run.output("sample_manifest", out_manifest);
    run.output("strata_report", report);
    run.count("input_records", m.records.size());
    run.count("sampled_records", subset.records.size());
    run.count("strata", summary.size());
    run.finish("ok");
    return 0;
}

// --- eval-preambles ----------------------------------------------------------

int cmd_eval_preambles(const CommonArgs& args, const std::string& preamble_dir,
                       const std::string& evalset_path, const std::string& backend_name) {
    Run run("eval-preambles", args);
    auto& cfg = run.cfg();
    fs::path pdir = preamble_dir.empty() ? cfg.preamble_dir : fs::path(preamble_dir);
    if (pdir.empty()) throw ConfigError("no preamble directory (flag --preambles or config)");
    require_file(evalset_path, "evalset");
    if (!fs::is_directory(pdir))
        throw ConfigError("preamble directory not found: " + pdir.string());

    auto preambles = preamble::load_preamble_dir(pdir);
    auto evalset = prompteval::load_evalset(evalset_path);
    if (run.dry_run()) {
        print_plan("eval-preambles", {{"preambles", preambles.size()},
                                      {"evalset_samples", evalset.size()},
                                      {"backend", backend_name}});
        return 0;
    }
    auto backend = resolve_translator(cfg, backend_name);

    prompteval::EvalOptions opts;
    opts.retry = cfg.retry;
    opts.concurrency = cfg.concurrency;
    opts.call_log = run.out() / "eval_calls.jsonl";
    prompteval::PreambleScoreMatrix matrix =
        prompteval::evaluate_preambles(preambles, evalset, *backend, opts);

    prompteval::emit_figure_series(matrix, run.out());
    run.output("bar_series", run.out() / "preamble_bar_series.csv");
    run.output("radar_series", run.out() / "preamble_radar_series.json");
    run.input("preambles", pdir);
    run.input("evalset", evalset_path);
    run.count("preambles", matrix.preamble_ids.size());
    run.count("languages", matrix.languages.size());
    run.count("cells", matrix.cells.size());
    run.count("eval_set_size", matrix.eval_set_size);

    auto absent = matrix.absent_cells();
    if (!absent.empty()) {
        json aj = json::array();
        for (const auto& [p, l] : absent) aj.push_back({{"preamble", p}, {"language", l}});
        util::write_file_atomic(run.out() / "absent_cells.json", aj.dump(2) + "\n");
        run.output("absent_cells", run.out() / "absent_cells.json");
        run.count("absent_cells", absent.size());
        run.warn(std::to_string(absent.size()) + " cells absent after retries");
        run.finish("partial");
        return 4;
    }

    prompteval::Ranking ranking = prompteval::rank_preambles(matrix);
    json rj = json::object();
    json per_lang = json::object();
    for (const auto& [lang, order] : ranking.per_language) per_lang[lang] = order;
    rj["per_language"] = std::move(per_lang);
    rj["overall"] = ranking.overall;
    // corpus-average of averaged scores across all cells (the quality gate
    // reads this figure)
    double mean = 0.0;
    for (const auto& [key, cell] : matrix.cells) mean += cell.averaged;
    mean /= static_cast<double>(matrix.cells.size());
    rj["corpus_average_score"] = mean;
    util::write_file_atomic(run.out() / "preamble_ranking.json", rj.dump(2) + "\n");
    run.output("ranking", run.out() / "preamble_ranking.json");
    run.finish("ok");
    return 0;
}

// --- translate ---------------------------------------------------------------

int cmd_translate(const CommonArgs& args, const std::string& manifest_path,
                  const std::string& target, const std::string& backend_name,
                  const std::string& preamble_path) {
    Run run("translate", args);
    auto& cfg = run.cfg();
    require_file(manifest_path, "manifest");
    std::string tgt = corpus::normalize_language(target);
    if (!corpus::is_supported_language(tgt, cfg.extra_languages))
        throw ConfigError("unsupported target language '" + tgt + "'");

    preamble::PreambleTemplate pre = translate::default_preamble();
    if (!preamble_path.empty()) {
        require_file(preamble_path, "preamble");
        pre = preamble::load_preamble(preamble_path);
    }
    if (run.dry_run()) {
        print_plan("translate", {{"manifest", manifest_path},
                                 {"target", tgt},
                                 {"backend", backend_name},
                                 {"preamble", pre.id}});
        return 0;
    }
    auto backend = resolve_translator(cfg, backend_name);

    corpus::DatasetManifest m = corpus::load_manifest(manifest_path, cfg.source_language);
    corpus::ExtractStats stats;
    std::vector<corpus::TranslationUnit> units =
        corpus::extract_targets(m, tgt, cfg.quality_filter, &stats);

    json exclusions = json::object();
    exclusions["considered"] = stats.considered;
    exclusions["accepted"] = stats.accepted;
    json rejected = json::object();
    for (const auto& [reason, n] : stats.rejected) rejected[reason] = n;
    exclusions["rejected"] = std::move(rejected);
    fs::path excl_path = run.out() / ("exclusions_" + tgt + ".json");
    util::write_file_atomic(excl_path, exclusions.dump(2) + "\n");

    checkpoint::Checkpoint ckpt(run.out() / ("checkpoint_" + tgt + ".jsonl"));
    if (ckpt.corrupt_lines() > 0)
        run.warn("checkpoint had " + std::to_string(ckpt.corrupt_lines()) +
                 " corrupt lines (skipped)");

    translate::BatchOptions opts;
    opts.shard_size = cfg.shard_size;
    opts.concurrency = cfg.concurrency;
    opts.debug_log = run.out() / ("translate_debug_" + tgt + ".jsonl");
    translate::BatchResult result =
        translate::translate_batch(units, *backend, pre, ckpt, cfg.retry, opts);

    fs::path out_translations = run.out() / ("translations_" + tgt + ".jsonl");
    translate::write_translations_jsonl(result.translations, out_translations);

    run.input("manifest", manifest_path);
    run.output("translations", out_translations);
    run.output("checkpoint", ckpt.path());
    run.output("exclusions", excl_path);
    run.count("units", units.size());
    run.count("translated", result.translations.size());
    run.count("failed", result.failed_hashes.size());
    run.count("reused_from_checkpoint", result.reused_from_checkpoint);
    run.count("backend_calls", result.backend_calls);
    run.count("retries", result.retries);
    run.count("excluded", stats.considered - stats.accepted);

    if (!result.failed_hashes.empty()) {
        run.warn(std::to_string(result.failed_hashes.size()) +
                 " units failed after retries");
        run.finish("partial");
        return 4;
    }
    run.finish("ok");
    return 0;
}

// --- verify ------------------------------------------------------------------

int cmd_verify(const CommonArgs& args, const std::string& manifest_path,
               const std::string& translations_path, const std::string& backend_name,
               double threshold_flag) {
    Run run("verify", args);
    auto& cfg = run.cfg();
    if (threshold_flag >= 0.0) cfg.verification_threshold = threshold_flag;
    require_file(translations_path, "translations file");
    if (run.dry_run()) {
        print_plan("verify", {{"translations", translations_path},
                              {"backend", backend_name},
                              {"threshold", cfg.verification_threshold}});
        return 0;
    }
    auto backend = resolve_translator(cfg, backend_name);
    std::vector<translate::Translation> translations =
        translate::read_translations_jsonl(translations_path);

    std::vector<translate::VerificationResult> results = translate::verify_batch(
        translations, *backend, cfg.verification_threshold, nullptr, cfg.retry,
        cfg.concurrency);

    std::string tgt = translations.empty() ? "all" : translations.front().unit.target_language;
    std::string buf;
    size_t pass = 0, flagged = 0, backend_failures = 0;
    for (const auto& r : results) {
        json j = json::object();
        j["record_id"] = r.unit.record_id;
        j["turn_index"] = r.unit.turn_index;
        j["hash"] = r.unit.content_hash;
        j["similarity"] = r.similarity ? json(*r.similarity) : json(nullptr);
        j["status"] = r.status;
        buf += j.dump();
        buf += '\n';
        if (r.status == "pass") ++pass;
        else ++flagged;
        if (!r.similarity) ++backend_failures;
    }
    fs::path verification = run.out() / ("verification_" + tgt + ".jsonl");
    util::write_file_atomic(verification, buf);
    fs::path queue = run.out() / ("review_queue_" + tgt + ".jsonl");
    translate::write_review_queue(results, queue);

    run.input("manifest", manifest_path.empty() ? "-" : manifest_path);
    run.input("translations", translations_path);
    run.output("verification", verification);
    run.output("review_queue", queue);
    run.count("verified", results.size());
    run.count("pass", pass);
    run.count("flagged", flagged);
    run.count("backend_failures", backend_failures);

    if (backend_failures > 0) {
        run.warn(std::to_string(backend_failures) + " back-translations failed");
        run.finish("partial");
        return 4;
    }
    run.finish("ok");
    return 0;
}

// --- detox -------------------------------------------------------------------

int cmd_detox(const CommonArgs& args, const std::string& manifest_path,
              const std::string& image_backend, const std::string& text_backend,
              const std::string& judge_backend, double threshold_flag,
              const std::string& judge_preamble_path) {
    Run run("detox", args);
    auto& cfg = run.cfg();
    if (threshold_flag >= 0.0) cfg.toxicity.caption_threshold = threshold_flag;
    require_file(manifest_path, "manifest");

    preamble::PreambleTemplate judge_pre;
    if (judge_preamble_path.empty()) {
        judge_pre.id = "builtin-judge";
        judge_pre.instruction =
            "You are a content-safety arbiter. Review the finding below and decide "
            "whether the image is truly unsafe. Answer in {language}.";
        judge_pre.considerations = {"Borderline educational or medical content is safe.",
                                    "Only confirm findings whose rationale is specific."};
    } else {
        require_file(judge_preamble_path, "judge preamble");
        judge_pre = preamble::load_preamble(judge_preamble_path);
    }

    if (run.dry_run()) {
        print_plan("detox", {{"manifest", manifest_path},
                             {"image_backend", image_backend},
                             {"text_backend", text_backend},
                             {"judge", judge_backend},
                             {"caption_threshold", cfg.toxicity.caption_threshold}});
        return 0;
    }
    auto image = resolve_image_safety(cfg, image_backend);
    auto text = resolve_text_toxicity(cfg, text_backend);
    auto judge = resolve_judge(cfg, judge_backend);

    corpus::DatasetManifest m = corpus::load_manifest(manifest_path, cfg.source_language);
    run.info("scanning " + std::to_string(m.records.size()) + " records");

    toxicity::ScanImagesResult images =
        toxicity::scan_images(m, *image, cfg.retry, cfg.concurrency);
    {
        std::string buf;
        for (const auto& f : images.flagged) {
            json j = {{"record_id", f.record_id},
                      {"rating", f.rating},
                      {"category", f.category},
                      {"rationale", f.rationale}};
            buf += j.dump();
            buf += '\n';
        }
        util::write_file_atomic(run.out() / "image_findings.jsonl", buf);
    }

    toxicity::ArbitrateResult verdicts =
        toxicity::arbitrate(images.flagged, *judge, judge_pre, cfg.retry, cfg.concurrency);
    std::set<std::string> confirmed_ids;
    {
        std::string buf;
        for (const auto& v : verdicts.verdicts) {
            json j = {{"record_id", v.record_id},
                      {"confirmed", v.confirmed},
                      {"judge_rationale", v.judge_rationale}};
            buf += j.dump();
            buf += '\n';
            if (v.confirmed) confirmed_ids.insert(v.record_id);
        }
        util::write_file_atomic(run.out() / "arbitration_verdicts.jsonl", buf);
    }

    toxicity::ScanCaptionsResult captions = toxicity::scan_captions(
        m, *text, cfg.toxicity.caption_threshold, cfg.retry, cfg.concurrency);
    std::set<std::string> caption_ids;
    {
        std::string buf;
        for (const auto& f : captions.flags) {
            json j = {{"record_id", f.record_id},
                      {"category", f.category},
                      {"confidence", f.confidence}};
            buf += j.dump();
            buf += '\n';
            caption_ids.insert(f.record_id);
        }
        util::write_file_atomic(run.out() / "caption_flags.jsonl", buf);
    }

    std::set<std::string> toxic = toxicity::merge_flags(confirmed_ids, caption_ids);
    {
        json arr = json::array();
        for (const auto& id : toxic) arr.push_back(id);
        util::write_file_atomic(run.out() / "toxic_ids.json", arr.dump(2) + "\n");
    }

    corpus::DatasetManifest detoxed = toxicity::filter_dataset(m, toxic, cfg.digest);
    corpus::save_manifest(detoxed, run.out() / "manifest_detoxed.json");

    // category histograms (the report stage re-derives these from the JSONL
    // files; emitting them here keeps single-stage runs self-contained)
    std::vector<std::string> image_cats, caption_cats;
    for (const auto& f : images.flagged) image_cats.push_back(f.category);
    for (const auto& f : captions.flags) caption_cats.push_back(f.category);
    auto write_hist = [&](const fs::path& p, const std::map<std::string, size_t>& h) {
        std::string csv = "category,count\n";
        for (const auto& [k, v] : h) csv += util::csv_escape(k) + "," + std::to_string(v) + "\n";
        util::write_file_atomic(p, csv);
    };
    write_hist(run.out() / "image_category_histogram.csv",
               toxicity::category_histogram(image_cats, cfg.toxicity.extra_categories));
    write_hist(run.out() / "caption_category_histogram.csv",
               toxicity::category_histogram(caption_cats, cfg.toxicity.extra_categories));

    run.input("manifest", manifest_path);
    run.output("image_findings", run.out() / "image_findings.jsonl");
    run.output("arbitration_verdicts", run.out() / "arbitration_verdicts.jsonl");
    run.output("caption_flags", run.out() / "caption_flags.jsonl");
    run.output("toxic_ids", run.out() / "toxic_ids.json");
    run.output("manifest_detoxed", run.out() / "manifest_detoxed.json");
    run.count("records", m.records.size());
    run.count("flagged_images", images.flagged.size());
    run.count("confirmed_images", confirmed_ids.size());
    run.count("caption_flags", captions.flags.size());
    run.count("merged_toxic", toxic.size());
    run.count("removed", m.records.size() - detoxed.records.size());
    run.count("remaining", detoxed.records.size());
    run.count("unscanned_images", images.unscanned_ids.size());
    run.count("unscanned_captions", captions.unscanned_ids.size());
    run.count("judge_failures", verdicts.judge_failures);

    if (!images.unscanned_ids.empty() || !captions.unscanned_ids.empty()) {
        run.warn("some records could not be scanned");
        run.finish("partial");
        return 4;
    }
    run.finish("ok");
    return 0;
}

// --- assemble ------------------------------------------------------------------

int cmd_assemble(const CommonArgs& args, const std::string& manifest_path,
                 const std::string& translations_dir,
                 std::vector<std::string> languages, const std::string& exclude_ids_path,
                 bool skip_source) {
    Run run("assemble", args);
    auto& cfg = run.cfg();
    require_file(manifest_path, "manifest");
    if (languages.empty()) languages = cfg.languages;
    for (auto& l : languages) l = corpus::normalize_language(l);

    std::set<std::string> exclude;
    if (!exclude_ids_path.empty()) {
        require_file(exclude_ids_path, "exclude-ids file");
        json arr = json::parse(util::read_file(exclude_ids_path));
        for (const auto& id : arr) exclude.insert(id.get<std::string>());
    }
    if (run.dry_run()) {
        print_plan("assemble", {{"manifest", manifest_path},
                                {"translations_dir", translations_dir},
                                {"languages", languages},
                                {"excluded_ids", exclude.size()}});
        return 0;
    }

    corpus::DatasetManifest base = corpus::load_manifest(manifest_path, cfg.source_language);

    // (record_id, turn_index) -> target_text, per language
    std::map<std::string, std::map<std::pair<std::string, size_t>, std::string>> tmap;
    for (const auto& lang : languages) {
        fs::path tpath = fs::path(translations_dir) / ("translations_" + lang + ".jsonl");
        require_file(tpath, "translations for " + lang);
        for (const auto& t : translate::read_translations_jsonl(tpath))
            tmap[lang][{t.unit.record_id, t.unit.turn_index}] = t.target_text;
    }

    // keep records whose every gpt turn is translated in every language
    std::vector<const corpus::ImageTextRecord*> kept;
    size_t dropped_missing = 0, dropped_excluded = 0;
    for (const auto& rec : base.records) {
        if (exclude.count(rec.id)) {
            ++dropped_excluded;
            continue;
        }
        bool complete = true;
        for (const auto& lang : languages) {
            const auto& lookup = tmap[lang];
            for (size_t i = 0; i < rec.conversations.size() && complete; ++i) {
                if (rec.conversations[i].from != "gpt") continue;
                if (!lookup.count({rec.id, i})) complete = false;
            }
            if (!complete) break;
        }
        if (!complete) {
            ++dropped_missing;
            continue;
        }
        kept.push_back(&rec);
    }

    std::map<std::string, corpus::DatasetManifest> variants;
    if (!skip_source) {
        corpus::DatasetManifest src;
        src.name = base.name + "-" + base.language;
        src.language = base.language;
        src.provenance = base.provenance;
        for (const auto* rec : kept) src.records.push_back(*rec);
        corpus::append_provenance(src, "assemble", cfg.digest, base.records.size(),
                                  src.records.size());
        variants[base.language] = std::move(src);
    }
    for (const auto& lang : languages) {
        corpus::DatasetManifest v;
        v.name = base.name + "-" + lang;
        v.language = lang;
        v.provenance = base.provenance;
        const auto& lookup = tmap[lang];
        for (const auto* rec : kept) {
            corpus::ImageTextRecord copy = *rec;
            for (size_t i = 0; i < copy.conversations.size(); ++i) {
                if (copy.conversations[i].from != "gpt") continue;
                copy.conversations[i].value = lookup.at({copy.id, i});
            }
            v.records.push_back(std::move(copy));
        }
        corpus::append_provenance(v, "assemble", cfg.digest, base.records.size(),
                                  v.records.size());
        variants[lang] = std::move(v);
    }

    assemble::MultilingualBundle bundle =
        assemble::merge_languages(std::move(variants), !exclude.empty());
    assemble::write_bundle(bundle, run.out());

    run.input("manifest", manifest_path);
    run.input("translations_dir", translations_dir);
    run.output("bundle", run.out() / "bundle.json");
    run.count("languages", bundle.variants.size());
    run.count("records_per_language", kept.size());
    run.count("total_records", bundle.total_records);
    run.count("dropped_missing_translation", dropped_missing);
    run.count("dropped_excluded", dropped_excluded);
    run.finish("ok");
    return 0;
}

// --- report --------------------------------------------------------------------

int cmd_report(const CommonArgs& args, const std::string& bundle_dir,
               const std::string& detox_dir, const std::string& eval_dir,
               std::vector<std::string> verify_files,
               std::vector<std::string> exclusion_files) {
    Run run("report", args);
    auto& cfg = run.cfg();
    if (run.dry_run()) {
        print_plan("report", {{"bundle", bundle_dir},
                              {"detox_dir", detox_dir},
                              {"eval_dir", eval_dir}});
        return 0;
    }

    assemble::RunReport report;

    if (!bundle_dir.empty()) {
        require_file(fs::path(bundle_dir) / "bundle.json", "bundle descriptor");
        assemble::MultilingualBundle bundle = assemble::load_bundle(bundle_dir);
        for (const auto& [lang, manifest] : bundle.variants)
            report.per_language_counts[lang] = manifest.records.size();
        run.input("bundle", bundle_dir);
    }

    if (!detox_dir.empty()) {
        fs::path d(detox_dir);
        std::vector<std::string> image_cats;
        std::set<std::string> flagged_ids;
        for (const auto& line : util::read_lines(d / "image_findings.jsonl")) {
            if (line.empty()) continue;
            json j = json::parse(line);
            image_cats.push_back(j.value("category", "other"));
            flagged_ids.insert(j.at("record_id").get<std::string>());
        }
        report.flagged_images = flagged_ids.size();
        report.image_category_counts =
            toxicity::category_histogram(image_cats, cfg.toxicity.extra_categories);

        std::set<std::string> confirmed_ids;
        for (const auto& line : util::read_lines(d / "arbitration_verdicts.jsonl")) {
            if (line.empty()) continue;
            json j = json::parse(line);
            if (j.value("confirmed", false))
                confirmed_ids.insert(j.at("record_id").get<std::string>());
        }
        report.confirmed_images = confirmed_ids.size();

        std::vector<std::string> caption_cats;
        std::set<std::string> caption_ids;
        for (const auto& line : util::read_lines(d / "caption_flags.jsonl")) {
            if (line.empty()) continue;
            json j = json::parse(line);
            caption_cats.push_back(j.value("category", "other"));
            caption_ids.insert(j.at("record_id").get<std::string>());
        }
        report.caption_flags = caption_ids.size();
        report.caption_category_counts =
            toxicity::category_histogram(caption_cats, cfg.toxicity.extra_categories);

        report.merged_toxic = toxicity::merge_flags(confirmed_ids, caption_ids).size();

        // removal counts from the detoxed manifest's provenance
        auto prov = corpus::provenance_from_json(json::parse(
            util::read_file(corpus::sidecar_path(d / "manifest_detoxed.json"))));
        if (!prov.empty()) {
            const auto& last = prov.back();
            report.removed_records = last.input_count - last.output_count;
            report.remaining_records = last.output_count;
        }
        run.input("detox_dir", detox_dir);
    }

    for (const auto& vf : verify_files) {
        require_file(vf, "verification file");
        for (const auto& line : util::read_lines(vf)) {
            if (line.empty()) continue;
            json j = json::parse(line);
            if (j.value("status", "") == "pass") ++report.verification_pass;
            else ++report.verification_flagged;
        }
        run.input("verify:" + fs::path(vf).filename().string(), vf);
    }

    for (const auto& ef : exclusion_files) {
        require_file(ef, "exclusions file");
        json j = json::parse(util::read_file(ef));
        json rejected = j.value("rejected", json::object());
        for (const auto& [reason, n] : rejected.items())
            report.exclusion_reasons[reason] += n.get<uint64_t>();
        run.input("exclusions:" + fs::path(ef).filename().string(), ef);
    }

    if (!eval_dir.empty()) {
        // copy the figure series next to the report for one-stop consumption
        prompteval::PreambleScoreMatrix matrix = prompteval::read_figure_series(eval_dir);
        prompteval::emit_figure_series(matrix, run.out());
        run.input("eval_dir", eval_dir);
        run.count("preamble_cells", matrix.cells.size());
    }

    assemble::emit_reports(report, run.out());
    run.output("report", run.out() / "report.json");
    uint64_t total = 0;
    for (const auto& [lang, n] : report.per_language_counts) total += n;
    run.count("total_records", total);
    run.count("languages", report.per_language_counts.size());
    run.finish("ok");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"langweave: multilingual image-text dataset curation pipeline"};
    app.require_subcommand(1);

    // ingest
    CommonArgs ingest_args;
    std::string ingest_manifest, ingest_language = "en";
    auto* ingest = app.add_subcommand("ingest", "Validate and index a manifest");
    add_common(ingest, ingest_args);
    ingest->add_option("--manifest", ingest_manifest, "Input manifest (JSON array)")
        ->required();
    ingest->add_option("--language", ingest_language, "Manifest language code");

    // sample
    CommonArgs sample_args;
    std::string sample_manifest;
    int sample_k = -1, sample_bins = -1;
    long long sample_seed = -1;
    auto* sample = app.add_subcommand("sample", "Readability-stratified sampling");
    add_common(sample, sample_args);
    sample->add_option("--manifest", sample_manifest, "Input manifest")->required();
    sample->add_option("--k", sample_k, "Samples to select");
    sample->add_option("--bins", sample_bins, "Quantile bins per metric");
    sample->add_option("--seed", sample_seed, "Selection seed");

    // eval-preambles
    CommonArgs eval_args;
    std::string eval_preambles, eval_evalset, eval_backend;
    auto* evalp = app.add_subcommand("eval-preambles", "Score and rank preamble templates");
    add_common(evalp, eval_args);
    evalp->add_option("--preambles", eval_preambles, "Directory of preamble JSON files");
    evalp->add_option("--evalset", eval_evalset, "Evalset (.csv or .jsonl)")->required();
    evalp->add_option("--backend", eval_backend, "Translation backend name")->required();

    // translate
    CommonArgs tr_args;
    std::string tr_manifest, tr_target, tr_backend, tr_preamble;
    auto* tr = app.add_subcommand("translate", "Checkpointed batch translation");
    add_common(tr, tr_args);
    tr->add_option("--manifest", tr_manifest, "Input manifest")->required();
    tr->add_option("--target", tr_target, "Target language code")->required();
    tr->add_option("--backend", tr_backend, "Translation backend name")->required();
    tr->add_option("--preamble", tr_preamble, "Preamble JSON file");

    // verify
    CommonArgs vf_args;
    std::string vf_manifest, vf_translations, vf_backend;
    double vf_threshold = -1.0;
    auto* vf = app.add_subcommand("verify", "Back-translation verification");
    add_common(vf, vf_args);
    vf->add_option("--manifest", vf_manifest, "Source manifest (informational)");
    vf->add_option("--translations", vf_translations, "translations_<lang>.jsonl")->required();
    vf->add_option("--backend", vf_backend, "Translation backend name")->required();
    vf->add_option("--threshold", vf_threshold, "Similarity threshold");

    // detox
    CommonArgs dt_args;
    std::string dt_manifest, dt_image = "marker", dt_text = "marker", dt_judge = "confirm";
    std::string dt_judge_preamble;
    double dt_threshold = -1.0;
    auto* dt = app.add_subcommand("detox", "Two-channel toxicity filtering");
    add_common(dt, dt_args);
    dt->add_option("--manifest", dt_manifest, "Input manifest")->required();
    dt->add_option("--image-backend", dt_image, "Image-safety backend name");
    dt->add_option("--text-backend", dt_text, "Caption-toxicity backend name");
    dt->add_option("--judge", dt_judge, "Judge backend name");
    dt->add_option("--threshold", dt_threshold, "Caption confidence threshold (strict >)");
    dt->add_option("--judge-preamble", dt_judge_preamble, "Judge preamble JSON file");

    // assemble
    CommonArgs as_args;
    std::string as_manifest, as_tdir, as_exclude;
    std::vector<std::string> as_languages;
    bool as_skip_source = false;
    auto* as = app.add_subcommand("assemble", "Merge per-language outputs into a bundle");
    add_common(as, as_args);
    as->add_option("--manifest", as_manifest, "Source manifest")->required();
    as->add_option("--translations-dir", as_tdir, "Directory with translations_<lang>.jsonl")
        ->required();
    as->add_option("--languages", as_languages, "Target languages (default: config)")
        ->delimiter(',');
    as->add_option("--exclude-ids", as_exclude, "JSON array of record ids to drop");
    as->add_flag("--skip-source", as_skip_source, "Do not include the source-language variant");

    // report
    CommonArgs rp_args;
    std::string rp_bundle, rp_detox, rp_eval;
    std::vector<std::string> rp_verify, rp_exclusions;
    auto* rp = app.add_subcommand("report", "Aggregate stage outputs into reports");
    add_common(rp, rp_args);
    rp->add_option("--bundle", rp_bundle, "Bundle directory");
    rp->add_option("--detox-dir", rp_detox, "Detox output directory");
    rp->add_option("--eval-dir", rp_eval, "Preamble evaluation output directory");
    rp->add_option("--verify-file", rp_verify, "verification_<lang>.jsonl (repeatable)");
    rp->add_option("--exclusions-file", rp_exclusions, "exclusions_<lang>.json (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(ingest_args, ingest_manifest, ingest_language);
        if (sample->parsed())
            return cmd_sample(sample_args, sample_manifest, sample_k, sample_bins, sample_seed);
        if (evalp->parsed())
            return cmd_eval_preambles(eval_args, eval_preambles, eval_evalset, eval_backend);
        if (tr->parsed())
            return cmd_translate(tr_args, tr_manifest, tr_target, tr_backend, tr_preamble);
        if (vf->parsed())
            return cmd_verify(vf_args, vf_manifest, vf_translations, vf_backend, vf_threshold);
        if (dt->parsed())
            return cmd_detox(dt_args, dt_manifest, dt_image, dt_text, dt_judge, dt_threshold,
                             dt_judge_preamble);
        if (as->parsed())
            return cmd_assemble(as_args, as_manifest, as_tdir, as_languages, as_exclude,
                                as_skip_source);
        if (rp->parsed())
            return cmd_report(rp_args, rp_bundle, rp_detox, rp_eval, rp_verify, rp_exclusions);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const PartialFailure& e) {
        std::cerr << "partial failure: " << e.what() << "\n";
        return 4;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 5;
    }
}
