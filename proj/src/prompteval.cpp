#include "langweave/prompteval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "langweave/corpus.hpp"
#include "langweave/errors.hpp"
#include "langweave/metrics.hpp"
#include "langweave/util.hpp"

namespace langweave::prompteval {

using json = nlohmann::ordered_json;

std::vector<EvalSample> load_evalset(const std::filesystem::path& path) {
    std::vector<EvalSample> out;
    std::string ext = util::to_lower_ascii(path.extension().string());
    if (ext == ".jsonl") {
        for (const auto& line : util::read_lines(path)) {
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw ValidationError("malformed JSON line in " + path.string() + ": " +
                                      e.what());
            }
            EvalSample s;
            s.source = j.at("source").get<std::string>();
            s.language = corpus::normalize_language(j.at("language").get<std::string>());
            s.reference = j.at("reference").get<std::string>();
            out.push_back(std::move(s));
        }
    } else if (ext == ".csv") {
        auto lines = util::read_lines(path);
        if (lines.empty()) throw ValidationError("empty evalset file " + path.string());
        auto header = util::parse_csv_line(lines[0]);
        auto col = [&](std::string_view name) {
            for (size_t i = 0; i < header.size(); ++i)
                if (header[i] == name) return i;
            throw ValidationError(path.string() + ": evalset CSV missing column '" +
                                  std::string(name) + "'");
        };
        size_t c_src = col("source"), c_lang = col("language"), c_ref = col("reference");
        for (size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            auto fields = util::parse_csv_line(lines[i]);
            size_t need = std::max({c_src, c_lang, c_ref}) + 1;
            if (fields.size() < need)
                throw ValidationError(path.string() + ": short CSV row " +
                                      std::to_string(i + 1));
            EvalSample s;
            s.source = fields[c_src];
            s.language = corpus::normalize_language(fields[c_lang]);
            s.reference = fields[c_ref];
            out.push_back(std::move(s));
        }
    } else {
        throw ConfigError("evalset must be .csv or .jsonl, got " + path.string());
    }
    if (out.empty()) throw ValidationError("evalset " + path.string() + " has no samples");
    for (size_t i = 0; i < out.size(); ++i) {
        if (util::trim(out[i].source).empty() || util::trim(out[i].reference).empty() ||
            out[i].language.empty()) {
            throw ValidationError("evalset " + path.string() + " sample " +
                                  std::to_string(i + 1) +
                                  ": source, language, and reference must be non-empty");
        }
    }
    return out;
}

const CellScore& PreambleScoreMatrix::at(const std::string& pre,
                                         const std::string& lang) const {
    auto it = cells.find({pre, lang});
    if (it == cells.end())
        throw ValidationError("no matrix cell for (" + pre + ", " + lang + ")");
    return it->second;
}

bool PreambleScoreMatrix::complete() const { return absent_cells().empty(); }

std::vector<std::pair<std::string, std::string>> PreambleScoreMatrix::absent_cells() const {
    std::vector<std::pair<std::string, std::string>> absent;
    for (const auto& p : preamble_ids) {
        for (const auto& l : languages) {
            auto it = cells.find({p, l});
            if (it == cells.end() || !it->second.present) absent.emplace_back(p, l);
        }
    }
    return absent;
}

PreambleScoreMatrix evaluate_preambles(const std::vector<preamble::PreambleTemplate>& preambles,
                                       const std::vector<EvalSample>& evalset,
                                       backends::TranslationBackend& backend,
                                       const EvalOptions& options) {
    if (preambles.empty()) throw ValidationError("no preambles to evaluate");
    if (evalset.empty()) throw ValidationError("empty evalset");

    PreambleScoreMatrix m;
    m.eval_set_size = evalset.size();
    std::set<std::string> langs;
    for (const auto& s : evalset) langs.insert(s.language);
    m.languages.assign(langs.begin(), langs.end());
    for (const auto& p : preambles) m.preamble_ids.push_back(p.id);
    std::sort(m.preamble_ids.begin(), m.preamble_ids.end());

    // samples grouped per language, original order preserved
    std::map<std::string, std::vector<const EvalSample*>> by_lang;
    for (const auto& s : evalset) by_lang[s.language].push_back(&s);

    std::ofstream log;
    std::mutex log_mu;
    if (!options.call_log.empty()) {
        log.open(options.call_log, std::ios::binary | std::ios::app);
        if (!log) throw IoError("cannot open call log " + options.call_log.string());
    }

    struct Task {
        const preamble::PreambleTemplate* pre;
        const std::string* lang;
        const EvalSample* sample;
    };
    std::vector<Task> tasks;
    for (const auto& p : preambles)
        for (const auto& lang : m.languages)
            for (const EvalSample* s : by_lang[lang]) tasks.push_back({&p, &lang, s});

    struct SampleScore {
        std::array<double, 4> per_order{};
        double averaged = 0.0;
        bool ok = false;
    };
    std::vector<SampleScore> scores(tasks.size());

    util::parallel_for(tasks.size(), options.concurrency, [&](size_t i) {
        const Task& t = tasks[i];
        backends::TranslateRequest req;
        req.prompt = preamble::render_prompt(*t.pre, *t.lang, t.sample->source);
        req.target_language = *t.lang;

        std::string hyp_text;
        bool ok = false;
        std::string error;
        for (size_t attempt = 1; attempt <= options.retry.max_attempts && !ok; ++attempt) {
            try {
                hyp_text = backend.translate(req);
                ok = true;
            } catch (const BackendError& e) {
                error = e.what();
                if (attempt < options.retry.max_attempts)
                    std::this_thread::sleep_for(options.retry.backoff_for(attempt));
            }
        }
        if (log.is_open()) {
            std::lock_guard<std::mutex> lk(log_mu);
            json j = {{"preamble", t.pre->id},
                      {"language", *t.lang},
                      {"source", t.sample->source},
                      {"status", ok ? "ok" : "error"}};
            if (!ok) j["error"] = error;
            log << j.dump() << '\n';
        }
        if (!ok) return;

        auto hyp = metrics::tokenize(hyp_text, *t.lang);
        auto ref = metrics::tokenize(t.sample->reference, *t.lang);
        if (ref.empty()) return;  // unusable sample; cell handles via count
        SampleScore s;
        double sum = 0.0;
        for (size_t n = 1; n <= 4; ++n) {
            double v = hyp.empty()
                           ? 0.0
                           : metrics::bleu(hyp, {ref}, n, metrics::Smoothing::add_epsilon).score;
            s.per_order[n - 1] = v;
            sum += v;
        }
        s.averaged = sum / 4.0;
        s.ok = true;
        scores[i] = s;
    });

    // reduce per (preamble, language)
    std::map<std::pair<std::string, std::string>, std::vector<const SampleScore*>> groups;
    std::map<std::pair<std::string, std::string>, size_t> expected;
    for (size_t i = 0; i < tasks.size(); ++i) {
        auto key = std::make_pair(tasks[i].pre->id, *tasks[i].lang);
        ++expected[key];
        if (scores[i].ok) groups[key].push_back(&scores[i]);
    }
    for (const auto& p : m.preamble_ids) {
        for (const auto& lang : m.languages) {
            auto key = std::make_pair(p, lang);
            CellScore cell;
            const auto& got = groups[key];
            // a cell is present only if every sample scored
            if (!got.empty() && got.size() == expected[key]) {
                for (const SampleScore* s : got) {
                    for (size_t n = 0; n < 4; ++n) cell.per_order[n] += s->per_order[n];
                    cell.averaged += s->averaged;
                }
                double k = static_cast<double>(got.size());
                for (size_t n = 0; n < 4; ++n) cell.per_order[n] /= k;
                cell.averaged /= k;
                cell.sample_count = got.size();
                cell.present = true;
            }
            m.cells[key] = cell;
        }
    }
    return m;
}

Ranking rank_preambles(const PreambleScoreMatrix& matrix) {
    auto absent = matrix.absent_cells();
    if (!absent.empty()) {
        std::string msg = "matrix incomplete; absent cells:";
        for (const auto& [p, l] : absent) msg += " (" + p + "," + l + ")";
        throw PartialFailure(msg);
    }
    Ranking r;
    for (const auto& lang : matrix.languages) {
        std::vector<std::string> order = matrix.preamble_ids;
        std::stable_sort(order.begin(), order.end(),
                         [&](const std::string& a, const std::string& b) {
                             double sa = matrix.at(a, lang).averaged;
                             double sb = matrix.at(b, lang).averaged;
                             if (sa != sb) return sa > sb;
                             return a < b;
                         });
        r.per_language[lang] = std::move(order);
    }
    std::vector<std::string> overall = matrix.preamble_ids;
    auto mean_score = [&](const std::string& p) {
        double sum = 0.0;
        for (const auto& lang : matrix.languages) sum += matrix.at(p, lang).averaged;
        return sum / static_cast<double>(matrix.languages.size());
    };
    std::stable_sort(overall.begin(), overall.end(),
                     [&](const std::string& a, const std::string& b) {
                         double sa = mean_score(a), sb = mean_score(b);
                         if (sa != sb) return sa > sb;
                         return a < b;
                     });
    r.overall = std::move(overall);
    return r;
}

namespace {

std::string fmt_double(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace

void emit_figure_series(const PreambleScoreMatrix& matrix,
                        const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    // Bar series: every cell with per-order and averaged scores. This file
    // alone reconstructs the matrix.
    std::string csv = "preamble,language,bleu1,bleu2,bleu3,bleu4,averaged,samples\n";
    for (const auto& p : matrix.preamble_ids) {
        for (const auto& lang : matrix.languages) {
            const CellScore& c = matrix.at(p, lang);
            csv += util::csv_escape(p) + "," + util::csv_escape(lang);
            for (size_t n = 0; n < 4; ++n) csv += "," + fmt_double(c.per_order[n]);
            csv += "," + fmt_double(c.averaged);
            csv += "," + std::to_string(c.sample_count);
            csv += "\n";
        }
    }
    util::write_file_atomic(out_dir / "preamble_bar_series.csv", csv);

    // Radar series: per preamble, per-order means across languages.
    json radar = json::object();
    radar["eval_set_size"] = matrix.eval_set_size;
    radar["languages"] = matrix.languages;
    json series = json::array();
    for (const auto& p : matrix.preamble_ids) {
        std::array<double, 4> means{};
        for (const auto& lang : matrix.languages) {
            const CellScore& c = matrix.at(p, lang);
            for (size_t n = 0; n < 4; ++n) means[n] += c.per_order[n];
        }
        for (size_t n = 0; n < 4; ++n)
            means[n] /= static_cast<double>(matrix.languages.size());
        json entry = json::object();
        entry["preamble"] = p;
        entry["per_order"] = means;
        series.push_back(std::move(entry));
    }
    radar["series"] = std::move(series);
    util::write_file_atomic(out_dir / "preamble_radar_series.json", radar.dump(2) + "\n");
}

PreambleScoreMatrix read_figure_series(const std::filesystem::path& out_dir) {
    PreambleScoreMatrix m;
    auto lines = util::read_lines(out_dir / "preamble_bar_series.csv");
    if (lines.empty()) throw ValidationError("empty bar series file");
    std::set<std::string> pres, langs;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto f = util::parse_csv_line(lines[i]);
        if (f.size() < 8) throw ValidationError("short bar series row " + std::to_string(i + 1));
        CellScore c;
        for (size_t n = 0; n < 4; ++n) c.per_order[n] = std::stod(f[2 + n]);
        c.averaged = std::stod(f[6]);
        c.sample_count = static_cast<size_t>(std::stoull(f[7]));
        c.present = true;
        pres.insert(f[0]);
        langs.insert(f[1]);
        m.cells[{f[0], f[1]}] = c;
    }
    m.preamble_ids.assign(pres.begin(), pres.end());
    m.languages.assign(langs.begin(), langs.end());
    json radar = json::parse(util::read_file(out_dir / "preamble_radar_series.json"));
    m.eval_set_size = radar.value("eval_set_size", 0ull);
    return m;
}

}  // namespace langweave::prompteval
