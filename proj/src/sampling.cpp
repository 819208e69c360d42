#include "langweave/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "langweave/errors.hpp"
#include "langweave/metrics.hpp"
#include "langweave/util.hpp"

namespace langweave::sampling {

std::string record_metric_text(const corpus::ImageTextRecord& rec) {
    std::string text;
    for (const auto& t : rec.conversations) {
        if (t.from != "gpt") continue;
        if (!text.empty()) text.push_back('\n');
        text.append(t.value);
    }
    return text;
}

std::vector<double> quantile_boundaries(std::vector<double> values, size_t bins) {
    std::vector<double> bounds;
    if (bins <= 1 || values.empty()) return bounds;
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    for (size_t k = 1; k < bins; ++k) {
        size_t idx = (k * n + bins - 1) / bins;  // ceil(k*n/bins)
        if (idx == 0) idx = 1;
        bounds.push_back(values[std::min(idx - 1, n - 1)]);
    }
    return bounds;
}

size_t bin_of(double value, const std::vector<double>& boundaries) {
    size_t bin = 0;
    for (double b : boundaries)
        if (b < value) ++bin;
    return bin;
}

StratifyResult stratify(const corpus::DatasetManifest& manifest, size_t bins) {
    if (bins < 1) throw ConfigError("bins must be >= 1");
    if (manifest.records.empty()) throw ValidationError("cannot stratify an empty manifest");

    const size_t n = manifest.records.size();
    std::vector<double> la(n), fre(n), fkgl(n);
    for (size_t i = 0; i < n; ++i) {
        std::string text = record_metric_text(manifest.records[i]);
        metrics::LengthStats st = metrics::length_analysis(text);
        la[i] = static_cast<double>(st.words);
        if (st.words == 0) {
            // readability is undefined without words; park these in bin 0
            fre[i] = 0.0;
            fkgl[i] = 0.0;
        } else {
            fre[i] = metrics::flesch_reading_ease(text);
            fkgl[i] = metrics::fkgl(text);
        }
    }

    StratifyResult res;
    res.bins = bins;
    res.la_boundaries = quantile_boundaries(la, bins);
    res.fre_boundaries = quantile_boundaries(fre, bins);
    res.fkgl_boundaries = quantile_boundaries(fkgl, bins);
    res.assignments.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        StratumAssignment a;
        a.record_id = manifest.records[i].id;
        a.la_bin = bin_of(la[i], res.la_boundaries);
        a.fre_bin = bin_of(fre[i], res.fre_boundaries);
        a.fkgl_bin = bin_of(fkgl[i], res.fkgl_boundaries);
        a.stratum_key = std::to_string(a.la_bin) + "-" + std::to_string(a.fre_bin) +
                        "-" + std::to_string(a.fkgl_bin);
        res.assignments.push_back(std::move(a));
    }
    return res;
}

namespace {

corpus::DatasetManifest select(const corpus::DatasetManifest& manifest, size_t k,
                               uint64_t seed, size_t bins,
                               std::vector<StratumSummary>* summary_out) {
    if (k > manifest.records.size())
        throw ValidationError("k (" + std::to_string(k) + ") exceeds record count (" +
                              std::to_string(manifest.records.size()) + ")");

    StratifyResult strat = stratify(manifest, bins);

    // stratum key -> record indices in manifest order
    std::map<std::string, std::vector<size_t>> members;
    for (size_t i = 0; i < strat.assignments.size(); ++i)
        members[strat.assignments[i].stratum_key].push_back(i);

    struct Stratum {
        std::string key;
        std::vector<size_t> remaining;
    };
    std::vector<Stratum> order;
    order.reserve(members.size());
    for (auto& [key, idxs] : members) order.push_back({key, idxs});
    std::stable_sort(order.begin(), order.end(), [](const Stratum& a, const Stratum& b) {
        if (a.remaining.size() != b.remaining.size())
            return a.remaining.size() > b.remaining.size();
        return a.key < b.key;
    });

    std::map<std::string, std::vector<std::string>> chosen_by_stratum;
    std::mt19937_64 rng(seed);
    std::set<size_t> picked;
    size_t taken = 0;
    while (taken < k) {
        bool any = false;
        for (auto& st : order) {
            if (taken >= k) break;
            if (st.remaining.empty()) continue;
            any = true;
            // Uniform draw via modulo: documented so other implementations of
            // mt19937_64 reproduce the exact selection.
            size_t idx = static_cast<size_t>(rng() % st.remaining.size());
            size_t rec_idx = st.remaining[idx];
            st.remaining.erase(st.remaining.begin() + static_cast<long>(idx));
            picked.insert(rec_idx);
            chosen_by_stratum[st.key].push_back(manifest.records[rec_idx].id);
            ++taken;
        }
        if (!any) break;  // unreachable given k <= record count
    }

    corpus::DatasetManifest out;
    out.name = manifest.name + "-sample";
    out.language = manifest.language;
    out.provenance = manifest.provenance;
    out.records.reserve(k);
    for (size_t i = 0; i < manifest.records.size(); ++i)
        if (picked.count(i)) out.records.push_back(manifest.records[i]);

    if (summary_out) {
        summary_out->clear();
        for (const auto& [key, idxs] : members) {
            StratumSummary s;
            s.stratum_key = key;
            s.size = idxs.size();
            auto it = chosen_by_stratum.find(key);
            if (it != chosen_by_stratum.end()) {
                s.chosen_ids = it->second;
                std::sort(s.chosen_ids.begin(), s.chosen_ids.end());
            }
            summary_out->push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace

corpus::DatasetManifest sample_representative(const corpus::DatasetManifest& manifest,
                                              size_t k, uint64_t seed, size_t bins) {
    return select(manifest, k, seed, bins, nullptr);
}

corpus::DatasetManifest sample_with_report(const corpus::DatasetManifest& manifest,
                                           size_t k, uint64_t seed, size_t bins,
                                           std::vector<StratumSummary>& summary) {
    return select(manifest, k, seed, bins, &summary);
}

}  // namespace langweave::sampling
