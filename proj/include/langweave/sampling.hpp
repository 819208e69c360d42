#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "langweave/corpus.hpp"

namespace langweave::sampling {

struct StratumAssignment {
    std::string record_id;
    size_t la_bin = 0;
    size_t fre_bin = 0;
    size_t fkgl_bin = 0;
    std::string stratum_key;  // "la-fre-fkgl"
};

struct StratifyResult {
    std::vector<StratumAssignment> assignments;  // manifest order
    // Upper boundaries q_1..q_{B-1} per metric, from the B-quantile rule.
    std::vector<double> la_boundaries;
    std::vector<double> fre_boundaries;
    std::vector<double> fkgl_boundaries;
    size_t bins = 0;
};

// Readability basis: the record's gpt-turn values joined with newlines.
std::string record_metric_text(const corpus::ImageTextRecord& rec);

// Quantile machinery, exposed for testing. Boundary k (1..B-1) is
// sorted[ceil(k*N/B)-1]; a value's bin is the number of boundaries strictly
// below it, so boundary ties land in the lower bin.
std::vector<double> quantile_boundaries(std::vector<double> values, size_t bins);
size_t bin_of(double value, const std::vector<double>& boundaries);

StratifyResult stratify(const corpus::DatasetManifest& manifest, size_t bins = 3);

// Deterministic stratified pick: strata ordered by size descending then key
// ascending, visited round-robin, one seeded uniform draw per visit
// (std::mt19937_64, index = next() % remaining). Output keeps manifest order.
corpus::DatasetManifest sample_representative(const corpus::DatasetManifest& manifest,
                                              size_t k, uint64_t seed, size_t bins = 3);

struct StratumSummary {
    std::string stratum_key;
    size_t size = 0;
    std::vector<std::string> chosen_ids;
};

// Same selection as sample_representative, but also reports per-stratum sizes
// and picks for the strata report CSV.
corpus::DatasetManifest sample_with_report(const corpus::DatasetManifest& manifest,
                                           size_t k, uint64_t seed, size_t bins,
                                           std::vector<StratumSummary>& summary);

}  // namespace langweave::sampling
