#pragma once

#include <string>
#include <vector>

#include "tokred/core.hpp"
#include "tokred/merger.hpp"
#include "tokred/workload.hpp"

namespace tokred {

// Grid for the sweep command; the cross product of all four lists is swept.
struct SweepSpec {
    std::vector<std::vector<std::size_t>> layer_sets;
    std::vector<double> prune_ratios;
    std::vector<double> image_merge_ratios;
    std::vector<double> text_merge_ratios;

    bool empty() const { return layer_sets.empty(); }
};

struct RunConfig {
    ModelConfig model;
    WorkloadConfig workload;
    ReductionSchedule schedule;
    double bench_duration_s = 30.0;
    double bench_warmup_s = 10.0;
    merger::SimilarityMode similarity = merger::SimilarityMode::dot;
    std::string output_path;  // optional; commands fall back to stdout
    SweepSpec sweep;

    void validate() const;
};

// Flat key = value file, '#' comments. Unknown keys are rejected; parse
// errors carry the file name and line number. See the shipped configs for
// the full key set.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

merger::SimilarityMode parse_similarity(const std::string& name);
const char* similarity_name(merger::SimilarityMode mode);

}  // namespace tokred
