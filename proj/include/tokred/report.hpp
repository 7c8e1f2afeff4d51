#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tokred/config.hpp"
#include "tokred/metrics.hpp"
#include "tokred/reducer.hpp"

namespace tokred::report {

using Json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

struct SimulateReport {
    ModelConfig model;
    WorkloadConfig workload;
    merger::SimilarityMode similarity = merger::SimilarityMode::dot;
    ReductionSchedule schedule;
    TokenTrajectory trajectory;
    metrics::CostReport cost;
};

struct BenchEnvironment {
    std::size_t threads = 1;
    double duration_s = 0.0;
    double warmup_s = 0.0;
    std::string timestamp_utc;
};

struct BenchReport {
    SimulateReport analytic;
    metrics::BenchResult throughput;
    BenchEnvironment environment;
};

struct TraceReport {
    ModelConfig model;
    WorkloadConfig workload;
    merger::SimilarityMode similarity = merger::SimilarityMode::dot;
    ReductionSchedule schedule;
    std::size_t initial_text = 0;
    std::size_t initial_image = 0;
    std::size_t final_text = 0;
    std::size_t final_image = 0;
    std::optional<std::size_t> grid_width;  // patch coordinates are emitted when set
    std::vector<reducer::ReductionTrace> traces;
};

Json to_json(const SimulateReport& r);
Json to_json(const BenchReport& r);
Json to_json(const TraceReport& r);

// Strict loaders: wrong schema_version or missing fields throw. Re-emitting a
// loaded report reproduces the original document byte for byte.
SimulateReport simulate_from_json(const Json& j);
BenchReport bench_from_json(const Json& j);
TraceReport trace_from_json(const Json& j);

}  // namespace tokred::report
