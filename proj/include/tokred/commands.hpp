#pragma once

#include <optional>
#include <string>

#include "tokred/report.hpp"

namespace tokred {

// Analytic trajectory and cost model; no encoder run.
report::SimulateReport make_simulate_report(const RunConfig& config);

// Measured throughput (baseline vs. reduced) plus the analytic report.
report::BenchReport make_bench_report(const RunConfig& config, std::size_t threads);

// One traced forward pass; grid_width adds patch coordinates per image token.
report::TraceReport make_trace_report(const RunConfig& config,
                                      std::optional<std::size_t> grid_width);

// Cross product of the config's sweep lists, one CSV row per combination.
std::string sweep_csv(const RunConfig& config);

}  // namespace tokred
