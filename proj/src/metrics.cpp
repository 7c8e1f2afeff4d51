#include "tokred/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <thread>

#include "tokred/reducer.hpp"

namespace tokred::metrics {

namespace {

std::uint64_t layer_activation_elements(std::size_t hidden_dim, std::size_t num_heads,
                                        std::size_t mlp_hidden, std::size_t n_attn,
                                        std::size_t n_mlp) {
    const auto d = static_cast<std::uint64_t>(hidden_dim);
    const auto h = static_cast<std::uint64_t>(num_heads);
    const auto na = static_cast<std::uint64_t>(n_attn);
    const auto nm = static_cast<std::uint64_t>(n_mlp);
    return h * na * na + 8 * na * d + nm * static_cast<std::uint64_t>(mlp_hidden);
}

}  // namespace

std::uint64_t layer_macs(std::size_t hidden_dim, std::size_t mlp_hidden, std::size_t n_attn,
                         std::size_t n_mlp) {
    const auto d = static_cast<std::uint64_t>(hidden_dim);
    const auto na = static_cast<std::uint64_t>(n_attn);
    const auto nm = static_cast<std::uint64_t>(n_mlp);
    return 4 * na * d * d + 2 * na * na * d + 2 * nm * d * static_cast<std::uint64_t>(mlp_hidden);
}

CostReport model_macs(const ModelConfig& config, const TokenTrajectory& trajectory) {
    config.validate();
    if (trajectory.layers.size() != config.num_layers) {
        throw std::invalid_argument("model_macs: trajectory layer count does not match config");
    }
    const std::size_t d = config.hidden_dim;
    const std::size_t mh = config.mlp_hidden();
    const std::size_t n0 = trajectory.layers.front().attn_total();

    CostReport report;
    report.per_layer_macs.reserve(config.num_layers);
    const std::uint64_t baseline_layer = layer_macs(d, mh, n0, n0);
    const std::uint64_t baseline_elems =
        layer_activation_elements(d, config.num_heads, mh, n0, n0);
    for (const LayerCounts& counts : trajectory.layers) {
        const std::uint64_t macs = layer_macs(d, mh, counts.attn_total(), counts.mlp_total());
        report.per_layer_macs.push_back(macs);
        report.total_macs += macs;
        report.baseline_total_macs += baseline_layer;

        const std::uint64_t elems = layer_activation_elements(d, config.num_heads, mh,
                                                              counts.attn_total(),
                                                              counts.mlp_total());
        report.peak_activation_elements = std::max(report.peak_activation_elements, elems);
        report.total_activation_elements += elems;
        report.baseline_total_activation_elements += baseline_elems;
    }
    report.baseline_peak_activation_elements = baseline_elems;
    report.mac_speedup = static_cast<double>(report.baseline_total_macs) /
                         static_cast<double>(report.total_macs);
    report.memory_reduction = 1.0 - static_cast<double>(report.total_activation_elements) /
                                        static_cast<double>(report.baseline_total_activation_elements);
    return report;
}

std::uint64_t activation_memory(const ModelConfig& config, const TokenTrajectory& trajectory) {
    const std::size_t mh = config.mlp_hidden();
    std::uint64_t peak = 0;
    for (const LayerCounts& counts : trajectory.layers) {
        peak = std::max(peak, layer_activation_elements(config.hidden_dim, config.num_heads, mh,
                                                        counts.attn_total(), counts.mlp_total()));
    }
    return peak;
}

namespace {

struct PhaseResult {
    std::uint64_t examples = 0;
    double examples_per_s = 0.0;
};

PhaseResult run_slice_worker(const ModelConfig& config, const std::vector<LayerWeights>& weights,
                             const std::vector<TokenBatch>& batches,
                             const ReductionSchedule& schedule, const ReducerHook& hook,
                             double seconds) {
    using clock = std::chrono::steady_clock;
    std::size_t next = 0;
    PhaseResult result;
    const auto start = clock::now();
    double elapsed = 0.0;
    do {
        (void)forward_model(config, weights, batches[next], schedule, hook);
        next = (next + 1) % batches.size();
        ++result.examples;
        elapsed = std::chrono::duration<double>(clock::now() - start).count();
    } while (elapsed < seconds);
    // Elapsed is taken at the last completion, so the rate stays exact even
    // when only a few examples fit into the slice.
    result.examples_per_s = static_cast<double>(result.examples) / elapsed;
    return result;
}

PhaseResult run_slice(const ModelConfig& config, const std::vector<LayerWeights>& weights,
                      const std::vector<TokenBatch>& batches, const ReductionSchedule& schedule,
                      const ReducerHook& hook, double seconds, std::size_t threads) {
    if (threads <= 1) {
        return run_slice_worker(config, weights, batches, schedule, hook, seconds);
    }
    std::vector<PhaseResult> partial(threads);
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
            partial[t] = run_slice_worker(config, weights, batches, schedule, hook, seconds);
        });
    }
    for (auto& w : workers) {
        w.join();
    }
    PhaseResult total;
    for (const PhaseResult& p : partial) {
        total.examples += p.examples;
        total.examples_per_s += p.examples_per_s;
    }
    return total;
}

}  // namespace

BenchResult benchmark(const ModelConfig& config, const std::vector<LayerWeights>& weights,
                      const std::vector<TokenBatch>& batches, const ReductionSchedule& schedule,
                      const BenchOptions& options) {
    if (options.duration_s < 1.0) {
        throw std::invalid_argument("benchmark: duration must be >= 1 s");
    }
    if (options.warmup_s < 0.0) {
        throw std::invalid_argument("benchmark: warmup must be >= 0 s");
    }
    if (batches.empty()) {
        throw std::invalid_argument("benchmark: no workload batches");
    }
    validate_schedule(schedule, config);

    const ReductionSchedule no_reduction;
    const ReducerHook null_hook = reducer::attach(no_reduction, options.similarity, false).hook;
    const ReducerHook reduce_hook = reducer::attach(schedule, options.similarity, false).hook;

    // Measure the two configurations in short interleaved slices with the
    // in-pair order alternating (BR RB BR RB). Machine-level disturbances
    // such as frequency ramps or scheduler quota throttling then land on
    // both sides nearly equally, where a plain phase-after-phase measurement
    // credits them entirely to one configuration.
    if (options.warmup_s > 0.0) {
        run_slice(config, weights, batches, no_reduction, null_hook, options.warmup_s / 2,
                  options.threads);
        run_slice(config, weights, batches, schedule, reduce_hook, options.warmup_s / 2,
                  options.threads);
    }

    constexpr int rounds = 4;
    const double slice_s = options.duration_s / rounds;
    auto measure_baseline = [&] {
        return run_slice(config, weights, batches, no_reduction, null_hook, slice_s,
                         options.threads);
    };
    auto measure_reduced = [&] {
        return run_slice(config, weights, batches, schedule, reduce_hook, slice_s,
                         options.threads);
    };

    BenchResult result;
    for (int round = 0; round < rounds; ++round) {
        PhaseResult base, reduced;
        if (round % 2 == 0) {
            base = measure_baseline();
            reduced = measure_reduced();
        } else {
            reduced = measure_reduced();
            base = measure_baseline();
        }
        result.baseline_examples += base.examples;
        result.reduced_examples += reduced.examples;
        result.baseline_examples_per_s += base.examples_per_s / rounds;
        result.reduced_examples_per_s += reduced.examples_per_s / rounds;
    }
    result.speedup = result.reduced_examples_per_s / result.baseline_examples_per_s;
    return result;
}

}  // namespace tokred::metrics
