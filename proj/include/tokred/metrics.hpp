#pragma once

#include <cstdint>
#include <vector>

#include "tokred/core.hpp"
#include "tokred/encoder.hpp"
#include "tokred/merger.hpp"

namespace tokred::metrics {

// Analytic cost of one configuration against its unreduced baseline. MACs are
// reported one-to-one as FLOPs. Activation elements are counted per layer
// (attention matrices H*N^2, QKVO plus residual rows 8*N*d, MLP hidden
// buffer); the peak is the largest single layer, the total sums all layers
// and is what the memory-reduction ratio is computed from, since the early
// unreduced layers pin the per-layer peak to the baseline value.
struct CostReport {
    std::uint64_t total_macs = 0;
    std::vector<std::uint64_t> per_layer_macs;
    std::uint64_t baseline_total_macs = 0;
    double mac_speedup = 1.0;  // baseline_total_macs / total_macs
    std::uint64_t peak_activation_elements = 0;
    std::uint64_t baseline_peak_activation_elements = 0;
    std::uint64_t total_activation_elements = 0;
    std::uint64_t baseline_total_activation_elements = 0;
    double memory_reduction = 0.0;  // 1 - total / baseline_total
};

// 4*N_attn*d^2 (QKVO) + 2*N_attn^2*d (score and value matmuls) +
// 2*N_mlp*d*mlp_hidden (MLP up+down). Softmax, norms and GELU are excluded.
std::uint64_t layer_macs(std::size_t hidden_dim, std::size_t mlp_hidden, std::size_t n_attn,
                         std::size_t n_mlp);

// Sums layer_macs over the trajectory; the baseline uses the layer-0 counts
// held constant across all layers.
CostReport model_macs(const ModelConfig& config, const TokenTrajectory& trajectory);

// Peak per-layer activation working set, in elements.
std::uint64_t activation_memory(const ModelConfig& config, const TokenTrajectory& trajectory);

struct BenchOptions {
    double duration_s = 30.0;
    double warmup_s = 10.0;
    std::size_t threads = 1;  // >1 runs independent batches on worker threads
    merger::SimilarityMode similarity = merger::SimilarityMode::dot;
};

struct BenchResult {
    double baseline_examples_per_s = 0.0;
    double reduced_examples_per_s = 0.0;
    double speedup = 0.0;
    std::uint64_t baseline_examples = 0;
    std::uint64_t reduced_examples = 0;
};

// Measures examples/second over repeated forward passes of the given batches,
// once without reduction and once with the schedule, traces disabled. Each
// phase warms up for warmup_s, then counts completed examples against a
// monotonic clock; elapsed time is taken at the last completion, so the
// throughput stays exact even when few examples fit in the window.
BenchResult benchmark(const ModelConfig& config, const std::vector<LayerWeights>& weights,
                      const std::vector<TokenBatch>& batches, const ReductionSchedule& schedule,
                      const BenchOptions& options);

}  // namespace tokred::metrics
