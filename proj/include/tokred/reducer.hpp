#pragma once

#include <memory>
#include <vector>

#include "tokred/encoder.hpp"
#include "tokred/merger.hpp"

namespace tokred::reducer {

// Full audit record of one reduction step, in original token indices.
struct ReductionTrace {
    std::size_t layer_index = 0;
    std::vector<std::size_t> pruned_image_orig;
    std::vector<std::vector<std::size_t>> image_groups;  // original image indices per output
    std::vector<std::vector<std::size_t>> text_groups;   // original text indices per output
    std::size_t image_before = 0;
    std::size_t image_after_prune = 0;
    std::size_t image_after_merge = 0;
    std::size_t text_before = 0;
    std::size_t text_after_merge = 0;
};

struct ReduceResult {
    TokenBatch batch;
    ReductionTrace trace;
};

// One reduction step, in order: text-saliency scoring, top-k' keep, prune,
// then per-modality bipartite merging over the surviving tokens. Keys for the
// image merge are gathered after pruning, so pruned tokens cannot take part.
ReduceResult reduce(const TokenBatch& batch, const LayerArtifacts& artifacts,
                    const ScheduleEntry& entry, merger::SimilarityMode mode);

struct AttachedReducer {
    ReducerHook hook;
    // Populated in layer order when tracing is on; null otherwise (benchmark
    // mode skips trace collection entirely).
    std::shared_ptr<std::vector<ReductionTrace>> traces;
};

// Hook for encoder::forward_model that fires at scheduled layers and is a
// no-op elsewhere. Stateless apart from trace accumulation.
AttachedReducer attach(const ReductionSchedule& schedule, merger::SimilarityMode mode,
                       bool keep_traces);

}  // namespace tokred::reducer
