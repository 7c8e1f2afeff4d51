#include "tokred/reducer.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "tokred/pruner.hpp"

namespace tokred::reducer {

namespace {

std::vector<std::vector<std::size_t>> map_groups(
    const std::vector<std::vector<std::size_t>>& groups,
    const std::vector<std::size_t>& orig_index) {
    std::vector<std::vector<std::size_t>> mapped;
    mapped.reserve(groups.size());
    for (const auto& group : groups) {
        std::vector<std::size_t> ids;
        ids.reserve(group.size());
        for (std::size_t row : group) {
            ids.push_back(orig_index[row]);
        }
        mapped.push_back(std::move(ids));
    }
    return mapped;
}

}  // namespace

ReduceResult reduce(const TokenBatch& batch, const LayerArtifacts& artifacts,
                    const ScheduleEntry& entry, merger::SimilarityMode mode) {
    const std::size_t text_n = batch.text_count();
    const std::size_t image_n = batch.image_count();

    ReduceResult result;
    result.trace.layer_index = entry.layer;
    result.trace.text_before = text_n;
    result.trace.image_before = image_n;

    std::vector<std::size_t> keep;
    if (entry.prune_ratio > 0.0) {
        const Tensor3 cross = extract_cross_attention(artifacts, batch);
        const pruner::SaliencyScores scores = pruner::text_saliency(cross);
        keep = pruner::select_keep(scores, entry.prune_ratio, batch.image_protected);
    } else {
        keep.resize(image_n);
        std::iota(keep.begin(), keep.end(), 0);
    }
    for (std::size_t i = 0, k = 0; i < image_n; ++i) {
        if (k < keep.size() && keep[k] == i) {
            ++k;
        } else {
            result.trace.pruned_image_orig.push_back(batch.image_orig_index[i]);
        }
    }
    TokenBatch pruned = pruner::prune(batch, keep);
    result.trace.image_after_prune = pruned.image_count();

    // Key rows for survivors: text rows are unchanged, image rows map through
    // the keep list with the text offset.
    const std::size_t heads = artifacts.keys.d0;
    const std::size_t dh = artifacts.keys.d2;
    Tensor3 keys(heads, text_n + keep.size(), dh);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < text_n; ++i) {
            const float* src = artifacts.keys.row(h, i);
            std::copy(src, src + dh, keys.row(h, i));
        }
        for (std::size_t i = 0; i < keep.size(); ++i) {
            const float* src = artifacts.keys.row(h, text_n + keep[i]);
            std::copy(src, src + dh, keys.row(h, text_n + i));
        }
    }

    merger::MergedBatch merged =
        merger::merge_batch(pruned, keys, entry.image_merge_ratio, entry.text_merge_ratio, mode);
    result.trace.text_groups = map_groups(merged.text_merge.groups, pruned.text_orig_index);
    result.trace.image_groups = map_groups(merged.image_merge.groups, pruned.image_orig_index);
    result.trace.text_after_merge = merged.batch.text_count();
    result.trace.image_after_merge = merged.batch.image_count();
    result.batch = std::move(merged.batch);
    return result;
}

AttachedReducer attach(const ReductionSchedule& schedule, merger::SimilarityMode mode,
                       bool keep_traces) {
    AttachedReducer attached;
    if (keep_traces) {
        attached.traces = std::make_shared<std::vector<ReductionTrace>>();
    }
    auto traces = attached.traces;
    attached.hook = [schedule, mode, traces](std::size_t layer_index, TokenBatch batch,
                                             const LayerArtifacts& artifacts) -> TokenBatch {
        const ScheduleEntry* entry = schedule.entry_for_layer(layer_index);
        if (entry == nullptr) {
            return batch;
        }
        ReduceResult result = reduce(batch, artifacts, *entry, mode);
        if (traces) {
            traces->push_back(std::move(result.trace));
        }
        return std::move(result.batch);
    };
    return attached;
}

}  // namespace tokred::reducer
