#pragma once

#include <vector>

#include "tokred/core.hpp"

namespace tokred::pruner {

// Per-image-token text-saliency: attention mass received from real text
// queries, summed over heads, averaged over text tokens. Each score lies in
// [0, heads].
struct SaliencyScores {
    std::vector<float> scores;  // length |V|, aligned with image token order
};

// cross_attn is H x |T_real| x |V| as produced by extract_cross_attention.
SaliencyScores text_saliency(const Tensor3& cross_attn);

// Indices of the kept image tokens, sorted ascending. Exactly
// kept_count(|V|, k, #protected) indices: every protected index plus the
// highest-scoring others, ties broken toward the smaller index.
std::vector<std::size_t> select_keep(const SaliencyScores& scores, double k,
                                     const std::vector<bool>& protected_mask);

// Drops all image tokens not listed in keep; text is untouched. keep must be
// sorted, unique and in range.
TokenBatch prune(const TokenBatch& batch, const std::vector<std::size_t>& keep);

}  // namespace tokred::pruner
