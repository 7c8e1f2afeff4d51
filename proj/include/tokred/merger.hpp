#pragma once

#include <vector>

#include "tokred/core.hpp"

namespace tokred::merger {

enum class SimilarityMode { dot, cosine };

// Alternating split of token positions. even_set additionally receives any
// protected token; protected tokens never emit a merge edge, so they can
// never be merged away.
struct Partition {
    std::vector<std::size_t> even_set;  // merge sources (minus protected)
    std::vector<std::size_t> odd_set;   // merge targets
};

Partition partition_alternating(std::size_t n_tokens, const std::vector<bool>& protected_mask);

// Mean over heads of the per-head key dot products; cosine mode normalizes
// each head's key first. Accumulated in double so ties are platform-stable.
double token_similarity(const Tensor3& keys, std::size_t i, std::size_t j, SimilarityMode mode);

struct MergeEdge {
    std::size_t source = 0;  // even-set token, removed if the edge is selected
    std::size_t target = 0;  // odd-set token it merges into
    double similarity = 0.0;
};

// One edge per unprotected even-set token, to its most similar odd-set token.
// Argmax ties go to the smaller target index. Empty when the odd set is empty.
std::vector<MergeEdge> build_edges(const Tensor3& keys, const Partition& partition,
                                   const std::vector<bool>& protected_mask, SimilarityMode mode);

struct MergeGraph {
    Partition partition;
    std::vector<MergeEdge> edges;
    std::vector<std::size_t> selected;  // indices into edges, highest similarity first
};

// Builds the full graph and selects the top merge_count(n, ratio) edges
// (capped by the number of available edges); selection ties go to the
// smaller source index.
MergeGraph build_merge_graph(const Tensor3& keys, std::size_t n_tokens,
                             const std::vector<bool>& protected_mask, double ratio,
                             SimilarityMode mode);

struct MergeResult {
    Matrix tokens;                                 // (n - removed) x d
    std::vector<std::vector<std::size_t>> groups;  // input rows per output row, ascending
    std::vector<std::size_t> sizes;                // constituent counts
    std::size_t removed = 0;
};

// Merges the selected edges' connected components (a target plus every source
// pointing at it) into their arithmetic mean; everything else passes through.
// Output rows are ordered by each group's smallest input index.
MergeResult bipartite_merge(const Matrix& tokens, const Tensor3& keys, double ratio,
                            const std::vector<bool>& protected_mask, SimilarityMode mode);

struct MergedBatch {
    TokenBatch batch;
    MergeResult text_merge;   // groups in current text row indices
    MergeResult image_merge;  // groups in current image row indices
};

// Applies bipartite_merge independently per modality; cross-modal merges can
// never occur. keys rows must cover the concatenated [text; image] batch.
// Group original indices collapse to the smallest constituent index; a merged
// text token is real if any constituent was real.
MergedBatch merge_batch(const TokenBatch& batch, const Tensor3& keys, double image_ratio,
                        double text_ratio, SimilarityMode mode);

}  // namespace tokred::merger
