#pragma once

#include <cstdint>
#include <vector>

#include "tokred/linalg.hpp"

namespace tokred {

struct ModelConfig {
    std::size_t num_layers = 12;
    std::size_t hidden_dim = 768;
    std::size_t num_heads = 12;
    double mlp_ratio = 4.0;  // feed-forward expansion
    std::uint64_t seed = 1;  // weight generation seed

    std::size_t head_dim() const { return hidden_dim / num_heads; }
    std::size_t mlp_hidden() const;

    // Throws std::invalid_argument on any broken invariant.
    void validate() const;
};

// One reduction point: at layer `layer`, prune a fraction k of the image
// tokens, then merge fractions r / t of the surviving image / text tokens.
struct ScheduleEntry {
    std::size_t layer = 0;
    double prune_ratio = 0.0;        // k in [0,1)
    double image_merge_ratio = 0.0;  // r in [0,0.5]
    double text_merge_ratio = 0.0;   // t in [0,0.5]

    bool is_identity() const {
        return prune_ratio == 0.0 && image_merge_ratio == 0.0 && text_merge_ratio == 0.0;
    }
};

struct ReductionSchedule {
    std::vector<ScheduleEntry> entries;  // strictly increasing layer indices

    bool empty() const { return entries.empty(); }
    const ScheduleEntry* entry_for_layer(std::size_t layer) const;
};

void validate_schedule(const ReductionSchedule& schedule, const ModelConfig& config);

// The live token set flowing through the encoder. Text and image tokens are
// kept separate; the encoder concatenates them as [text; image] per layer.
struct TokenBatch {
    Matrix text;   // |T| x d
    Matrix image;  // |V| x d
    std::vector<std::size_t> text_orig_index;   // strictly increasing
    std::vector<std::size_t> image_orig_index;  // strictly increasing
    std::vector<bool> text_pad_mask;  // true = real token, false = padding
    std::vector<bool> text_protected;
    std::vector<bool> image_protected;

    std::size_t text_count() const { return text.rows; }
    std::size_t image_count() const { return image.rows; }
    std::size_t total_count() const { return text.rows + image.rows; }
    std::size_t real_text_count() const;

    void validate() const;
};

// Per-layer live token counts, split at the attention/MLP boundary (the
// reducer runs between the two sub-blocks, so they can see different counts).
struct LayerCounts {
    std::size_t text_attn = 0;
    std::size_t image_attn = 0;
    std::size_t text_mlp = 0;
    std::size_t image_mlp = 0;

    std::size_t attn_total() const { return text_attn + image_attn; }
    std::size_t mlp_total() const { return text_mlp + image_mlp; }

    bool operator==(const LayerCounts&) const = default;
};

struct TokenTrajectory {
    std::vector<LayerCounts> layers;

    bool operator==(const TokenTrajectory&) const = default;
};

// Tokens kept when pruning n_tokens at ratio k: round-half-up of (1-k)*n,
// never below protected_count, never above n. The +1e-9 slack absorbs the
// binary representation error of decimal ratios (0.3*130 must floor as 39).
std::size_t kept_count(std::size_t n_tokens, double k, std::size_t protected_count = 1);

// Tokens removed by one bipartite merge at ratio r: floor(r*n), capped at
// floor(n/2) since each removal consumes a disjoint matched pair.
std::size_t merge_count(std::size_t n_tokens, double r);

// Effective removal when protected tokens occupy the leading positions: the
// alternating split leaves ceil(n/2) - ceil(p/2) merge sources, which caps
// the removal below merge_count when r is at its 0.5 bound.
std::size_t merge_removed(std::size_t n_tokens, double r, std::size_t protected_count);

// Closed-form token counts per layer for a validated schedule, assuming one
// protected token per modality (as produced by the workload generator).
// Matches the counts observed by an actual encoder run, integer for integer.
TokenTrajectory predict_trajectory(const ModelConfig& config, const ReductionSchedule& schedule,
                                   std::size_t text0, std::size_t image0);

}  // namespace tokred
