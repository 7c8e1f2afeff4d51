#pragma once

#include <cstdint>

#include "tokred/core.hpp"

namespace tokred {

struct WorkloadConfig {
    std::size_t text_len = 40;
    std::size_t image_tokens = 145;  // patch grid plus the protected lead token
    std::size_t batch_size = 1;
    std::uint64_t seed = 7;
    double pad_fraction = 0.0;  // trailing fraction of text marked as padding

    void validate() const;
};

// Tokens for a square image: (resolution / patch_size)^2. Resolution must be
// a multiple of the patch size.
std::size_t patch_grid_tokens(std::size_t resolution, std::size_t patch_size);

// Deterministic synthetic batch: entries uniform with unit variance, scaled by
// 1/sqrt(d). The first token of each modality is protected; the trailing
// pad_fraction of text tokens is marked padding (always leaving the lead token
// real). Distinct batch indices draw from distinct streams.
TokenBatch gen_workload(const WorkloadConfig& workload, std::size_t hidden_dim,
                        std::size_t batch_index = 0);

}  // namespace tokred
