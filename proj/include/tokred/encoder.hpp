#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "tokred/core.hpp"

namespace tokred {

struct LayerWeights {
    Matrix wq, wk, wv, wo;  // d x d projections
    Matrix mlp_up;          // d x mlp_hidden
    Matrix mlp_down;        // mlp_hidden x d
    std::vector<float> ln1_scale, ln1_shift;
    std::vector<float> ln2_scale, ln2_shift;
};

// Captured between the attention and MLP sub-blocks, for the token reducer.
struct LayerArtifacts {
    Tensor3 attn_probs;  // H x N x N post-softmax; padding-key columns are zero
    Tensor3 keys;        // H x N x (d/H)
};

// Runs between attention and MLP at scheduled layers; receives the batch with
// post-attention activations and may return a reduced batch.
using ReducerHook = std::function<TokenBatch(std::size_t layer_index, TokenBatch batch,
                                             const LayerArtifacts& artifacts)>;

// Projection and MLP weights are uniform in [-1/sqrt(d), +1/sqrt(d)], drawn
// from mt19937_64 seeded with splitmix64(seed, layer) and mapped through the
// top-53-bit uniform; identical across platforms for a given seed. Layer-norm
// vectors start at identity (scale 1, shift 0).
std::vector<LayerWeights> init_model(const ModelConfig& config);

// One pre-norm block: LN -> multi-head self-attention over [text; image] with
// residual, then LN -> GELU MLP with residual. Padding text tokens are masked
// as attention keys but still updated as queries.
std::pair<TokenBatch, LayerArtifacts> forward_layer(const ModelConfig& config,
                                                    const LayerWeights& weights,
                                                    const TokenBatch& batch);

struct ForwardResult {
    TokenBatch batch;
    TokenTrajectory trajectory;
};

// Runs all layers; at layers with a schedule entry the hook is invoked between
// attention and MLP. The trajectory records the counts each sub-block saw.
ForwardResult forward_model(const ModelConfig& config, const std::vector<LayerWeights>& weights,
                            TokenBatch batch, const ReductionSchedule& schedule,
                            const ReducerHook& hook);

// Sub-tensor of attn_probs with query rows at non-padding text positions and
// key columns at image positions: H x |T_real| x |V|.
Tensor3 extract_cross_attention(const LayerArtifacts& artifacts, const TokenBatch& batch);

}  // namespace tokred
