#include "tokred/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace tokred {

namespace {

void fill_uniform(Matrix& m, std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                  float bound) {
    m = Matrix(rows, cols);
    for (float& v : m.data) {
        v = static_cast<float>((2.0 * u53(rng()) - 1.0) * bound);
    }
}

Matrix concat_tokens(const TokenBatch& batch) {
    const std::size_t d = batch.text.rows > 0 ? batch.text.cols : batch.image.cols;
    Matrix x(batch.total_count(), d);
    std::copy(batch.text.data.begin(), batch.text.data.end(), x.data.begin());
    std::copy(batch.image.data.begin(), batch.image.data.end(),
              x.data.begin() + static_cast<std::ptrdiff_t>(batch.text.data.size()));
    return x;
}

void split_tokens(const Matrix& x, TokenBatch& batch) {
    const std::size_t t_elems = batch.text.data.size();
    std::copy(x.data.begin(), x.data.begin() + static_cast<std::ptrdiff_t>(t_elems),
              batch.text.data.begin());
    std::copy(x.data.begin() + static_cast<std::ptrdiff_t>(t_elems), x.data.end(),
              batch.image.data.begin());
}

void check_finite(const Matrix& x, std::size_t layer_index, const char* stage) {
    for (float v : x.data) {
        if (!std::isfinite(v)) {
            throw std::runtime_error("non-finite activation in layer " +
                                     std::to_string(layer_index) + " after " + stage);
        }
    }
}

struct LayerRun {
    TokenBatch batch;
    LayerArtifacts artifacts;
    LayerCounts counts;
};

LayerRun run_layer(const ModelConfig& config, const LayerWeights& weights, TokenBatch batch,
                   std::size_t layer_index, const ReducerHook* hook) {
    const std::size_t n = batch.total_count();
    if (n == 0) {
        throw std::invalid_argument("forward_layer: empty batch");
    }
    if (batch.text_pad_mask.size() != batch.text_count()) {
        throw std::invalid_argument("forward_layer: padding mask length does not match text count");
    }
    const std::size_t d = config.hidden_dim;
    const std::size_t heads = config.num_heads;
    const std::size_t dh = config.head_dim();
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));

    LayerRun out;
    out.counts.text_attn = batch.text_count();
    out.counts.image_attn = batch.image_count();

    Matrix x = concat_tokens(batch);

    Matrix normed = x;
    for (std::size_t i = 0; i < n; ++i) {
        layer_norm_row(normed.row(i), d, weights.ln1_scale.data(), weights.ln1_shift.data());
    }

    Matrix q, k, v;
    matmul(normed, weights.wq, q);
    matmul(normed, weights.wk, k);
    matmul(normed, weights.wv, v);

    out.artifacts.keys = Tensor3(heads, n, dh);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < n; ++i) {
            const float* src = k.row(i) + h * dh;
            std::copy(src, src + dh, out.artifacts.keys.row(h, i));
        }
    }

    // Padding text tokens are invisible as keys; image tokens never mask.
    std::vector<unsigned char> key_masked(n, 0);
    for (std::size_t i = 0; i < batch.text_count(); ++i) {
        key_masked[i] = batch.text_pad_mask[i] ? 0 : 1;
    }

    out.artifacts.attn_probs = Tensor3(heads, n, n);
    constexpr float neg_inf = -std::numeric_limits<float>::infinity();
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < n; ++i) {
            float* prow = out.artifacts.attn_probs.row(h, i);
            const float* qi = q.row(i) + h * dh;
            for (std::size_t j = 0; j < n; ++j) {
                prow[j] = key_masked[j] ? neg_inf : dot(qi, k.row(j) + h * dh, dh) * scale;
            }
            softmax_row(prow, n);
        }
    }

    Matrix ctx(n, d);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < n; ++i) {
            const float* prow = out.artifacts.attn_probs.row(h, i);
            float* crow = ctx.row(i) + h * dh;
            for (std::size_t j = 0; j < n; ++j) {
                const float p = prow[j];
                const float* vrow = v.row(j) + h * dh;
                for (std::size_t c = 0; c < dh; ++c) {
                    crow[c] += p * vrow[c];
                }
            }
        }
    }

    Matrix attn_out;
    matmul(ctx, weights.wo, attn_out);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        x.data[i] += attn_out.data[i];
    }
    split_tokens(x, batch);

    if (hook != nullptr && *hook) {
        batch = (*hook)(layer_index, std::move(batch), out.artifacts);
    }
    out.counts.text_mlp = batch.text_count();
    out.counts.image_mlp = batch.image_count();

    Matrix x2 = concat_tokens(batch);
    Matrix normed2 = x2;
    const std::size_t n2 = x2.rows;
    for (std::size_t i = 0; i < n2; ++i) {
        layer_norm_row(normed2.row(i), d, weights.ln2_scale.data(), weights.ln2_shift.data());
    }
    Matrix hidden;
    matmul(normed2, weights.mlp_up, hidden);
    for (float& hval : hidden.data) {
        hval = gelu(hval);
    }
    Matrix mlp_out;
    matmul(hidden, weights.mlp_down, mlp_out);
    for (std::size_t i = 0; i < x2.data.size(); ++i) {
        x2.data[i] += mlp_out.data[i];
    }
    check_finite(x2, layer_index, "mlp");
    split_tokens(x2, batch);

    out.batch = std::move(batch);
    return out;
}

}  // namespace

std::vector<LayerWeights> init_model(const ModelConfig& config) {
    config.validate();
    const std::size_t d = config.hidden_dim;
    const std::size_t mh = config.mlp_hidden();
    const float bound = 1.0f / std::sqrt(static_cast<float>(d));

    std::vector<LayerWeights> layers(config.num_layers);
    for (std::size_t l = 0; l < config.num_layers; ++l) {
        std::mt19937_64 rng(mix_seed(config.seed, l));
        LayerWeights& w = layers[l];
        fill_uniform(w.wq, d, d, rng, bound);
        fill_uniform(w.wk, d, d, rng, bound);
        fill_uniform(w.wv, d, d, rng, bound);
        fill_uniform(w.wo, d, d, rng, bound);
        fill_uniform(w.mlp_up, d, mh, rng, bound);
        fill_uniform(w.mlp_down, mh, d, rng, bound);
        w.ln1_scale.assign(d, 1.0f);
        w.ln1_shift.assign(d, 0.0f);
        w.ln2_scale.assign(d, 1.0f);
        w.ln2_shift.assign(d, 0.0f);
    }
    return layers;
}

std::pair<TokenBatch, LayerArtifacts> forward_layer(const ModelConfig& config,
                                                    const LayerWeights& weights,
                                                    const TokenBatch& batch) {
    LayerRun run = run_layer(config, weights, batch, 0, nullptr);
    return {std::move(run.batch), std::move(run.artifacts)};
}

ForwardResult forward_model(const ModelConfig& config, const std::vector<LayerWeights>& weights,
                            TokenBatch batch, const ReductionSchedule& schedule,
                            const ReducerHook& hook) {
    validate_schedule(schedule, config);
    batch.validate();
    if (weights.size() != config.num_layers) {
        throw std::invalid_argument("forward_model: weight count does not match num_layers");
    }

    ForwardResult result;
    result.trajectory.layers.reserve(config.num_layers);
    for (std::size_t l = 0; l < config.num_layers; ++l) {
        const bool scheduled = schedule.entry_for_layer(l) != nullptr;
        LayerRun run =
            run_layer(config, weights[l], std::move(batch), l, scheduled ? &hook : nullptr);
        batch = std::move(run.batch);
        result.trajectory.layers.push_back(run.counts);
    }
    result.batch = std::move(batch);
    return result;
}

Tensor3 extract_cross_attention(const LayerArtifacts& artifacts, const TokenBatch& batch) {
    const std::size_t n = batch.total_count();
    const std::size_t t = batch.text_count();
    const std::size_t v = batch.image_count();
    if (artifacts.attn_probs.d1 != n || artifacts.attn_probs.d2 != n) {
        throw std::invalid_argument("extract_cross_attention: artifacts shape does not match batch");
    }
    std::vector<std::size_t> real_rows;
    real_rows.reserve(t);
    for (std::size_t i = 0; i < t; ++i) {
        if (batch.text_pad_mask[i]) {
            real_rows.push_back(i);
        }
    }
    if (real_rows.empty()) {
        throw std::invalid_argument("extract_cross_attention: no real text tokens");
    }
    const std::size_t heads = artifacts.attn_probs.d0;
    Tensor3 cross(heads, real_rows.size(), v);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t r = 0; r < real_rows.size(); ++r) {
            const float* src = artifacts.attn_probs.row(h, real_rows[r]) + t;
            std::copy(src, src + v, cross.row(h, r));
        }
    }
    return cross;
}

}  // namespace tokred
