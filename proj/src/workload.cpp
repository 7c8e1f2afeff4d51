#include "tokred/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace tokred {

void WorkloadConfig::validate() const {
    if (text_len == 0 || image_tokens == 0) {
        throw std::invalid_argument("workload: text_len and image_tokens must be > 0");
    }
    if (batch_size == 0) {
        throw std::invalid_argument("workload: batch_size must be > 0");
    }
    if (pad_fraction < 0.0 || pad_fraction >= 1.0) {
        throw std::invalid_argument("workload: pad_fraction out of range [0,1)");
    }
}

std::size_t patch_grid_tokens(std::size_t resolution, std::size_t patch_size) {
    if (patch_size == 0 || resolution % patch_size != 0) {
        throw std::invalid_argument("patch_grid_tokens: resolution " + std::to_string(resolution) +
                                    " is not a multiple of patch size " +
                                    std::to_string(patch_size));
    }
    const std::size_t side = resolution / patch_size;
    return side * side;
}

namespace {

// Uniform over [-sqrt(3), sqrt(3)] has unit variance.
constexpr double kUnitVarianceHalfWidth = 1.7320508075688772;

void fill_tokens(Matrix& m, std::mt19937_64& rng, double scale) {
    for (float& v : m.data) {
        v = static_cast<float>((2.0 * u53(rng()) - 1.0) * kUnitVarianceHalfWidth * scale);
    }
}

}  // namespace

TokenBatch gen_workload(const WorkloadConfig& workload, std::size_t hidden_dim,
                        std::size_t batch_index) {
    workload.validate();
    if (hidden_dim == 0) {
        throw std::invalid_argument("gen_workload: hidden_dim must be > 0");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(hidden_dim));

    TokenBatch batch;
    batch.text = Matrix(workload.text_len, hidden_dim);
    batch.image = Matrix(workload.image_tokens, hidden_dim);
    std::mt19937_64 text_rng(mix_seed(workload.seed, 2 * batch_index));
    std::mt19937_64 image_rng(mix_seed(workload.seed, 2 * batch_index + 1));
    fill_tokens(batch.text, text_rng, scale);
    fill_tokens(batch.image, image_rng, scale);

    batch.text_orig_index.resize(workload.text_len);
    std::iota(batch.text_orig_index.begin(), batch.text_orig_index.end(), 0);
    batch.image_orig_index.resize(workload.image_tokens);
    std::iota(batch.image_orig_index.begin(), batch.image_orig_index.end(), 0);

    auto n_pad = static_cast<std::size_t>(
        std::floor(workload.pad_fraction * static_cast<double>(workload.text_len)));
    n_pad = std::min(n_pad, workload.text_len - 1);
    batch.text_pad_mask.assign(workload.text_len, true);
    for (std::size_t i = workload.text_len - n_pad; i < workload.text_len; ++i) {
        batch.text_pad_mask[i] = false;
    }

    batch.text_protected.assign(workload.text_len, false);
    batch.text_protected[0] = true;
    batch.image_protected.assign(workload.image_tokens, false);
    batch.image_protected[0] = true;

    batch.validate();
    return batch;
}

}  // namespace tokred
