#include "tokred/pruner.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tokred::pruner {

SaliencyScores text_saliency(const Tensor3& cross_attn) {
    const std::size_t heads = cross_attn.d0;
    const std::size_t t_real = cross_attn.d1;
    const std::size_t v = cross_attn.d2;
    if (t_real == 0) {
        throw std::invalid_argument("text_saliency: no text tokens, saliency undefined");
    }
    // Double accumulation: the scores feed a top-k' argmax, so rounding from
    // summing H*|T| float terms must not reorder near ties.
    std::vector<double> acc(v, 0.0);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t t = 0; t < t_real; ++t) {
            const float* row = cross_attn.row(h, t);
            for (std::size_t i = 0; i < v; ++i) {
                acc[i] += row[i];
            }
        }
    }
    SaliencyScores out;
    out.scores.resize(v);
    for (std::size_t i = 0; i < v; ++i) {
        out.scores[i] = static_cast<float>(acc[i] / static_cast<double>(t_real));
    }
    return out;
}

std::vector<std::size_t> select_keep(const SaliencyScores& scores, double k,
                                     const std::vector<bool>& protected_mask) {
    const std::size_t v = scores.scores.size();
    if (protected_mask.size() != v) {
        throw std::invalid_argument("select_keep: protected mask length does not match scores");
    }
    std::size_t protected_count = 0;
    for (bool p : protected_mask) {
        protected_count += p ? 1 : 0;
    }
    const std::size_t target = kept_count(v, k, protected_count);

    std::vector<std::size_t> candidates;
    candidates.reserve(v);
    for (std::size_t i = 0; i < v; ++i) {
        if (!protected_mask[i]) {
            candidates.push_back(i);
        }
    }
    // Stable: equal scores keep the smaller original index first.
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        return scores.scores[a] > scores.scores[b];
    });

    std::vector<std::size_t> keep;
    keep.reserve(target);
    for (std::size_t i = 0; i < v; ++i) {
        if (protected_mask[i]) {
            keep.push_back(i);
        }
    }
    const std::size_t extra = target - keep.size();
    keep.insert(keep.end(), candidates.begin(),
                candidates.begin() + static_cast<std::ptrdiff_t>(extra));
    std::sort(keep.begin(), keep.end());
    return keep;
}

TokenBatch prune(const TokenBatch& batch, const std::vector<std::size_t>& keep) {
    const std::size_t v = batch.image_count();
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] >= v) {
            throw std::out_of_range("prune: keep index " + std::to_string(keep[i]) +
                                    " out of range for " + std::to_string(v) + " image tokens");
        }
        if (i > 0 && keep[i] <= keep[i - 1]) {
            throw std::invalid_argument("prune: keep indices must be sorted and unique");
        }
    }
    TokenBatch out;
    out.text = batch.text;
    out.text_orig_index = batch.text_orig_index;
    out.text_pad_mask = batch.text_pad_mask;
    out.text_protected = batch.text_protected;

    const std::size_t d = batch.image.cols;
    out.image = Matrix(keep.size(), d);
    out.image_orig_index.reserve(keep.size());
    out.image_protected.reserve(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const float* src = batch.image.row(keep[i]);
        std::copy(src, src + d, out.image.row(i));
        out.image_orig_index.push_back(batch.image_orig_index[keep[i]]);
        out.image_protected.push_back(batch.image_protected[keep[i]]);
    }
    return out;
}

}  // namespace tokred::pruner
