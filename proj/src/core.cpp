#include "tokred/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tokred {

namespace {

// Slack for decimal ratios that are not exactly representable in binary;
// see kept_count / merge_count docs.
constexpr double kRatioSlack = 1e-9;

std::string entry_label(std::size_t position, const ScheduleEntry& entry) {
    return "schedule entry " + std::to_string(position) + " (layer " +
           std::to_string(entry.layer) + ")";
}

}  // namespace

std::size_t ModelConfig::mlp_hidden() const {
    return static_cast<std::size_t>(std::llround(mlp_ratio * static_cast<double>(hidden_dim)));
}

void ModelConfig::validate() const {
    if (num_layers < 1) {
        throw std::invalid_argument("model: num_layers must be >= 1");
    }
    if (hidden_dim == 0 || num_heads == 0) {
        throw std::invalid_argument("model: hidden_dim and num_heads must be > 0");
    }
    if (hidden_dim % num_heads != 0) {
        throw std::invalid_argument("model: hidden_dim " + std::to_string(hidden_dim) +
                                    " not divisible by num_heads " + std::to_string(num_heads));
    }
    if (!(mlp_ratio > 0.0)) {
        throw std::invalid_argument("model: mlp_ratio must be positive");
    }
}

const ScheduleEntry* ReductionSchedule::entry_for_layer(std::size_t layer) const {
    for (const auto& e : entries) {
        if (e.layer == layer) {
            return &e;
        }
    }
    return nullptr;
}

void validate_schedule(const ReductionSchedule& schedule, const ModelConfig& config) {
    config.validate();
    std::size_t prev_layer = 0;
    for (std::size_t i = 0; i < schedule.entries.size(); ++i) {
        const ScheduleEntry& e = schedule.entries[i];
        const std::string label = entry_label(i, e);
        if (e.layer >= config.num_layers) {
            throw std::invalid_argument(label + ": layer index >= num_layers (" +
                                        std::to_string(config.num_layers) + ")");
        }
        if (i == 0) {
            if (e.layer < 1) {
                throw std::invalid_argument(label +
                                            ": first reduction layer must be >= 1 "
                                            "(the first layer always runs unreduced)");
            }
        } else if (e.layer <= prev_layer) {
            throw std::invalid_argument(label + ": layers not increasing");
        }
        if (e.prune_ratio < 0.0 || e.prune_ratio >= 1.0) {
            throw std::invalid_argument(label + ": prune ratio out of range [0,1)");
        }
        if (e.image_merge_ratio < 0.0 || e.text_merge_ratio < 0.0) {
            throw std::invalid_argument(label + ": merge ratio out of range");
        }
        if (e.image_merge_ratio > 0.5 || e.text_merge_ratio > 0.5) {
            throw std::invalid_argument(label + ": merge ratio exceeds 0.5");
        }
        prev_layer = e.layer;
    }
}

std::size_t TokenBatch::real_text_count() const {
    std::size_t n = 0;
    for (bool real : text_pad_mask) {
        n += real ? 1 : 0;
    }
    return n;
}

void TokenBatch::validate() const {
    if (text.rows != text_orig_index.size() || text.rows != text_pad_mask.size() ||
        text.rows != text_protected.size()) {
        throw std::invalid_argument("batch: text row count does not match its index/mask lists");
    }
    if (image.rows != image_orig_index.size() || image.rows != image_protected.size()) {
        throw std::invalid_argument("batch: image row count does not match its index/mask lists");
    }
    for (std::size_t i = 1; i < text_orig_index.size(); ++i) {
        if (text_orig_index[i] <= text_orig_index[i - 1]) {
            throw std::invalid_argument("batch: text original indices not strictly increasing");
        }
    }
    for (std::size_t i = 1; i < image_orig_index.size(); ++i) {
        if (image_orig_index[i] <= image_orig_index[i - 1]) {
            throw std::invalid_argument("batch: image original indices not strictly increasing");
        }
    }
    if (text.rows > 0 &&
        std::none_of(text_protected.begin(), text_protected.end(), [](bool b) { return b; })) {
        throw std::invalid_argument("batch: nonempty text modality has no protected token");
    }
    if (image.rows > 0 &&
        std::none_of(image_protected.begin(), image_protected.end(), [](bool b) { return b; })) {
        throw std::invalid_argument("batch: nonempty image modality has no protected token");
    }
}

std::size_t kept_count(std::size_t n_tokens, double k, std::size_t protected_count) {
    const double raw = (1.0 - k) * static_cast<double>(n_tokens);
    auto rounded = static_cast<std::size_t>(std::floor(raw + 0.5 + kRatioSlack));
    rounded = std::max(rounded, protected_count);
    return std::min(rounded, n_tokens);
}

std::size_t merge_count(std::size_t n_tokens, double r) {
    const double raw = r * static_cast<double>(n_tokens);
    const auto floored = static_cast<std::size_t>(std::floor(raw + kRatioSlack));
    return std::min(floored, n_tokens / 2);
}

std::size_t merge_removed(std::size_t n_tokens, double r, std::size_t protected_count) {
    const std::size_t evens = (n_tokens + 1) / 2;
    const std::size_t protected_evens = (protected_count + 1) / 2;
    const std::size_t sources = evens > protected_evens ? evens - protected_evens : 0;
    return std::min(merge_count(n_tokens, r), sources);
}

TokenTrajectory predict_trajectory(const ModelConfig& config, const ReductionSchedule& schedule,
                                   std::size_t text0, std::size_t image0) {
    validate_schedule(schedule, config);
    TokenTrajectory trajectory;
    trajectory.layers.reserve(config.num_layers);
    std::size_t text = text0;
    std::size_t image = image0;
    for (std::size_t layer = 0; layer < config.num_layers; ++layer) {
        LayerCounts counts;
        counts.text_attn = text;
        counts.image_attn = image;
        if (const ScheduleEntry* entry = schedule.entry_for_layer(layer)) {
            const std::size_t image_kept = kept_count(image, entry->prune_ratio, 1);
            image = image_kept - merge_removed(image_kept, entry->image_merge_ratio, 1);
            text = text - merge_removed(text, entry->text_merge_ratio, 1);
        }
        counts.text_mlp = text;
        counts.image_mlp = image;
        trajectory.layers.push_back(counts);
    }
    return trajectory;
}

}  // namespace tokred
