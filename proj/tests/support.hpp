#pragma once

// Shared helpers for the test suites: input builders plus the independent
// reference implementations (saliency triple loop, exhaustive merge) that the
// production paths are checked against. Nothing here calls into the code
// under test except through its public surface.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "tokred/core.hpp"
#include "tokred/merger.hpp"

namespace testsupport {

// keys[h][i] is one head's key vector for token i.
inline tokred::Tensor3 make_keys(
    const std::vector<std::vector<std::vector<float>>>& per_head) {
    const std::size_t heads = per_head.size();
    const std::size_t n = per_head.front().size();
    const std::size_t dh = per_head.front().front().size();
    tokred::Tensor3 keys(heads, n, dh);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < n; ++i) {
            std::copy(per_head[h][i].begin(), per_head[h][i].end(), keys.row(h, i));
        }
    }
    return keys;
}

inline tokred::Matrix make_matrix(const std::vector<std::vector<float>>& rows) {
    tokred::Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy(rows[i].begin(), rows[i].end(), m.row(i));
    }
    return m;
}

// Plain triple loop over heads, text rows and image columns.
inline std::vector<double> saliency_oracle(const tokred::Tensor3& cross) {
    std::vector<double> scores(cross.d2, 0.0);
    for (std::size_t v = 0; v < cross.d2; ++v) {
        double sum = 0.0;
        for (std::size_t h = 0; h < cross.d0; ++h) {
            for (std::size_t t = 0; t < cross.d1; ++t) {
                sum += cross.at(h, t, v);
            }
        }
        scores[v] = sum / static_cast<double>(cross.d1);
    }
    return scores;
}

// Exhaustive merge reference: full n x n similarity matrix, per-source row
// argmax, candidate sort, then explicit union-find over the selected edges.
class MergeOracle {
public:
    MergeOracle(const tokred::Tensor3& keys, const std::vector<bool>& protect, double ratio,
                tokred::merger::SimilarityMode mode) {
        const std::size_t n = keys.d1;
        std::vector<std::vector<double>> sim(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                sim[i][j] = similarity(keys, i, j, mode);
            }
        }

        std::vector<bool> is_target(n, false);
        std::vector<std::size_t> targets;
        for (std::size_t i = 0; i < n; ++i) {
            if (i % 2 == 1 && !protect[i]) {
                is_target[i] = true;
                targets.push_back(i);
            }
        }

        struct Edge {
            std::size_t source, target;
            double sim;
        };
        std::vector<Edge> edges;
        if (!targets.empty()) {
            for (std::size_t i = 0; i < n; ++i) {
                if (is_target[i] || protect[i]) {
                    continue;
                }
                Edge best{i, targets[0], sim[i][targets[0]]};
                for (std::size_t t : targets) {
                    if (sim[i][t] > best.sim) {
                        best = Edge{i, t, sim[i][t]};
                    }
                }
                edges.push_back(best);
            }
        }

        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            if (a.sim != b.sim) {
                return a.sim > b.sim;
            }
            return a.source < b.source;
        });
        const std::size_t r_prime = std::min(tokred::merge_count(n, ratio), edges.size());

        parent_.resize(n);
        std::iota(parent_.begin(), parent_.end(), 0);
        for (std::size_t e = 0; e < r_prime; ++e) {
            unite(edges[e].source, edges[e].target);
        }

        std::vector<std::vector<std::size_t>> by_root(n);
        for (std::size_t i = 0; i < n; ++i) {
            by_root[find(i)].push_back(i);
        }
        for (auto& group : by_root) {
            if (!group.empty()) {
                std::sort(group.begin(), group.end());
                groups.push_back(group);
            }
        }
        std::sort(groups.begin(), groups.end(),
                  [](const auto& a, const auto& b) { return a.front() < b.front(); });
        removed = r_prime;
    }

    std::vector<std::vector<std::size_t>> groups;
    std::size_t removed = 0;

private:
    static double similarity(const tokred::Tensor3& keys, std::size_t i, std::size_t j,
                             tokred::merger::SimilarityMode mode) {
        double total = 0.0;
        for (std::size_t h = 0; h < keys.d0; ++h) {
            double dot = 0.0, ni = 0.0, nj = 0.0;
            for (std::size_t c = 0; c < keys.d2; ++c) {
                const double a = keys.at(h, i, c);
                const double b = keys.at(h, j, c);
                dot += a * b;
                ni += a * a;
                nj += b * b;
            }
            if (mode == tokred::merger::SimilarityMode::cosine) {
                const double denom = std::sqrt(ni) * std::sqrt(nj);
                dot = denom > 0.0 ? dot / denom : 0.0;
            }
            total += dot;
        }
        return total / static_cast<double>(keys.d0);
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

    std::vector<std::size_t> parent_;
};

// Small random batch for encoder/reducer property tests; protected lead
// tokens, no padding unless requested.
inline tokred::TokenBatch random_batch(std::mt19937_64& rng, std::size_t text_n,
                                       std::size_t image_n, std::size_t d,
                                       std::size_t n_pad = 0) {
    tokred::TokenBatch b;
    b.text = tokred::Matrix(text_n, d);
    b.image = tokred::Matrix(image_n, d);
    std::uniform_real_distribution<float> dist(-0.5f, 0.5f);
    for (float& v : b.text.data) {
        v = dist(rng);
    }
    for (float& v : b.image.data) {
        v = dist(rng);
    }
    b.text_orig_index.resize(text_n);
    std::iota(b.text_orig_index.begin(), b.text_orig_index.end(), 0);
    b.image_orig_index.resize(image_n);
    std::iota(b.image_orig_index.begin(), b.image_orig_index.end(), 0);
    b.text_pad_mask.assign(text_n, true);
    for (std::size_t i = text_n - std::min(n_pad, text_n - 1); i < text_n; ++i) {
        b.text_pad_mask[i] = false;
    }
    b.text_protected.assign(text_n, false);
    b.text_protected[0] = true;
    b.image_protected.assign(image_n, false);
    b.image_protected[0] = true;
    return b;
}

}  // namespace testsupport
