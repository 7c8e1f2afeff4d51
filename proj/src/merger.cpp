#include "tokred/merger.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace tokred::merger {

namespace {

double head_dot(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

double head_norm(const float* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    }
    return std::sqrt(acc);
}

}  // namespace

Partition partition_alternating(std::size_t n_tokens, const std::vector<bool>& protected_mask) {
    if (protected_mask.size() != n_tokens) {
        throw std::invalid_argument("partition_alternating: mask length does not match count");
    }
    Partition part;
    for (std::size_t i = 0; i < n_tokens; ++i) {
        if (i % 2 == 0 || protected_mask[i]) {
            part.even_set.push_back(i);
        } else {
            part.odd_set.push_back(i);
        }
    }
    return part;
}

double token_similarity(const Tensor3& keys, std::size_t i, std::size_t j, SimilarityMode mode) {
    const std::size_t heads = keys.d0;
    const std::size_t dh = keys.d2;
    double sum = 0.0;
    for (std::size_t h = 0; h < heads; ++h) {
        const float* ki = keys.row(h, i);
        const float* kj = keys.row(h, j);
        double s = head_dot(ki, kj, dh);
        if (mode == SimilarityMode::cosine) {
            const double ni = head_norm(ki, dh);
            const double nj = head_norm(kj, dh);
            s = (ni > 0.0 && nj > 0.0) ? s / (ni * nj) : 0.0;
        }
        sum += s;
    }
    return sum / static_cast<double>(heads);
}

std::vector<MergeEdge> build_edges(const Tensor3& keys, const Partition& partition,
                                   const std::vector<bool>& protected_mask, SimilarityMode mode) {
    std::vector<MergeEdge> edges;
    if (partition.odd_set.empty()) {
        return edges;
    }
    edges.reserve(partition.even_set.size());
    for (std::size_t src : partition.even_set) {
        if (protected_mask[src]) {
            continue;
        }
        MergeEdge best{src, partition.odd_set[0],
                       token_similarity(keys, src, partition.odd_set[0], mode)};
        for (std::size_t t = 1; t < partition.odd_set.size(); ++t) {
            const std::size_t tgt = partition.odd_set[t];
            const double sim = token_similarity(keys, src, tgt, mode);
            if (sim > best.similarity) {
                best.target = tgt;
                best.similarity = sim;
            }
        }
        edges.push_back(best);
    }
    return edges;
}

MergeGraph build_merge_graph(const Tensor3& keys, std::size_t n_tokens,
                             const std::vector<bool>& protected_mask, double ratio,
                             SimilarityMode mode) {
    MergeGraph graph;
    graph.partition = partition_alternating(n_tokens, protected_mask);
    graph.edges = build_edges(keys, graph.partition, protected_mask, mode);

    const std::size_t wanted = merge_count(n_tokens, ratio);
    const std::size_t take = std::min(wanted, graph.edges.size());

    graph.selected.resize(graph.edges.size());
    for (std::size_t i = 0; i < graph.selected.size(); ++i) {
        graph.selected[i] = i;
    }
    std::sort(graph.selected.begin(), graph.selected.end(), [&](std::size_t a, std::size_t b) {
        if (graph.edges[a].similarity != graph.edges[b].similarity) {
            return graph.edges[a].similarity > graph.edges[b].similarity;
        }
        return graph.edges[a].source < graph.edges[b].source;
    });
    graph.selected.resize(take);
    return graph;
}

MergeResult bipartite_merge(const Matrix& tokens, const Tensor3& keys, double ratio,
                            const std::vector<bool>& protected_mask, SimilarityMode mode) {
    const std::size_t n = tokens.rows;
    if (keys.d1 != n) {
        throw std::invalid_argument("bipartite_merge: keys token count does not match rows");
    }
    if (protected_mask.size() != n) {
        throw std::invalid_argument("bipartite_merge: mask length does not match token count");
    }
    if (merge_count(n, ratio) == 0) {
        // Identity: no similarities needed, every token is its own group.
        MergeResult identity;
        identity.tokens = tokens;
        identity.groups.reserve(n);
        identity.sizes.assign(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            identity.groups.push_back({i});
        }
        return identity;
    }
    const MergeGraph graph = build_merge_graph(keys, n, protected_mask, ratio, mode);

    // Star components: one target plus every selected source pointing at it.
    std::map<std::size_t, std::vector<std::size_t>> by_target;
    std::vector<bool> in_group(n, false);
    for (std::size_t e : graph.selected) {
        const MergeEdge& edge = graph.edges[e];
        by_target[edge.target].push_back(edge.source);
        in_group[edge.source] = true;
        in_group[edge.target] = true;
    }

    MergeResult result;
    result.removed = graph.selected.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_group[i]) {
            result.groups.push_back({i});
        }
    }
    for (auto& [target, sources] : by_target) {
        std::vector<std::size_t> group = sources;
        group.push_back(target);
        std::sort(group.begin(), group.end());
        result.groups.push_back(std::move(group));
    }
    std::sort(result.groups.begin(), result.groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    const std::size_t d = tokens.cols;
    result.tokens = Matrix(result.groups.size(), d);
    result.sizes.reserve(result.groups.size());
    std::vector<double> acc(d);
    for (std::size_t g = 0; g < result.groups.size(); ++g) {
        const auto& group = result.groups[g];
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t member : group) {
            const float* row = tokens.row(member);
            for (std::size_t c = 0; c < d; ++c) {
                acc[c] += row[c];
            }
        }
        const double inv = 1.0 / static_cast<double>(group.size());
        float* out = result.tokens.row(g);
        for (std::size_t c = 0; c < d; ++c) {
            out[c] = static_cast<float>(acc[c] * inv);
        }
        result.sizes.push_back(group.size());
    }
    return result;
}

namespace {

Tensor3 slice_keys(const Tensor3& keys, std::size_t begin, std::size_t count) {
    Tensor3 out(keys.d0, count, keys.d2);
    for (std::size_t h = 0; h < keys.d0; ++h) {
        for (std::size_t i = 0; i < count; ++i) {
            const float* src = keys.row(h, begin + i);
            std::copy(src, src + keys.d2, out.row(h, i));
        }
    }
    return out;
}

}  // namespace

MergedBatch merge_batch(const TokenBatch& batch, const Tensor3& keys, double image_ratio,
                        double text_ratio, SimilarityMode mode) {
    const std::size_t t = batch.text_count();
    const std::size_t v = batch.image_count();
    if (keys.d1 != t + v) {
        throw std::invalid_argument("merge_batch: keys do not cover the concatenated batch");
    }

    const Tensor3 text_keys = slice_keys(keys, 0, t);
    const Tensor3 image_keys = slice_keys(keys, t, v);
    MergedBatch out;
    out.text_merge = bipartite_merge(batch.text, text_keys, text_ratio, batch.text_protected, mode);
    out.image_merge =
        bipartite_merge(batch.image, image_keys, image_ratio, batch.image_protected, mode);

    out.batch.text = out.text_merge.tokens;
    out.batch.image = out.image_merge.tokens;
    for (const auto& group : out.text_merge.groups) {
        out.batch.text_orig_index.push_back(batch.text_orig_index[group.front()]);
        bool real = false;
        bool prot = false;
        for (std::size_t member : group) {
            real = real || batch.text_pad_mask[member];
            prot = prot || batch.text_protected[member];
        }
        out.batch.text_pad_mask.push_back(real);
        out.batch.text_protected.push_back(prot);
    }
    for (const auto& group : out.image_merge.groups) {
        out.batch.image_orig_index.push_back(batch.image_orig_index[group.front()]);
        bool prot = false;
        for (std::size_t member : group) {
            prot = prot || batch.image_protected[member];
        }
        out.batch.image_protected.push_back(prot);
    }
    return out;
}

}  // namespace tokred::merger
