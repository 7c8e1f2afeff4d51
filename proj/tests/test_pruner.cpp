#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tokred/pruner.hpp"

using namespace tokred;
using pruner::SaliencyScores;

namespace {

Tensor3 cross_from_rows(std::size_t heads, const std::vector<std::vector<float>>& rows) {
    Tensor3 cross(heads, rows.size(), rows.front().size());
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t t = 0; t < rows.size(); ++t) {
            std::copy(rows[t].begin(), rows[t].end(), cross.row(h, t));
        }
    }
    return cross;
}

}  // namespace

TEST_CASE("uniform attention spreads saliency evenly") {
    const std::size_t heads = 3, t_real = 4, v = 5, n_total = 20;
    Tensor3 cross(heads, t_real, v);
    std::fill(cross.data.begin(), cross.data.end(), 1.0f / n_total);
    const SaliencyScores s = pruner::text_saliency(cross);
    for (float sv : s.scores) {
        CHECK(sv == doctest::Approx(static_cast<double>(heads) / n_total));
    }
}

TEST_CASE("saliency matches the hand-summed example") {
    const Tensor3 cross = cross_from_rows(1, {{0.3f, 0.1f}, {0.2f, 0.4f}});
    const SaliencyScores s = pruner::text_saliency(cross);
    REQUIRE(s.scores.size() == 2);
    CHECK(s.scores[0] == doctest::Approx(0.25));
    CHECK(s.scores[1] == doctest::Approx(0.25));
}

TEST_CASE("saliency equals the triple-loop oracle on 200 random instances") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    for (int it = 0; it < 200; ++it) {
        const std::size_t heads = 1 + rng() % 8;
        const std::size_t t_real = 1 + rng() % 8;
        const std::size_t v = 1 + rng() % 8;
        Tensor3 cross(heads, t_real, v);
        for (float& x : cross.data) {
            x = dist(rng);
        }
        const SaliencyScores got = pruner::text_saliency(cross);
        const std::vector<double> want = testsupport::saliency_oracle(cross);
        for (std::size_t i = 0; i < v; ++i) {
            CHECK(std::abs(got.scores[i] - want[i]) < 1e-6);
        }
    }
}

TEST_CASE("empty text makes saliency undefined") {
    Tensor3 cross(2, 0, 5);
    CHECK_THROWS_AS(pruner::text_saliency(cross), std::invalid_argument);
}

TEST_CASE("permuting attention columns permutes scores") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    Tensor3 cross(2, 3, 6);
    for (float& x : cross.data) {
        x = dist(rng);
    }
    const std::vector<std::size_t> perm = {3, 1, 5, 0, 4, 2};
    Tensor3 permuted(2, 3, 6);
    for (std::size_t h = 0; h < 2; ++h) {
        for (std::size_t t = 0; t < 3; ++t) {
            for (std::size_t v = 0; v < 6; ++v) {
                permuted.at(h, t, v) = cross.at(h, t, perm[v]);
            }
        }
    }
    const SaliencyScores base = pruner::text_saliency(cross);
    const SaliencyScores moved = pruner::text_saliency(permuted);
    for (std::size_t v = 0; v < 6; ++v) {
        CHECK(moved.scores[v] == base.scores[perm[v]]);
    }
}

TEST_CASE("select_keep keeps the top scores with stable ties") {
    const SaliencyScores s{{0.5f, 0.1f, 0.4f, 0.4f, 0.2f}};
    const std::vector<bool> none(5, false);
    CHECK(pruner::select_keep(s, 0.4, none) == std::vector<std::size_t>{0, 2, 3});
    CHECK(pruner::select_keep(s, 0.0, none) == std::vector<std::size_t>{0, 1, 2, 3, 4});

    const SaliencyScores equal{{0.3f, 0.3f, 0.3f, 0.3f}};
    CHECK(pruner::select_keep(equal, 0.5, std::vector<bool>(4, false)) ==
          std::vector<std::size_t>{0, 1});
}

TEST_CASE("protected tokens bypass scoring and count toward the budget") {
    const SaliencyScores s{{0.9f, 0.8f, 0.7f, 0.0f}};
    std::vector<bool> prot(4, false);
    prot[3] = true;  // worst score, still kept
    const auto keep = pruner::select_keep(s, 0.5, prot);
    CHECK(keep == std::vector<std::size_t>{0, 3});
}

TEST_CASE("select_keep cardinality and dominance over random inputs") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<float> dist(0.0f, 2.0f);
    std::uniform_real_distribution<double> k_dist(0.0, 0.95);
    for (int it = 0; it < 200; ++it) {
        const std::size_t v = 1 + rng() % 40;
        SaliencyScores s;
        s.scores.resize(v);
        for (float& x : s.scores) {
            x = dist(rng);
        }
        std::vector<bool> prot(v, false);
        prot[rng() % v] = true;
        const double k = k_dist(rng);

        const auto keep = pruner::select_keep(s, k, prot);
        CHECK(keep.size() == kept_count(v, k, 1));
        CHECK(std::is_sorted(keep.begin(), keep.end()));

        std::vector<bool> kept(v, false);
        for (std::size_t i : keep) {
            kept[i] = true;
        }
        float min_kept = 1e9f, max_dropped = -1e9f;
        for (std::size_t i = 0; i < v; ++i) {
            if (prot[i]) {
                CHECK(kept[i]);
                continue;
            }
            if (kept[i]) {
                min_kept = std::min(min_kept, s.scores[i]);
            } else {
                max_dropped = std::max(max_dropped, s.scores[i]);
            }
        }
        if (min_kept < 1e9f && max_dropped > -1e9f) {
            CHECK(min_kept >= max_dropped);
        }
    }
}

TEST_CASE("select_keep maps through score permutations when scores are distinct") {
    std::mt19937_64 rng(47);
    const std::size_t v = 9;
    SaliencyScores s;
    for (std::size_t i = 0; i < v; ++i) {
        s.scores.push_back(0.1f * static_cast<float>(i) + 0.01f);  // distinct
    }
    std::vector<std::size_t> perm(v);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    SaliencyScores moved;
    moved.scores.resize(v);
    for (std::size_t i = 0; i < v; ++i) {
        moved.scores[i] = s.scores[perm[i]];
    }
    const std::vector<bool> none(v, false);
    const auto base_keep = pruner::select_keep(s, 0.4, none);
    const auto moved_keep = pruner::select_keep(moved, 0.4, none);

    std::vector<std::size_t> mapped;
    for (std::size_t i : moved_keep) {
        mapped.push_back(perm[i]);
    }
    std::sort(mapped.begin(), mapped.end());
    CHECK(mapped == base_keep);
}

TEST_CASE("prune filters image rows and preserves original indices") {
    std::mt19937_64 rng(43);
    const TokenBatch batch = testsupport::random_batch(rng, 3, 5, 4);

    SUBCASE("keep everything") {
        const TokenBatch out = pruner::prune(batch, {0, 1, 2, 3, 4});
        CHECK(out.image.data == batch.image.data);
        CHECK(out.image_orig_index == batch.image_orig_index);
        CHECK(out.text.data == batch.text.data);
    }
    SUBCASE("keep a single token") {
        const TokenBatch out = pruner::prune(batch, {0});
        CHECK(out.image_count() == 1);
        CHECK(out.image_orig_index == std::vector<std::size_t>{0});
    }
    SUBCASE("keep a subset") {
        const TokenBatch out = pruner::prune(batch, {0, 2, 3});
        CHECK(out.image_count() == 3);
        CHECK(out.image_orig_index == std::vector<std::size_t>{0, 2, 3});
        for (std::size_t col = 0; col < 4; ++col) {
            CHECK(out.image.at(1, col) == batch.image.at(2, col));
            CHECK(out.image.at(2, col) == batch.image.at(3, col));
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(pruner::prune(batch, {0, 7}), std::out_of_range);
        CHECK_THROWS_AS(pruner::prune(batch, {2, 1}), std::invalid_argument);
    }
}
