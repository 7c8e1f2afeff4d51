// Acceptance suite: one criterion per function, one PASS/FAIL line each,
// exit code is the number of failed criteria. Run through ctest or directly.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "tokred/commands.hpp"
#include "tokred/pruner.hpp"

using namespace tokred;

namespace {

const std::string kConfigDir = TOKRED_CONFIG_DIR;

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& message) {
        if (!cond) {
            ok = false;
            detail += detail.empty() ? "" : "; ";
            detail += message;
        }
    }
    void note(const std::string& message) {
        detail += detail.empty() ? "" : "; ";
        detail += message;
    }
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

RunConfig desk_scale(RunConfig config) {
    config.model.hidden_dim = 64;
    config.model.num_heads = 4;
    return config;
}

// --- criterion 1: the eight-token worked merge example -----------------------

Outcome worked_example_merge() {
    Outcome out;
    Tensor3 keys(1, 8, 4);
    const float raw[8][4] = {{5, 0, 0, 0},  {0, 1, 0, 0},   {9, 0, 0, 0},  {10, 0, 0, 0},
                             {0, 0, 7, 0},  {0, 0, 8, 0},   {0, 0, 8.5, 0}, {0, 0, 0, 0.1}};
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t c = 0; c < 4; ++c) {
            keys.at(0, i, c) = raw[i][c];
        }
    }
    Matrix tokens(8, 2);
    for (std::size_t i = 0; i < 8; ++i) {
        tokens.at(i, 0) = static_cast<float>(i);
        tokens.at(i, 1) = static_cast<float>(10 * i);
    }
    const std::vector<bool> none(8, false);

    (void)merger::bipartite_merge(tokens, keys, 0.375, none, merger::SimilarityMode::dot);  // warm
    const auto t0 = std::chrono::steady_clock::now();
    const merger::MergeResult result =
        merger::bipartite_merge(tokens, keys, 0.375, none, merger::SimilarityMode::dot);
    const double ms = std::chrono::duration<double, std::milli>(
        std::chrono::steady_clock::now() - t0).count();

    const std::vector<std::vector<std::size_t>> want = {{0}, {1}, {2, 3}, {4, 5, 6}, {7}};
    out.require(result.groups == want, "merge groups differ from the worked example");
    out.require(result.tokens.rows == 5, "output count is not 5");
    out.require(result.removed == 3, "removed count is not 3");
    out.require(ms < 1.0, "merge took " + fmt(ms) + " ms (limit 1 ms)");
    out.note("groups {2,3},{4,5,6} + singletons, " + fmt(ms) + " ms");
    return out;
}

// --- criterion 2: analytic FLOPs ratios --------------------------------------

Outcome flops_ratio_bands() {
    Outcome out;
    const report::SimulateReport vqa =
        make_simulate_report(load_config(kConfigDir + "/vilt_vqa2.cfg"));
    const report::SimulateReport snli =
        make_simulate_report(load_config(kConfigDir + "/vilt_snli_ve.cfg"));

    const double vqa_speedup = vqa.cost.mac_speedup;
    const double snli_speedup = snli.cost.mac_speedup;
    const double baseline_gflops = static_cast<double>(vqa.cost.baseline_total_macs) / 1e9;

    out.require(vqa_speedup >= 1.84 * 0.85 && vqa_speedup <= 1.84 * 1.15,
                "vqa speedup " + fmt(vqa_speedup) + " outside 1.84 +-15%");
    out.require(snli_speedup >= 2.08 * 0.85 && snli_speedup <= 2.08 * 1.15,
                "snli-ve speedup " + fmt(snli_speedup) + " outside 2.08 +-15%");
    out.require(baseline_gflops >= 16.0 * 0.9 && baseline_gflops <= 16.0 * 1.1,
                "baseline " + fmt(baseline_gflops) + " GFLOPs outside 16 +-10%");
    out.note("vqa " + fmt(vqa_speedup) + "x, snli-ve " + fmt(snli_speedup) + "x, baseline " +
             fmt(baseline_gflops) + " GFLOPs");
    return out;
}

// --- criterion 3: design-sweep orderings -------------------------------------

double csv_speedup(const std::string& csv, const std::string& prefix, Outcome& out) {
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) == 0) {
            std::size_t pos = 0;
            for (int i = 0; i < 6; ++i) {
                pos = line.find(',', pos) + 1;
            }
            return std::stod(line.substr(pos));
        }
    }
    out.require(false, "sweep row missing: " + prefix);
    return 0.0;
}

Outcome sweep_orderings() {
    Outcome out;
    const std::string ratios = sweep_csv(load_config(kConfigDir + "/sweep_ratios.cfg"));
    const double base = csv_speedup(ratios, "2+5+8,0.1,0.3,0.2,", out);
    const double heavier_text = csv_speedup(ratios, "2+5+8,0.1,0.3,0.5,", out);
    const double heavier_prune = csv_speedup(ratios, "2+5+8,0.3,0.3,0.2,", out);
    const double heavier_image = csv_speedup(ratios, "2+5+8,0.1,0.5,0.2,", out);
    out.require(base < heavier_text && heavier_text < heavier_prune &&
                    heavier_prune < heavier_image,
                "ratio rows not strictly ordered: " + fmt(base) + ", " + fmt(heavier_text) +
                    ", " + fmt(heavier_prune) + ", " + fmt(heavier_image));

    const std::string locations = sweep_csv(load_config(kConfigDir + "/sweep_locations.cfg"));
    const double early = csv_speedup(locations, "2+3+4,", out);
    const double late = csv_speedup(locations, "7+8+9,", out);
    out.require(early > late, "early layers " + fmt(early) + " not faster than late " + fmt(late));
    out.note(fmt(base) + " < " + fmt(heavier_text) + " < " + fmt(heavier_prune) + " < " +
             fmt(heavier_image) + "; early " + fmt(early) + " > late " + fmt(late));
    return out;
}

// --- criterion 4: saliency against the triple-loop oracle --------------------

Outcome saliency_oracle_suite() {
    Outcome out;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    double max_err = 0.0;
    for (int it = 0; it < 200; ++it) {
        const std::size_t heads = 1 + rng() % 8;
        const std::size_t t_real = 1 + rng() % 8;
        const std::size_t v = 1 + rng() % 8;
        Tensor3 cross(heads, t_real, v);
        for (float& x : cross.data) {
            x = dist(rng);
        }
        const pruner::SaliencyScores got = pruner::text_saliency(cross);
        const std::vector<double> want = testsupport::saliency_oracle(cross);
        for (std::size_t i = 0; i < v; ++i) {
            max_err = std::max(max_err, std::abs(got.scores[i] - want[i]));
        }
    }
    out.require(max_err < 1e-6, "max abs error " + fmt(max_err) + " >= 1e-6");
    out.note("200 instances, max abs error " + fmt(max_err));
    return out;
}

// --- criterion 5: merging against the exhaustive oracle ----------------------

Outcome merge_oracle_suite() {
    Outcome out;
    std::mt19937_64 rng(4096);
    const float key_values[] = {-1.0f, 0.0f, 0.5f, 1.0f, 2.0f};
    std::uniform_real_distribution<float> token_dist(-1.0f, 1.0f);
    std::uniform_real_distribution<double> ratio_dist(0.0, 0.5);
    std::size_t checked = 0;
    for (int it = 0; it < 500; ++it) {
        const std::size_t n = rng() % 11;
        const std::size_t heads = 1 + rng() % 2;
        const std::size_t dh = 2 + rng() % 2;
        Matrix tokens(n, 4);
        for (float& v : tokens.data) {
            v = token_dist(rng);
        }
        Tensor3 keys(heads, n, dh);
        for (float& v : keys.data) {
            v = key_values[rng() % 5];
        }
        std::vector<bool> prot(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            prot[i] = (i == 0) ? (rng() % 2 == 0) : (rng() % 10 == 0);
        }
        const double ratio = ratio_dist(rng);
        const merger::MergeResult got =
            merger::bipartite_merge(tokens, keys, ratio, prot, merger::SimilarityMode::dot);
        const testsupport::MergeOracle want(keys, prot, ratio, merger::SimilarityMode::dot);

        if (got.groups != want.groups) {
            out.require(false, "groups diverge from the oracle at instance " + std::to_string(it));
            return out;
        }
        if (got.tokens.rows != n - want.removed) {
            out.require(false, "count law broken at instance " + std::to_string(it));
            return out;
        }
        for (std::size_t g = 0; g < got.groups.size(); ++g) {
            for (std::size_t c = 0; c < tokens.cols; ++c) {
                double mean = 0.0;
                for (std::size_t member : got.groups[g]) {
                    mean += tokens.at(member, c);
                }
                mean /= static_cast<double>(got.groups[g].size());
                const double err = std::abs(got.tokens.at(g, c) - mean);
                const double rel = std::abs(mean) > 1e-12 ? err / std::abs(mean) : err;
                if (rel >= 1e-6) {
                    out.require(false, "group-mean law broken at instance " + std::to_string(it));
                    return out;
                }
            }
        }
        ++checked;
    }
    out.note(std::to_string(checked) + " instances, groups identical, count and mean laws hold");
    return out;
}

// --- criterion 6: trajectory consistency for every shipped config ------------

Outcome trajectory_consistency() {
    Outcome out;
    const char* names[] = {"vilt_vqa2",          "vilt_nlvr2",          "vilt_snli_ve",
                           "vilt_retrieval",     "zero_ratio",          "ablation_ratios_base",
                           "ablation_ratios_k03", "ablation_ratios_t05", "ablation_ratios_r05",
                           "ablation_layers_1",  "ablation_layers_2",   "ablation_layers_3",
                           "ablation_loc_early", "ablation_loc_late",   "sweep_ratios",
                           "sweep_locations",    "sweep_layers"};
    std::size_t checked = 0;
    for (const char* name : names) {
        const RunConfig config = desk_scale(load_config(kConfigDir + "/" + name + ".cfg"));
        const auto weights = init_model(config.model);
        const TokenBatch batch = gen_workload(config.workload, config.model.hidden_dim);
        const reducer::AttachedReducer attached =
            reducer::attach(config.schedule, config.similarity, false);
        const ForwardResult run =
            forward_model(config.model, weights, batch, config.schedule, attached.hook);
        const TokenTrajectory predicted = predict_trajectory(
            config.model, config.schedule, config.workload.text_len, config.workload.image_tokens);
        if (!(run.trajectory == predicted)) {
            out.require(false, std::string("trajectory mismatch for ") + name);
            return out;
        }
        ++checked;
    }
    out.note(std::to_string(checked) + " configs, observed == predicted, integer-exact");
    return out;
}

// --- criterion 7: measured wall-clock speedup --------------------------------

Outcome measured_speedup() {
    Outcome out;
    auto run_bench = [&](const std::string& file) {
        RunConfig config = load_config(kConfigDir + "/" + file);
        config.bench_duration_s = 6.0;
        config.bench_warmup_s = 2.0;
        const auto weights = init_model(config.model);
        std::vector<TokenBatch> batches;
        for (std::size_t i = 0; i < config.workload.batch_size; ++i) {
            batches.push_back(gen_workload(config.workload, config.model.hidden_dim, i));
        }
        metrics::BenchOptions options;
        options.duration_s = config.bench_duration_s;
        options.warmup_s = config.bench_warmup_s;
        options.similarity = config.similarity;
        return metrics::benchmark(config.model, weights, batches, config.schedule, options);
    };

    const metrics::BenchResult reduced = run_bench("vilt_vqa2.cfg");
    out.require(reduced.speedup > 1.2,
                "vqa throughput ratio " + fmt(reduced.speedup) + " not > 1.2");
    const metrics::BenchResult zero = run_bench("zero_ratio.cfg");
    out.require(zero.speedup > 0.9 && zero.speedup < 1.1,
                "zero-ratio throughput ratio " + fmt(zero.speedup) + " outside 1.0 +-10%");
    out.note("vqa " + fmt(reduced.speedup) + "x (" + fmt(reduced.baseline_examples_per_s) +
             " -> " + fmt(reduced.reduced_examples_per_s) + " ex/s), zero-ratio " +
             fmt(zero.speedup) + "x");
    return out;
}

// --- criterion 8: pruning is text-informed -----------------------------------

Outcome text_informedness() {
    Outcome out;
    ModelConfig c;
    c.num_layers = 2;
    c.hidden_dim = 32;
    c.num_heads = 4;
    c.seed = 7;
    const auto weights = init_model(c);
    ReductionSchedule schedule;
    schedule.entries.push_back(ScheduleEntry{1, 0.5, 0.0, 0.0});

    WorkloadConfig base_w;
    base_w.text_len = 12;
    base_w.image_tokens = 24;
    base_w.seed = 100;
    const TokenBatch base = gen_workload(base_w, c.hidden_dim);

    auto pruned_for_text = [&](std::uint64_t text_seed) {
        WorkloadConfig tw = base_w;
        tw.seed = text_seed;
        TokenBatch batch = base;
        batch.text = gen_workload(tw, c.hidden_dim).text;  // image tokens stay fixed
        const reducer::AttachedReducer attached =
            reducer::attach(schedule, merger::SimilarityMode::dot, true);
        (void)forward_model(c, weights, batch, schedule, attached.hook);
        return (*attached.traces)[0].pruned_image_orig;
    };
    const auto a = pruned_for_text(100);
    const auto b = pruned_for_text(205);
    out.require(a.size() == b.size(), "prune budgets differ");
    out.require(a != b, "kept sets identical for different texts");
    std::size_t common = 0;
    std::set<std::size_t> in_a(a.begin(), a.end());
    for (std::size_t id : b) {
        common += in_a.count(id);
    }
    out.note("pruned sets share " + std::to_string(common) + "/" + std::to_string(a.size()) +
             " indices across the two texts");
    return out;
}

// --- criterion 9: byte-identical repeated runs --------------------------------

Outcome determinism() {
    Outcome out;
    const RunConfig config = load_config(kConfigDir + "/vilt_vqa2.cfg");
    const std::string sim1 = report::to_json(make_simulate_report(config)).dump(2);
    const std::string sim2 = report::to_json(make_simulate_report(config)).dump(2);
    out.require(sim1 == sim2, "simulate outputs differ between runs");
    const std::string trace1 = report::to_json(make_trace_report(config, 12)).dump(2);
    const std::string trace2 = report::to_json(make_trace_report(config, 12)).dump(2);
    out.require(trace1 == trace2, "trace outputs differ between runs");
    out.note("simulate " + std::to_string(sim1.size()) + " B and trace " +
             std::to_string(trace1.size()) + " B, byte-identical");
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* title;
        std::function<Outcome()> run;
        double time_limit_s;  // 0 = unbounded
    };
    const std::vector<Criterion> criteria = {
        {1, "worked-example merge groups", worked_example_merge, 0},  // limit inside (1 ms)
        {2, "analytic FLOPs ratio bands", flops_ratio_bands, 1.0},
        {3, "design-sweep speedup orderings", sweep_orderings, 1.0},
        {4, "text-saliency oracle suite", saliency_oracle_suite, 1.0},
        {5, "bipartite-merge oracle suite", merge_oracle_suite, 5.0},
        {6, "trajectory consistency for shipped configs", trajectory_consistency, 10.0},
        {7, "measured wall-clock speedup", measured_speedup, 0},
        {8, "pruning is text-informed", text_informedness, 1.0},
        {9, "byte-identical repeated runs", determinism, 0},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome.ok = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (criterion.time_limit_s > 0 && secs > criterion.time_limit_s) {
            outcome.require(false, "runtime " + fmt(secs) + " s over the " +
                                       fmt(criterion.time_limit_s) + " s limit");
        }
        std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", outcome.ok ? "PASS" : "FAIL",
                    criterion.id, criterion.title, secs, outcome.detail.empty() ? "" : " — ",
                    outcome.detail.c_str());
        std::fflush(stdout);
        failures += outcome.ok ? 0 : 1;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
    }
    return failures;
}
