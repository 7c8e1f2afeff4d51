#include "tokred/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>
#include <stdexcept>

namespace tokred {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<TokenBatch> workload_batches(const RunConfig& config) {
    std::vector<TokenBatch> batches;
    batches.reserve(config.workload.batch_size);
    for (std::size_t i = 0; i < config.workload.batch_size; ++i) {
        batches.push_back(gen_workload(config.workload, config.model.hidden_dim, i));
    }
    return batches;
}

}  // namespace

report::SimulateReport make_simulate_report(const RunConfig& config) {
    config.validate();
    report::SimulateReport r;
    r.model = config.model;
    r.workload = config.workload;
    r.similarity = config.similarity;
    r.schedule = config.schedule;
    r.trajectory = predict_trajectory(config.model, config.schedule, config.workload.text_len,
                                      config.workload.image_tokens);
    r.cost = metrics::model_macs(config.model, r.trajectory);
    return r;
}

report::BenchReport make_bench_report(const RunConfig& config, std::size_t threads) {
    report::BenchReport r;
    r.analytic = make_simulate_report(config);

    const std::vector<LayerWeights> weights = init_model(config.model);
    const std::vector<TokenBatch> batches = workload_batches(config);
    metrics::BenchOptions options;
    options.duration_s = config.bench_duration_s;
    options.warmup_s = config.bench_warmup_s;
    options.threads = threads == 0 ? 1 : threads;
    options.similarity = config.similarity;
    r.throughput = metrics::benchmark(config.model, weights, batches, config.schedule, options);

    r.environment.threads = options.threads;
    r.environment.duration_s = options.duration_s;
    r.environment.warmup_s = options.warmup_s;
    r.environment.timestamp_utc = utc_timestamp();
    return r;
}

report::TraceReport make_trace_report(const RunConfig& config,
                                      std::optional<std::size_t> grid_width) {
    config.validate();
    report::TraceReport r;
    r.model = config.model;
    r.workload = config.workload;
    r.similarity = config.similarity;
    r.schedule = config.schedule;
    r.grid_width = grid_width;

    const std::vector<LayerWeights> weights = init_model(config.model);
    TokenBatch batch = gen_workload(config.workload, config.model.hidden_dim, 0);
    r.initial_text = batch.text_count();
    r.initial_image = batch.image_count();

    reducer::AttachedReducer attached = reducer::attach(config.schedule, config.similarity, true);
    const ForwardResult result =
        forward_model(config.model, weights, std::move(batch), config.schedule, attached.hook);
    r.final_text = result.batch.text_count();
    r.final_image = result.batch.image_count();
    r.traces = *attached.traces;
    return r;
}

std::string sweep_csv(const RunConfig& config) {
    config.validate();
    if (config.sweep.empty()) {
        throw std::invalid_argument("sweep: config has no sweep.layer_sets");
    }
    const SweepSpec& sweep = config.sweep;
    auto ratios_or_zero = [](const std::vector<double>& v) {
        return v.empty() ? std::vector<double>{0.0} : v;
    };
    const std::vector<double> prune = ratios_or_zero(sweep.prune_ratios);
    const std::vector<double> image_merge = ratios_or_zero(sweep.image_merge_ratios);
    const std::vector<double> text_merge = ratios_or_zero(sweep.text_merge_ratios);

    std::ostringstream out;
    out << "layers,prune_ratio,image_merge_ratio,text_merge_ratio,total_macs,"
           "baseline_total_macs,mac_speedup,total_activation_elements,"
           "baseline_total_activation_elements,memory_reduction\n";
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };
    for (const auto& layers : sweep.layer_sets) {
        for (double k : prune) {
            for (double r : image_merge) {
                for (double t : text_merge) {
                    ReductionSchedule schedule;
                    for (std::size_t layer : layers) {
                        schedule.entries.push_back(ScheduleEntry{layer, k, r, t});
                    }
                    validate_schedule(schedule, config.model);
                    const TokenTrajectory trajectory =
                        predict_trajectory(config.model, schedule, config.workload.text_len,
                                           config.workload.image_tokens);
                    const metrics::CostReport cost =
                        metrics::model_macs(config.model, trajectory);

                    std::string layer_label;
                    for (std::size_t i = 0; i < layers.size(); ++i) {
                        layer_label += (i ? "+" : "") + std::to_string(layers[i]);
                    }
                    out << layer_label << ',' << fmt(k) << ',' << fmt(r) << ',' << fmt(t) << ','
                        << cost.total_macs << ',' << cost.baseline_total_macs << ','
                        << fmt(cost.mac_speedup) << ',' << cost.total_activation_elements << ','
                        << cost.baseline_total_activation_elements << ','
                        << fmt(cost.memory_reduction) << '\n';
                }
            }
        }
    }
    return out.str();
}

}  // namespace tokred
