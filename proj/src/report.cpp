#include "tokred/report.hpp"

#include <stdexcept>

namespace tokred::report {

namespace {

void require_version(const Json& j, const char* command) {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kSchemaVersion) {
        throw std::runtime_error("report: unsupported schema_version");
    }
    if (!j.contains("command") || j.at("command").get<std::string>() != command) {
        throw std::runtime_error(std::string("report: expected a '") + command + "' document");
    }
}

Json model_to_json(const ModelConfig& m) {
    return Json{{"layers", m.num_layers},
                {"hidden_dim", m.hidden_dim},
                {"heads", m.num_heads},
                {"mlp_ratio", m.mlp_ratio},
                {"seed", m.seed}};
}

ModelConfig model_from_json(const Json& j) {
    ModelConfig m;
    m.num_layers = j.at("layers").get<std::size_t>();
    m.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    m.num_heads = j.at("heads").get<std::size_t>();
    m.mlp_ratio = j.at("mlp_ratio").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    return m;
}

Json workload_to_json(const WorkloadConfig& w) {
    return Json{{"text_len", w.text_len},
                {"image_tokens", w.image_tokens},
                {"batch_size", w.batch_size},
                {"seed", w.seed},
                {"pad_fraction", w.pad_fraction}};
}

WorkloadConfig workload_from_json(const Json& j) {
    WorkloadConfig w;
    w.text_len = j.at("text_len").get<std::size_t>();
    w.image_tokens = j.at("image_tokens").get<std::size_t>();
    w.batch_size = j.at("batch_size").get<std::size_t>();
    w.seed = j.at("seed").get<std::uint64_t>();
    w.pad_fraction = j.at("pad_fraction").get<double>();
    return w;
}

Json schedule_to_json(const ReductionSchedule& s) {
    Json arr = Json::array();
    for (const ScheduleEntry& e : s.entries) {
        arr.push_back(Json{{"layer", e.layer},
                           {"prune_ratio", e.prune_ratio},
                           {"image_merge_ratio", e.image_merge_ratio},
                           {"text_merge_ratio", e.text_merge_ratio}});
    }
    return arr;
}

ReductionSchedule schedule_from_json(const Json& j) {
    ReductionSchedule s;
    for (const Json& e : j) {
        s.entries.push_back(ScheduleEntry{e.at("layer").get<std::size_t>(),
                                          e.at("prune_ratio").get<double>(),
                                          e.at("image_merge_ratio").get<double>(),
                                          e.at("text_merge_ratio").get<double>()});
    }
    return s;
}

Json trajectory_to_json(const TokenTrajectory& t) {
    Json arr = Json::array();
    for (std::size_t l = 0; l < t.layers.size(); ++l) {
        const LayerCounts& c = t.layers[l];
        arr.push_back(Json{{"layer", l},
                           {"attn_text", c.text_attn},
                           {"attn_image", c.image_attn},
                           {"mlp_text", c.text_mlp},
                           {"mlp_image", c.image_mlp}});
    }
    return arr;
}

TokenTrajectory trajectory_from_json(const Json& j) {
    TokenTrajectory t;
    for (const Json& e : j) {
        LayerCounts c;
        c.text_attn = e.at("attn_text").get<std::size_t>();
        c.image_attn = e.at("attn_image").get<std::size_t>();
        c.text_mlp = e.at("mlp_text").get<std::size_t>();
        c.image_mlp = e.at("mlp_image").get<std::size_t>();
        t.layers.push_back(c);
    }
    return t;
}

Json cost_to_json(const metrics::CostReport& c) {
    return Json{{"total_macs", c.total_macs},
                {"per_layer_macs", c.per_layer_macs},
                {"baseline_total_macs", c.baseline_total_macs},
                {"mac_speedup", c.mac_speedup},
                {"peak_activation_elements", c.peak_activation_elements},
                {"baseline_peak_activation_elements", c.baseline_peak_activation_elements},
                {"total_activation_elements", c.total_activation_elements},
                {"baseline_total_activation_elements", c.baseline_total_activation_elements},
                {"memory_reduction", c.memory_reduction}};
}

metrics::CostReport cost_from_json(const Json& j) {
    metrics::CostReport c;
    c.total_macs = j.at("total_macs").get<std::uint64_t>();
    c.per_layer_macs = j.at("per_layer_macs").get<std::vector<std::uint64_t>>();
    c.baseline_total_macs = j.at("baseline_total_macs").get<std::uint64_t>();
    c.mac_speedup = j.at("mac_speedup").get<double>();
    c.peak_activation_elements = j.at("peak_activation_elements").get<std::uint64_t>();
    c.baseline_peak_activation_elements =
        j.at("baseline_peak_activation_elements").get<std::uint64_t>();
    c.total_activation_elements = j.at("total_activation_elements").get<std::uint64_t>();
    c.baseline_total_activation_elements =
        j.at("baseline_total_activation_elements").get<std::uint64_t>();
    c.memory_reduction = j.at("memory_reduction").get<double>();
    return c;
}

Json analytic_body(const SimulateReport& r) {
    Json j;
    j["model"] = model_to_json(r.model);
    j["workload"] = workload_to_json(r.workload);
    j["similarity"] = similarity_name(r.similarity);
    j["schedule"] = schedule_to_json(r.schedule);
    j["trajectory"] = trajectory_to_json(r.trajectory);
    j["cost"] = cost_to_json(r.cost);
    return j;
}

SimulateReport analytic_from_json(const Json& j) {
    SimulateReport r;
    r.model = model_from_json(j.at("model"));
    r.workload = workload_from_json(j.at("workload"));
    r.similarity = parse_similarity(j.at("similarity").get<std::string>());
    r.schedule = schedule_from_json(j.at("schedule"));
    r.trajectory = trajectory_from_json(j.at("trajectory"));
    r.cost = cost_from_json(j.at("cost"));
    return r;
}

}  // namespace

Json to_json(const SimulateReport& r) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "simulate";
    j.update(analytic_body(r));
    return j;
}

SimulateReport simulate_from_json(const Json& j) {
    require_version(j, "simulate");
    return analytic_from_json(j);
}

Json to_json(const BenchReport& r) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "bench";
    j.update(analytic_body(r.analytic));
    j["throughput"] = Json{{"baseline_examples_per_s", r.throughput.baseline_examples_per_s},
                           {"reduced_examples_per_s", r.throughput.reduced_examples_per_s},
                           {"speedup", r.throughput.speedup},
                           {"baseline_examples", r.throughput.baseline_examples},
                           {"reduced_examples", r.throughput.reduced_examples}};
    j["environment"] = Json{{"threads", r.environment.threads},
                            {"duration_s", r.environment.duration_s},
                            {"warmup_s", r.environment.warmup_s},
                            {"timestamp_utc", r.environment.timestamp_utc}};
    return j;
}

BenchReport bench_from_json(const Json& j) {
    require_version(j, "bench");
    BenchReport r;
    r.analytic = analytic_from_json(j);
    const Json& tp = j.at("throughput");
    r.throughput.baseline_examples_per_s = tp.at("baseline_examples_per_s").get<double>();
    r.throughput.reduced_examples_per_s = tp.at("reduced_examples_per_s").get<double>();
    r.throughput.speedup = tp.at("speedup").get<double>();
    r.throughput.baseline_examples = tp.at("baseline_examples").get<std::uint64_t>();
    r.throughput.reduced_examples = tp.at("reduced_examples").get<std::uint64_t>();
    const Json& env = j.at("environment");
    r.environment.threads = env.at("threads").get<std::size_t>();
    r.environment.duration_s = env.at("duration_s").get<double>();
    r.environment.warmup_s = env.at("warmup_s").get<double>();
    r.environment.timestamp_utc = env.at("timestamp_utc").get<std::string>();
    return r;
}

namespace {

Json trace_record_to_json(const reducer::ReductionTrace& t) {
    return Json{{"layer", t.layer_index},
                {"pruned_image", t.pruned_image_orig},
                {"image_groups", t.image_groups},
                {"text_groups", t.text_groups},
                {"counts", Json{{"image_before", t.image_before},
                                {"image_after_prune", t.image_after_prune},
                                {"image_after_merge", t.image_after_merge},
                                {"text_before", t.text_before},
                                {"text_after_merge", t.text_after_merge}}}};
}

reducer::ReductionTrace trace_record_from_json(const Json& j) {
    reducer::ReductionTrace t;
    t.layer_index = j.at("layer").get<std::size_t>();
    t.pruned_image_orig = j.at("pruned_image").get<std::vector<std::size_t>>();
    t.image_groups = j.at("image_groups").get<std::vector<std::vector<std::size_t>>>();
    t.text_groups = j.at("text_groups").get<std::vector<std::vector<std::size_t>>>();
    const Json& c = j.at("counts");
    t.image_before = c.at("image_before").get<std::size_t>();
    t.image_after_prune = c.at("image_after_prune").get<std::size_t>();
    t.image_after_merge = c.at("image_after_merge").get<std::size_t>();
    t.text_before = c.at("text_before").get<std::size_t>();
    t.text_after_merge = c.at("text_after_merge").get<std::size_t>();
    return t;
}

}  // namespace

Json to_json(const TraceReport& r) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "trace";
    j["model"] = model_to_json(r.model);
    j["workload"] = workload_to_json(r.workload);
    j["similarity"] = similarity_name(r.similarity);
    j["schedule"] = schedule_to_json(r.schedule);
    j["initial"] = Json{{"text", r.initial_text}, {"image", r.initial_image}};
    j["final"] = Json{{"text", r.final_text}, {"image", r.final_image}};
    if (r.grid_width.has_value()) {
        j["grid_width"] = *r.grid_width;
        Json grid = Json::array();
        // The protected lead token is not a patch; it gets coordinates -1.
        const std::size_t offset = 1;
        for (std::size_t i = 0; i < r.initial_image; ++i) {
            if (i < offset) {
                grid.push_back(Json{{"index", i}, {"row", -1}, {"col", -1}});
            } else {
                const std::size_t p = i - offset;
                grid.push_back(Json{{"index", i},
                                    {"row", static_cast<long long>(p / *r.grid_width)},
                                    {"col", static_cast<long long>(p % *r.grid_width)}});
            }
        }
        j["image_grid"] = grid;
    }
    Json traces = Json::array();
    for (const auto& t : r.traces) {
        traces.push_back(trace_record_to_json(t));
    }
    j["traces"] = traces;
    return j;
}

TraceReport trace_from_json(const Json& j) {
    require_version(j, "trace");
    TraceReport r;
    r.model = model_from_json(j.at("model"));
    r.workload = workload_from_json(j.at("workload"));
    r.similarity = parse_similarity(j.at("similarity").get<std::string>());
    r.schedule = schedule_from_json(j.at("schedule"));
    r.initial_text = j.at("initial").at("text").get<std::size_t>();
    r.initial_image = j.at("initial").at("image").get<std::size_t>();
    r.final_text = j.at("final").at("text").get<std::size_t>();
    r.final_image = j.at("final").at("image").get<std::size_t>();
    if (j.contains("grid_width")) {
        r.grid_width = j.at("grid_width").get<std::size_t>();
    }
    for (const Json& t : j.at("traces")) {
        r.traces.push_back(trace_record_from_json(t));
    }
    return r;
}

}  // namespace tokred::report
