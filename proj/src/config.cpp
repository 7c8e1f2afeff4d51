#include "tokred/config.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tokred {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string current;
    std::istringstream in(s);
    while (std::getline(in, current, sep)) {
        parts.push_back(trim(current));
    }
    return parts;
}

struct ParseContext {
    const std::string& origin;
    std::size_t line = 0;
    std::string key;

    [[noreturn]] void fail(const std::string& message) const {
        throw std::runtime_error(origin + ":" + std::to_string(line) + ": key '" + key + "': " +
                                 message);
    }
};

std::size_t parse_size(const ParseContext& ctx, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) {
            ctx.fail("trailing characters in integer '" + value + "'");
        }
        return static_cast<std::size_t>(v);
    } catch (const std::runtime_error&) {
        throw;
    } catch (const std::exception&) {
        ctx.fail("expected an integer, got '" + value + "'");
    }
}

double parse_double(const ParseContext& ctx, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) {
            ctx.fail("trailing characters in number '" + value + "'");
        }
        return v;
    } catch (const std::runtime_error&) {
        throw;
    } catch (const std::exception&) {
        ctx.fail("expected a number, got '" + value + "'");
    }
}

std::vector<std::size_t> parse_size_list(const ParseContext& ctx, const std::string& value) {
    std::vector<std::size_t> out;
    if (trim(value).empty()) {
        return out;
    }
    for (const std::string& part : split(value, ',')) {
        out.push_back(parse_size(ctx, part));
    }
    return out;
}

std::vector<double> parse_double_list(const ParseContext& ctx, const std::string& value) {
    std::vector<double> out;
    if (trim(value).empty()) {
        return out;
    }
    for (const std::string& part : split(value, ',')) {
        out.push_back(parse_double(ctx, part));
    }
    return out;
}

}  // namespace

merger::SimilarityMode parse_similarity(const std::string& name) {
    if (name == "dot") {
        return merger::SimilarityMode::dot;
    }
    if (name == "cosine") {
        return merger::SimilarityMode::cosine;
    }
    throw std::invalid_argument("similarity must be 'dot' or 'cosine', got '" + name + "'");
}

const char* similarity_name(merger::SimilarityMode mode) {
    return mode == merger::SimilarityMode::dot ? "dot" : "cosine";
}

void RunConfig::validate() const {
    model.validate();
    workload.validate();
    validate_schedule(schedule, model);
    if (bench_duration_s < 1.0) {
        throw std::invalid_argument("bench.duration_s must be >= 1");
    }
    if (bench_warmup_s < 0.0) {
        throw std::invalid_argument("bench.warmup_s must be >= 0");
    }
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::optional<std::size_t> image_resolution;
    std::optional<std::size_t> patch_size;
    bool saw_image_tokens = false;
    std::vector<std::size_t> schedule_layers;
    double prune_ratio = 0.0;
    double image_merge_ratio = 0.0;
    double text_merge_ratio = 0.0;

    std::set<std::string> seen_keys;
    std::istringstream in(text);
    std::string raw_line;
    std::size_t lineno = 0;
    while (std::getline(in, raw_line)) {
        ++lineno;
        std::string line = raw_line;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected 'key = value', got '" + line + "'");
        }
        ParseContext ctx{origin, lineno, trim(line.substr(0, eq))};
        const std::string value = trim(line.substr(eq + 1));
        if (!seen_keys.insert(ctx.key).second) {
            ctx.fail("duplicate key");
        }

        if (ctx.key == "model.layers") {
            cfg.model.num_layers = parse_size(ctx, value);
        } else if (ctx.key == "model.hidden_dim") {
            cfg.model.hidden_dim = parse_size(ctx, value);
        } else if (ctx.key == "model.heads") {
            cfg.model.num_heads = parse_size(ctx, value);
        } else if (ctx.key == "model.mlp_ratio") {
            cfg.model.mlp_ratio = parse_double(ctx, value);
        } else if (ctx.key == "model.seed") {
            cfg.model.seed = parse_size(ctx, value);
        } else if (ctx.key == "workload.text_len") {
            cfg.workload.text_len = parse_size(ctx, value);
        } else if (ctx.key == "workload.image_tokens") {
            cfg.workload.image_tokens = parse_size(ctx, value);
            saw_image_tokens = true;
        } else if (ctx.key == "workload.image_resolution") {
            image_resolution = parse_size(ctx, value);
        } else if (ctx.key == "workload.patch_size") {
            patch_size = parse_size(ctx, value);
        } else if (ctx.key == "workload.batch_size") {
            cfg.workload.batch_size = parse_size(ctx, value);
        } else if (ctx.key == "workload.seed") {
            cfg.workload.seed = parse_size(ctx, value);
        } else if (ctx.key == "workload.pad_fraction") {
            cfg.workload.pad_fraction = parse_double(ctx, value);
        } else if (ctx.key == "schedule.layers") {
            schedule_layers = parse_size_list(ctx, value);
        } else if (ctx.key == "schedule.prune_ratio") {
            prune_ratio = parse_double(ctx, value);
        } else if (ctx.key == "schedule.image_merge_ratio") {
            image_merge_ratio = parse_double(ctx, value);
        } else if (ctx.key == "schedule.text_merge_ratio") {
            text_merge_ratio = parse_double(ctx, value);
        } else if (ctx.key == "bench.duration_s") {
            cfg.bench_duration_s = parse_double(ctx, value);
        } else if (ctx.key == "bench.warmup_s") {
            cfg.bench_warmup_s = parse_double(ctx, value);
        } else if (ctx.key == "similarity") {
            try {
                cfg.similarity = parse_similarity(value);
            } catch (const std::invalid_argument& e) {
                ctx.fail(e.what());
            }
        } else if (ctx.key == "output") {
            cfg.output_path = value;
        } else if (ctx.key == "sweep.layer_sets") {
            for (const std::string& group : split(value, '|')) {
                cfg.sweep.layer_sets.push_back(parse_size_list(ctx, group));
            }
        } else if (ctx.key == "sweep.prune_ratios") {
            cfg.sweep.prune_ratios = parse_double_list(ctx, value);
        } else if (ctx.key == "sweep.image_merge_ratios") {
            cfg.sweep.image_merge_ratios = parse_double_list(ctx, value);
        } else if (ctx.key == "sweep.text_merge_ratios") {
            cfg.sweep.text_merge_ratios = parse_double_list(ctx, value);
        } else {
            ctx.fail("unknown key");
        }
    }

    if (image_resolution.has_value() || patch_size.has_value()) {
        if (saw_image_tokens) {
            throw std::runtime_error(origin +
                                     ": workload.image_tokens conflicts with "
                                     "workload.image_resolution/patch_size");
        }
        if (!image_resolution.has_value() || !patch_size.has_value()) {
            throw std::runtime_error(origin +
                                     ": workload.image_resolution and workload.patch_size "
                                     "must be given together");
        }
        // Patch grid plus the protected lead token.
        cfg.workload.image_tokens = patch_grid_tokens(*image_resolution, *patch_size) + 1;
    }

    for (std::size_t layer : schedule_layers) {
        cfg.schedule.entries.push_back(
            ScheduleEntry{layer, prune_ratio, image_merge_ratio, text_merge_ratio});
    }

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("config file not found: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

}  // namespace tokred
