#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tokred/commands.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> similarity;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_similarity = true) {
    cmd->add_option("--config", args.config_path, "configuration file")->required();
    cmd->add_option("--out", args.out_path, "output path (default: config 'output' or stdout)");
    cmd->add_option("--seed", args.seed, "override model.seed");
    if (with_similarity) {
        cmd->add_option("--similarity", args.similarity, "dot|cosine (override config)");
    }
}

tokred::RunConfig load(const CommonArgs& args) {
    tokred::RunConfig config = tokred::load_config(args.config_path);
    if (args.seed.has_value()) {
        config.model.seed = *args.seed;
    }
    if (args.similarity.has_value()) {
        config.similarity = tokred::parse_similarity(*args.similarity);
    }
    return config;
}

void emit(const CommonArgs& args, const tokred::RunConfig& config, const std::string& payload) {
    const std::string path = !args.out_path.empty() ? args.out_path : config.output_path;
    if (path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write output file: " + path);
    }
    out << payload;
}

std::string dump(const tokred::report::Json& j) {
    return j.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"token reduction simulator and benchmark for a cross-modal encoder"};
    app.require_subcommand(1);

    CommonArgs sim_args, bench_args, trace_args, sweep_args;
    std::size_t threads = 1;
    std::optional<std::size_t> grid_width;

    CLI::App* sim = app.add_subcommand("simulate", "analytic trajectory, FLOPs and memory report");
    add_common(sim, sim_args);

    CLI::App* bench = app.add_subcommand("bench", "measured baseline vs. reduced throughput");
    add_common(bench, bench_args);
    bench->add_option("--threads", threads, "worker threads (default 1)");

    CLI::App* trace = app.add_subcommand("trace", "per-layer prune and merge trace");
    add_common(trace, trace_args);
    trace->add_option("--grid", grid_width, "patch grid width for coordinate annotation");

    CLI::App* sweep = app.add_subcommand("sweep", "CSV over the config's sweep grid");
    add_common(sweep, sweep_args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (sim->parsed()) {
            const tokred::RunConfig config = load(sim_args);
            emit(sim_args, config, dump(tokred::report::to_json(tokred::make_simulate_report(config))));
        } else if (bench->parsed()) {
            const tokred::RunConfig config = load(bench_args);
            emit(bench_args, config,
                 dump(tokred::report::to_json(tokred::make_bench_report(config, threads))));
        } else if (trace->parsed()) {
            const tokred::RunConfig config = load(trace_args);
            emit(trace_args, config,
                 dump(tokred::report::to_json(tokred::make_trace_report(config, grid_width))));
        } else if (sweep->parsed()) {
            const tokred::RunConfig config = load(sweep_args);
            emit(sweep_args, config, tokred::sweep_csv(config));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
