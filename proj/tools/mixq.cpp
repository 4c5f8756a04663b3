#include "mixq/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"mixq - mixed-precision quantization workbench"};
    app.require_subcommand(1);

    std::string config_path;
    std::string log_path;
    mixq::CommandOptions opts;
    std::string bits;
    double lambda = -1.0;
    std::uint64_t seed = 0;
    bool have_seed = false;
    std::string out_dir;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config) {
            cmd->add_option("--config", config_path, "run configuration file")->required();
        }
        cmd->add_option("--seed", seed, "override the search master seed")
            ->each([&](const std::string&) { have_seed = true; });
        cmd->add_option("--out", out_dir, "override the output directory");
    };

    CLI::App* prune = app.add_subcommand("prune", "prune the toy model and save the artifact");
    add_common(prune, true);

    CLI::App* tune = app.add_subcommand("tune", "train one bit-width configuration");
    add_common(tune, true);
    tune->add_option("--bits", bits, "per-layer bit widths, e.g. 4848")->required();
    tune->add_option("--lambda", lambda, "trade-off parameter override");

    CLI::App* search = app.add_subcommand("search", "run the full configuration search");
    add_common(search, true);
    search->add_option("--lambda", lambda, "trade-off parameter override");
    search->add_flag("--resume", opts.resume, "replay records from an existing log");

    CLI::App* report = app.add_subcommand("report", "emit scatter data from a records log");
    report->add_option("--log", log_path, "records.jsonl to report on")->required();
    report->add_option("--lambda", lambda, "trade-off parameter override");
    report->add_option("--out", out_dir, "override the output directory");

    CLI11_PARSE(app, argc, argv);

    if (!bits.empty()) opts.bits = bits;
    if (lambda >= 0.0) opts.lambda = lambda;
    if (have_seed) opts.seed = seed;
    if (!out_dir.empty()) opts.out = out_dir;

    if (prune->parsed()) return mixq::cmd_prune(config_path, opts, std::cout, std::cerr);
    if (tune->parsed()) return mixq::cmd_tune(config_path, opts, std::cout, std::cerr);
    if (search->parsed()) return mixq::cmd_search(config_path, opts, std::cout, std::cerr);
    if (report->parsed()) return mixq::cmd_report(log_path, opts, std::cout, std::cerr);
    return mixq::exit_error;
}
