#include "commands.hpp"

#include "genrehawkes/error.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

using namespace genrehawkes::cli;

int main(int argc, char** argv) {
    CLI::App app{"Genre-cluster Hawkes modelling of upload streams"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file; flags on the command line take precedence");

    RunConfig cfg;
    std::string out = ".";
    std::string sweep;
    std::int64_t eta = 0;

    // Flags live on the top-level app so a single config file can serve every
    // subcommand; subcommands pass options through to it.
    app.add_option("--input", cfg.input, "event file (.jsonl or .csv)");
    app.add_option("--out", out, "artifact directory")->capture_default_str();
    auto* eta_opt = app.add_option("--eta", eta, "edge-weight threshold for tag-graph pruning");
    auto* sweep_opt = app.add_option("--sweep", sweep, "report component counts for eta in A:B");
    app.add_option("--bin-width", cfg.bin_width, "days per bin of the piecewise-constant NHPP")->capture_default_str();
    app.add_option("--train-days", cfg.train_days, "training window length in days")->capture_default_str();
    app.add_option("--horizon-days", cfg.horizon_days, "forecast horizon in days")->capture_default_str();
    app.add_option("--w-comments", cfg.w_comments, "weight of comments in popularity")->capture_default_str();
    app.add_option("--mc-samples", cfg.mc_samples, "Monte-Carlo forecast samples")->capture_default_str();
    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    app.add_option("--models", cfg.models, "comma-separated model list")->delimiter(',');
    app.add_option("--threads", cfg.threads, "worker threads (0 = all cores)")->capture_default_str();
    app.add_option("--popularity-average", cfg.popularity_average, "uploader average: prior or all_time")
        ->capture_default_str();
    app.add_option("--corpus-spec", cfg.corpus_spec, "JSON cluster spec for simulate");

    const std::map<std::string, std::pair<std::string, std::function<int(const RunConfig&)>>> commands = {
        {"cluster", {"build the tag graph and assign videos to genre clusters", cmd_cluster}},
        {"fit", {"fit Hawkes and baseline models per cluster", cmd_fit}},
        {"forecast", {"back-test every model and forecast past the data", cmd_forecast}},
        {"attribute", {"split endogenous activity into self, popularity and exogenous shares", cmd_attribute}},
        {"simulate", {"write a synthetic multi-cluster corpus with ground truth", cmd_simulate}},
        {"report", {"collate artifacts into report.json and plot-ready CSVs", cmd_report}},
    };
    for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        cfg.out = out;
        if (*eta_opt) cfg.eta = eta;
        if (*sweep_opt) cfg.sweep = parse_sweep(sweep);
        validate(cfg, command);
        return commands.at(command).second(cfg);
    } catch (const UsageError& e) {
        std::cerr << "genrehawkes " << command << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "genrehawkes " << command << ": " << e.what() << '\n';
        return 1;
    }
}
