#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uplift/pipeline.hpp"
#include "uplift/rng.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "run configuration (JSON)")->required();
    cmd->add_option("--out", args.out, "override the output directory");
    cmd->add_option("--seed", args.seed, "override the global seed");
}

uplift::RunConfig load(const CommonArgs& args) {
    uplift::RunConfig cfg = uplift::load_run_config(args.config);
    if (args.out) cfg.out_dir = *args.out;
    if (args.seed) {
        cfg.seed = *args.seed;
        if (cfg.synth) cfg.synth->seed = uplift::derive_seed(cfg.seed, 1);
        cfg.tree.seed = uplift::derive_seed(cfg.seed, 3);
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uplift targeting toolkit: simulate, fit, optimize, evaluate, report"};
    app.require_subcommand(1);

    CommonArgs simulate_args, fit_args, optimize_args, evaluate_args, report_args;
    std::vector<std::string> policy_files;

    add_common(app.add_subcommand("simulate", "generate a synthetic experiment dataset"),
               simulate_args);
    add_common(app.add_subcommand("fit", "fit the configured estimator and export the uplift curve"),
               fit_args);
    add_common(app.add_subcommand("optimize", "turn uplift estimates into a treatment policy"),
               optimize_args);
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "offline policy evaluation against configured baselines");
    add_common(evaluate, evaluate_args);
    evaluate->add_option("--policy", policy_files, "policy CSV file(s); defaults to the optimize output");
    add_common(app.add_subcommand("report", "summarize run artifacts into one table"), report_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("simulate")) {
            uplift::run_simulate(load(simulate_args));
        } else if (app.got_subcommand("fit")) {
            uplift::run_fit(load(fit_args));
        } else if (app.got_subcommand("optimize")) {
            uplift::run_optimize(load(optimize_args));
        } else if (app.got_subcommand("evaluate")) {
            uplift::run_evaluate(load(evaluate_args), policy_files);
        } else if (app.got_subcommand("report")) {
            uplift::run_report(load(report_args));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return uplift::exit_code_for(e);
    }
    return 0;
}
