#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>

#include "config.hpp"
#include "runner.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
};

void add_run_options(CLI::App& sub, Overrides& o) {
    sub.add_option("--config,-c", o.config_path, "experiment configuration (YAML)")->required()->check(CLI::ExistingFile);
    sub.add_option("--out,-o", o.out, "output directory (default: config 'output')");
    sub.add_option("--seed", o.seed, "random seed (overrides the config)");
    sub.add_option("--jobs,-j", o.jobs, "worker threads, 0 for all cores (overrides the config)");
}

int run(const std::string& subcommand, const Overrides& o) {
    using namespace gammalab::cli;
    ExperimentConfig config = load_config(o.config_path);
    if (subcommand != "run") {
        if (!config.experiment.empty() && config.experiment != subcommand)
            throw ConfigError(o.config_path + ": key 'experiment': config is for '" + config.experiment +
                              "', not '" + subcommand + "'");
        config.experiment = subcommand;
    } else if (config.experiment.empty()) {
        throw ConfigError(o.config_path + ": key 'experiment': required by 'run'");
    }
    if (o.seed) config.seed = config.solver.seed = *o.seed;
    if (o.jobs) config.jobs = config.solver.jobs = *o.jobs;
    if (!o.out.empty()) config.output = o.out;

    const RunResult result = run_experiment(config, config.output);
    std::cout << "gamma-lab " << result.experiment << ": wrote";
    for (const auto& f : result.files) std::cout << ' ' << f;
    std::cout << " in " << config.output << '\n';
    if (result.sweep) std::cout << "verdict: " << result.sweep->verdict << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gamma-lab: numerical experiments on nonlocal-to-local variational limits"};
    app.set_version_flag("--version", gammalab::cli::tool_version());
    app.require_subcommand(1);

    Overrides overrides;
    std::vector<std::pair<std::string, CLI::App*>> runs;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"validate", "sample the growth hypotheses of the declared densities"},
        {"f0", "evaluate the separated nonlocal limit density by quadrature"},
        {"envelope", "convex envelope of a one-dimensional local density"},
        {"minimize", "minimize the discrete energy with affine boundary data"},
        {"sweep-eps", "concentration sweep over k_list"},
        {"cell", "cell problem on Q_T for a single T"},
        {"sweep-T", "cell problems over T_list with both boundary variants"},
        {"run", "run the experiment named in the configuration"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_run_options(*sub, overrides);
        runs.emplace_back(name, sub);
    }
    CLI::App* list = app.add_subcommand("list-builtins", "print the built-in densities and kernels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (list->parsed()) {
        std::cout << gammalab::cli::builtin_catalog_text();
        return 0;
    }
    for (const auto& [name, sub] : runs) {
        if (!sub->parsed()) continue;
        try {
            return run(name, overrides);
        } catch (const std::exception& e) {
            std::cerr << "gamma-lab: " << name << ": error: " << e.what() << '\n';
            return 1;
        }
    }
    return 1;
}
