#include <iostream>

#include <CLI11.hpp>

#include "qmarket/experiment.hpp"
#include "qmarket/selftest.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qmarket: sphere-model market experiments and option pricing"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    unsigned workers = 1;
    auto* run = app.add_subcommand("run", "Run the experiment described by a YAML config");
    run->add_option("config", config_path, "Config file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Override the config seed");
    auto* out_opt = run->add_option("--out", out_dir, "Override the output directory");
    auto* workers_opt = run->add_option("--workers", workers, "Worker threads (results do not depend on it)");

    double facet_bound = 1.0;
    auto* selftest = app.add_subcommand("selftest", "Fast deterministic consistency checks");
    // Mutation fixture: a wrong facet constant must make the selftest fail.
    selftest->add_option("--facet-bound", facet_bound)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qmarket::cli::kExitParse;
    }

    if (run->parsed()) {
        qmarket::cli::RunOverrides overrides;
        if (*seed_opt) overrides.seed = seed;
        if (*out_opt) overrides.out_dir = out_dir;
        if (*workers_opt) overrides.workers = workers;
        return qmarket::cli::run(config_path, overrides, std::cout, std::cerr);
    }

    qmarket::SelftestOptions options;
    options.facet_bound = facet_bound;
    const auto report = qmarket::run_selftest(options);
    std::cout << report.to_json().dump(2) << "\n";
    if (!report.passed()) {
        for (const auto& name : report.failed()) std::cerr << "FAILED: " << name << "\n";
        return qmarket::cli::kExitFailure;
    }
    return qmarket::cli::kExitOk;
}
