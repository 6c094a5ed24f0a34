// Command-line front end: steady | sweep | markov | tune | validate.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ghzres/experiment.hpp"

using namespace ghzres;

int main(int argc, char** argv) {
    CLI::App app{"engineered-reservoir GHZ stabilization toolbox"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int workers = 0;
    std::uint64_t seed = 0;
    bool no_cache = false;
    bool have_seed = false, have_out = false;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config_path, "experiment config file (JSON)");
        if (needs_config) c->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)")
            ->each([&](const std::string&) { have_out = true; });
        sub->add_option("--workers", workers, "worker threads (default: logical cores)");
        sub->add_option("--seed", seed, "RNG seed (overrides config)")
            ->each([&](const std::string&) { have_seed = true; });
        sub->add_flag("--no-cache", no_cache, "disable the sweep point cache");
    };

    auto* steady = app.add_subcommand("steady", "single steady-state solve with estimates");
    auto* sweep = app.add_subcommand("sweep", "grid of solves over swept rates");
    auto* markov = app.add_subcommand("markov", "chain constructions and closed-form checks");
    auto* tune = app.add_subcommand("tune", "grid-search rate optimization");
    auto* validate = app.add_subcommand("validate", "run the built-in invariant suite");
    add_common(steady, true);
    add_common(sweep, true);
    add_common(markov, true);
    add_common(tune, true);
    (void)validate;

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(validate)) return cmd_validate().exit_code;

        ExperimentConfig cfg = load_config(config_path);
        if (have_out) cfg.out_dir = out_dir;
        if (have_seed) cfg.seed = seed;

        RunResult res;
        if (app.got_subcommand(steady)) {
            res = cmd_steady(cfg);
            std::cout << res.summary.dump(1) << "\n";
        } else if (app.got_subcommand(sweep)) {
            res = cmd_sweep(cfg, workers, !no_cache);
            std::cout << res.summary.dump(1) << "\n";
        } else if (app.got_subcommand(markov)) {
            res = cmd_markov(cfg);
            std::cout << res.summary.dump(1) << "\n";
        } else if (app.got_subcommand(tune)) {
            res = cmd_tune(cfg, workers);
            std::cout << res.summary.dump(1) << "\n";
        }
        return res.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
