#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "qdarwin/config.hpp"
#include "qdarwin/errors.hpp"
#include "qdarwin/runner.hpp"
#include "qdarwin/version.hpp"

// Exit codes: 0 success, 2 config error, 3 numeric-invariant violation,
// 4 I/O error. No environment variables are consulted.

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::string unit;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
};

void add_common(CLI::App* sub, CommonOptions& opt) {
    sub->add_option("--config", opt.config_path, "path to the JSON experiment config")
        ->required();
    sub->add_option("--out", opt.out_dir, "output directory (overrides config output_dir)");
    sub->add_option("--seed", opt.seed, "master seed (overrides config model.seed)");
    sub->add_option("--threads", opt.threads, "worker threads, 0 = all cores");
    sub->add_option("--unit", opt.unit, "entropy unit for output files")
        ->check(CLI::IsMember({"nats", "bits"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(qdarwin::kToolName) +
                 " -- qubit decoherence, mutual information and redundancy"};
    app.set_version_flag("--version", qdarwin::kToolVersion);
    app.require_subcommand(1);

    CommonOptions opt;
    auto* simulate = app.add_subcommand(
        "simulate", "time sweep of MI profiles, redundancy and eigenvalue ranks");
    auto* decoherence =
        app.add_subcommand("decoherence", "decoherence factor trace over the time grid");
    auto* stats = app.add_subcommand("stats", "long-time moments of Gamma and Delta factors");
    auto* baseline = app.add_subcommand("baseline", "Haar/Page baselines and f* curves");
    for (auto* sub : {simulate, decoherence, stats, baseline}) add_common(sub, opt);
    for (auto* sub : {simulate, decoherence, stats, baseline})
        sub->callback([&opt, sub] {
            opt.seed_given = sub->count("--seed") > 0;
        });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion")
            return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        auto cfg = qdarwin::cli::load_config(opt.config_path);
        if (opt.seed_given) cfg.model.seed = opt.seed;
        if (!opt.unit.empty()) cfg.unit = opt.unit;
        const std::string out_dir = opt.out_dir.empty() ? cfg.output_dir : opt.out_dir;

        if (simulate->parsed()) qdarwin::cli::cmd_simulate(cfg, out_dir, opt.threads);
        if (decoherence->parsed()) qdarwin::cli::cmd_decoherence(cfg, out_dir, opt.threads);
        if (stats->parsed()) qdarwin::cli::cmd_stats(cfg, out_dir, opt.threads);
        if (baseline->parsed()) qdarwin::cli::cmd_baseline(cfg, out_dir, opt.threads);
        return 0;
    } catch (const qdarwin::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const qdarwin::InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 3;
    } catch (const qdarwin::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
