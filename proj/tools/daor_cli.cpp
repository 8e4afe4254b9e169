// daor: beamformer design and Monte Carlo experiments that trade achievable
// rate against direction-of-arrival obfuscation. See README.md for the config
// schema and output formats.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "daor/daor.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_path;
    std::string format;  // "", "csv" or "json"
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string strategy;
    int q = 0;
    int trials = 0;
    int workers = 0;
};

void add_common(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_path, "JSON experiment config")->required();
    cmd->add_option("--seed", opt.seed, "override master_seed")->each([&](const std::string&) {
        opt.seed_set = true;
    });
    cmd->add_option("--strategy", opt.strategy, "os|ss")->check(CLI::IsMember({"os", "ss"}));
    cmd->add_option("--q", opt.q, "shortlist size for the ss strategy");
    cmd->add_option("--trials", opt.trials, "Monte Carlo trials");
    cmd->add_option("--out", opt.out_path, "output file (stdout when omitted)");
    cmd->add_option("--format", opt.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--workers", opt.workers, "worker threads");
}

daor::ExperimentConfig load_with_overrides(const CliOptions& opt) {
    daor::ExperimentConfig ec = daor::load_config(opt.config_path);
    if (opt.seed_set) ec.master_seed = opt.seed;
    if (!opt.strategy.empty()) ec.strategy = opt.strategy;
    if (opt.q > 0) ec.ss_shortlist_q = opt.q;
    if (opt.trials > 0) ec.trials = opt.trials;
    if (opt.workers > 0) ec.workers = opt.workers;
    ec.validate();
    return ec;
}

void emit(const CliOptions& opt, const std::string& payload, const std::string& command,
          double wall_ms) {
    if (opt.out_path.empty()) {
        std::cout << payload;
        return;
    }
    daor::write_text_file(opt.out_path, payload);
    daor::write_text_file(opt.out_path + ".meta.json",
                          daor::timing_sidecar(command, wall_ms).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transmit beamformer design with direction-of-arrival obfuscation"};
    app.require_subcommand(1);

    CliOptions opt;
    CLI::App* cmd_design = app.add_subcommand("design", "one seeded design, JSON record");
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "SNR x gamma_th Monte Carlo sweep");
    CLI::App* cmd_beam = app.add_subcommand("beampattern", "received beampattern of one design");
    CLI::App* cmd_compare = app.add_subcommand("compare", "os vs ss rate and cost comparison");
    CLI::App* cmd_bounds = app.add_subcommand("bounds", "feasible obfuscation-ratio band stats");
    for (CLI::App* cmd : {cmd_design, cmd_sweep, cmd_beam, cmd_compare, cmd_bounds})
        add_common(cmd, opt);

    CLI11_PARSE(app, argc, argv);

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&t0] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    try {
        const daor::ExperimentConfig ec = load_with_overrides(opt);

        if (cmd_design->parsed()) {
            if (opt.format == "csv")
                throw daor::ConfigError("design emits JSON only; use --format json");
            const daor::DesignRun run = daor::run_design(ec);
            emit(opt, run.record.dump(2) + "\n", "design", elapsed_ms());
        } else if (cmd_sweep->parsed()) {
            const daor::SweepOutput out = daor::run_sweep(ec);
            const std::string payload = opt.format == "json"
                                            ? daor::sweep_to_json(ec, out).dump(2) + "\n"
                                            : daor::sweep_to_csv(out);
            emit(opt, payload, "sweep", elapsed_ms());
        } else if (cmd_beam->parsed()) {
            const daor::BeampatternRun run = daor::run_beampattern(ec);
            const std::string payload = opt.format == "json"
                                            ? daor::beampattern_to_json(ec, run).dump(2) + "\n"
                                            : daor::beampattern_to_csv(ec, run);
            emit(opt, payload, "beampattern", elapsed_ms());
        } else if (cmd_compare->parsed()) {
            const auto rows = daor::run_compare(ec);
            const std::string payload = opt.format == "json"
                                            ? daor::compare_to_json(ec, rows).dump(2) + "\n"
                                            : daor::compare_to_csv(rows);
            emit(opt, payload, "compare", elapsed_ms());
        } else if (cmd_bounds->parsed()) {
            const auto rows = daor::run_bounds(ec);
            const std::string payload = opt.format == "json"
                                            ? daor::bounds_to_json(ec, rows).dump(2) + "\n"
                                            : daor::bounds_to_csv(rows);
            emit(opt, payload, "bounds", elapsed_ms());
        }
    } catch (const daor::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const daor::InfeasiblePrivacy& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
