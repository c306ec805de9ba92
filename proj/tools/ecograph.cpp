#include "commands.hpp"

#include <ecograph/errors.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

using ecograph::cli::CommonArgs;

void add_common(CLI::App* cmd, CommonArgs& args, bool* seed_given) {
    cmd->add_option("--config", args.config_path, "Run configuration (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "Output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "Seed override")->each([seed_given](const std::string&) {
        *seed_given = true;
    });
    cmd->add_flag("--plot", args.plot, "Also write SVG line plots");
}

int dispatch(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const ecograph::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ecograph::PreconditionViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ecograph::AxisMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ecograph::InvalidBounds& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ecograph::Error& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ecograph - graph-based ecohydrological simulation and distillation engine"};
    app.require_subcommand(1);

    CommonArgs args;
    bool seed_given = false;
    std::string map_path, ref_path, sim_path, variable;

    CLI::App* simulate = app.add_subcommand("simulate", "Run the configured simulation");
    add_common(simulate, args, &seed_given);

    CLI::App* coarsen = app.add_subcommand("coarsen", "Coarsen the graph and remap forcing");
    add_common(coarsen, args, &seed_given);
    coarsen->add_option("--map", map_path, "Fine-to-coarse map file (one coarse id per line)")
        ->required();

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "Data-to-process distillation (calibration)");
    add_common(calibrate, args, &seed_given);

    CLI::App* distill = app.add_subcommand("distill", "Run the configured trainer job");
    add_common(distill, args, &seed_given);

    CLI::App* evaluate = app.add_subcommand("evaluate", "Score one run against another");
    add_common(evaluate, args, &seed_given);
    evaluate->add_option("--ref", ref_path, "Reference tidy CSV or date,value CSV")->required();
    evaluate->add_option("--sim", sim_path, "Simulated tidy CSV or date,value CSV")->required();
    evaluate->add_option("--variable", variable, "Variable to score")->required();

    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "Verify gradients against central differences");
    add_common(gradcheck, args, &seed_given);

    CLI11_PARSE(app, argc, argv);
    args.has_seed = seed_given;

    if (simulate->parsed()) return dispatch([&] { return ecograph::cli::cmd_simulate(args); });
    if (coarsen->parsed())
        return dispatch([&] { return ecograph::cli::cmd_coarsen(args, map_path); });
    if (calibrate->parsed())
        return dispatch([&] { return ecograph::cli::cmd_distill(args, "data_to_process"); });
    if (distill->parsed()) return dispatch([&] { return ecograph::cli::cmd_distill(args); });
    if (evaluate->parsed())
        return dispatch(
            [&] { return ecograph::cli::cmd_evaluate(args, ref_path, sim_path, variable); });
    if (gradcheck->parsed()) return dispatch([&] { return ecograph::cli::cmd_gradcheck(args); });
    return 1;
}
