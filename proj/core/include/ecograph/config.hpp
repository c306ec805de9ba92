#pragma once

#include "ecograph/distill.hpp"
#include "ecograph/output.hpp"
#include "ecograph/simulator.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ecograph {

struct OutputsConfig {
    std::string dir = "out";
    OutputFormat format = OutputFormat::TidyCsv;
    std::vector<std::string> variables;  // empty = all
};

/// Declarative trainer section: one of the four distillation modes or one of
/// the Phase I strategies over a simplified/original pair.
struct TrainerConfig {
    std::string kind;  // data_to_process | data_to_ml | process_to_ml |
                       // process_to_process | residual | transfer | hybrid
    bool is_strategy = false;

    std::string observations_csv;       // data_to_* / strategy original
    std::string teacher_hbv_params;     // process_to_ml / strategy simplified
    std::string teacher_delgrosso_params;
    std::string student_parton_params;

    std::vector<std::string> calibrate = {"fc", "beta", "lp", "k1", "k2"};
    LossKind loss = LossKind::Nse;
    double lr = 0.0;  // 0 = mode default
    int iterations = 500;

    SeqConfig student;  // ml students; feature names filled at load
    int epochs = 100;
    int batch = 32;
    double ml_lr = 0.001;

    std::size_t ensemble_train = 512;
    std::size_t ensemble_holdout = 256;

    bool has_split = false;
    Window train, holdout;
    bool has_finetune = false;
    Window finetune;
};

/// A fully resolved run configuration: graph, forcing, bindings, schedule,
/// optional trainer, outputs and the seed, plus the source digest.
struct RunConfig {
    std::uint64_t seed = 0;
    WatershedGraph graph;
    ForcingSeries forcing = ForcingSeries::shared({});
    std::vector<UpdaterBinding> bindings;
    Schedule schedule;
    std::map<std::string, std::vector<double>> initial_values;  // name -> 1 or n values
    OutputsConfig outputs;
    bool has_trainer = false;
    TrainerConfig trainer;
    std::string digest;
    std::string base_dir;
};

/// Parses and resolves a JSON run configuration. Every validation finding is
/// collected; on any finding a ConfigError carrying the full list is thrown.
RunConfig load_run_config(const std::string& path);

/// Applies the config's "states.initial" section over the engine defaults.
NodeStates apply_initial_values(const Engine& engine, const RunConfig& config);

}  // namespace ecograph
