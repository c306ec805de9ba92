#pragma once

#include "ecograph/hbv.hpp"
#include "ecograph/metrics.hpp"
#include "ecograph/nitrif.hpp"
#include "ecograph/nn.hpp"
#include "ecograph/train.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace ecograph {

enum class DistillMode { DataToProcess, DataToMl, ProcessToMl, ProcessToProcess };
enum class Phase1Strategy { DirectSurrogate, Residual, Transfer, Hybrid };

std::string to_string(DistillMode mode);

/// Half-open step-index window [begin, end).
struct Window {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - begin; }
    bool valid() const { return end > begin; }
    bool overlaps(const Window& other) const {
        return begin < other.end && other.begin < end;
    }

    template <class T>
    std::vector<T> slice(const std::vector<T>& series) const {
        if (end > series.size()) throw LengthMismatch("window exceeds series length");
        return std::vector<T>(series.begin() + static_cast<long>(begin),
                              series.begin() + static_cast<long>(end));
    }
};

// ---------------------------------------------------------------------------
// Mode 1: data -> process (differentiable calibration)
// ---------------------------------------------------------------------------

/// Physical bounds for the sigmoid reparameterization of each calibratable
/// HBV parameter. The recession-rate ranges are disjoint so any bounded
/// combination keeps K0 >= K1 >= K2.
std::map<std::string, std::pair<double, double>> default_hbv_bounds();

struct HbvCalibrationJob {
    ForcingSeries forcing;
    std::vector<double> observations;  // aligned with forcing
    Window train, holdout;
    HbvParams<double> initial;         // starting point; also carries fixed params
    std::vector<std::string> calibrate = {"fc", "beta", "lp", "k1", "k2"};
    std::map<std::string, std::pair<double, double>> bounds = default_hbv_bounds();
    LossKind loss = LossKind::Nse;
    OptimizerSpec optimizer = OptimizerSpec::adam(0.01);
    int iterations = 500;
    std::uint64_t seed = 0;
};

struct HbvCalibrationResult {
    HbvParams<double> fitted;          // best iterate by training loss
    std::vector<double> loss_trace;    // per iteration
    SkillMetrics train_skill;
    SkillMetrics holdout_skill;
};

/// Gradient descent through the differentiable HBV updater over the training
/// window. Deterministic given the seed; throws DivergedOptimization when the
/// loss rises 50 iterations in a row.
HbvCalibrationResult calibrate_process(const HbvCalibrationJob& job);

/// Plain double-path simulation of lumped HBV streamflow over a forcing
/// series (the teacher generator for the distillation experiments).
std::vector<double> simulate_hbv_series(const HbvParams<double>& params,
                                        const ForcingSeries& forcing);

// ---------------------------------------------------------------------------
// Modes 2 & 3: data -> ML, process -> ML (surrogate distillation)
// ---------------------------------------------------------------------------

struct SurrogateJob {
    DistillMode mode = DistillMode::ProcessToMl;  // or DataToMl
    ForcingSeries forcing;
    std::vector<double> teacher_series;  // teacher output (or observations), full axis
    Window train, holdout;               // must be disjoint
    SeqConfig student;
    TrainOptions train_options;
    std::string head = "streamflow";
};

struct SurrogateResult {
    SequenceRegressor model;
    std::vector<double> predictions;  // full axis
    TrainResult trace;
    SkillMetrics train_skill;
    SkillMetrics holdout_skill;
};

SurrogateResult distill_surrogate(const SurrogateJob& job);

// ---------------------------------------------------------------------------
// Mode 4: process -> process (cross-model transfer)
// ---------------------------------------------------------------------------

/// One soil-environment draw for the nitrification ensembles.
struct EnvSample {
    SoilEnv env;
    double nh4 = 0.0;  // g N/m^2 available
    int soil_class = 0;
};

std::vector<EnvSample> random_env_ensemble(std::size_t n, std::uint64_t seed);

struct ProcessTransferJob {
    std::vector<EnvSample> train, holdout;
    std::function<double(const EnvSample&)> teacher;  // teacher flux, g N/m^2/day
    std::string teacher_variable = "nitrification";
    std::string student_variable = "nitrification";
    NitrifParamsParton<double> initial;               // student start; z/bd/porosity fixed
    std::map<std::string, std::pair<double, double>> bounds = {
        {"k1", {1e-4, 1.0}},   {"k2", {1e-4, 2.0}},    {"w_opt", {0.05, 0.95}},
        {"t_opt", {0.0, 40.0}}, {"ph_half", {3.0, 9.0}},
    };
    OptimizerSpec optimizer = OptimizerSpec::adam(0.01);
    int iterations = 500;
    std::uint64_t seed = 0;
};

struct ProcessTransferResult {
    NitrifParamsParton<double> fitted;
    std::vector<double> loss_trace;
    SkillMetrics train_agreement;
    SkillMetrics holdout_agreement;
};

/// Fits the Parton-type student so its fluxes match the teacher over the
/// training ensemble; reports holdout agreement.
ProcessTransferResult transfer_process(const ProcessTransferJob& job);

// ---------------------------------------------------------------------------
// Phase I strategies over simplified/original pairs
// ---------------------------------------------------------------------------

struct ResidualPlan {
    std::vector<std::vector<double>> features;  // per-step inputs on the common axis
    std::vector<double> simplified;
    std::vector<double> original;
    Window train, holdout;
    std::vector<int> hidden = {64, 64};
    TrainOptions train_options;
};

struct ResidualResult {
    MlpRegressor corrector;
    std::vector<double> corrected;  // simplified + corrector, full axis
    SkillMetrics train_skill;       // corrected vs original
    SkillMetrics holdout_skill;
    bool no_improvement = false;    // corrected did not beat simplified on train
};

/// Learns original - simplified from (inputs, simplified output).
ResidualResult residual_learn(const ResidualPlan& plan);

struct TransferPlan {
    SequenceDataset pretrain;  // abundant simplified-model data
    SequenceDataset finetune;  // scarce original-model data
    SeqConfig student;
    TrainOptions pretrain_options;
    TrainOptions finetune_options;  // freeze mask applied internally
};

struct TransferResult {
    SequenceRegressor model;
    TrainResult pretrain_trace;
    TrainResult finetune_trace;
};

/// Pretrains the full student, then fine-tunes with every block except the
/// output heads frozen.
TransferResult transfer_learn(const TransferPlan& plan);

struct HybridPlan {
    ResidualPlan residual;   // paired simplified/original windows
    SeqConfig student;
    TrainOptions pretrain_options;
    TrainOptions finetune_options;
    Window finetune_window;  // original-data window for head adaptation
    /// Window of (cheap) combined-predictor data for surrogate pretraining;
    /// defaults to the residual training window when left invalid.
    Window pretrain_window;
};

struct HybridResult {
    ResidualResult residual_stage;
    TransferResult transfer_stage;
    std::vector<double> predictions;  // full axis, final model
};

/// Residual correction first, then transfer alignment of the combined
/// predictor (pipeline order recorded in report metadata).
HybridResult hybrid_distill(const HybridPlan& plan);

}  // namespace ecograph
