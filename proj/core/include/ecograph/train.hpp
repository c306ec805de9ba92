#pragma once

#include "ecograph/nn.hpp"
#include "ecograph/optim.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ecograph {

enum class LossKind { Mse, Nse };

/// Independent (soil_class, features) -> targets samples.
struct TabularDataset {
    std::vector<int> soil_classes;
    std::vector<std::vector<double>> features;
    std::vector<std::vector<double>> targets;

    std::size_t size() const { return features.size(); }
};

/// One contiguous series: per-step feature rows plus one target series per head.
struct SequenceDataset {
    std::vector<std::vector<double>> features;
    std::map<std::string, std::vector<double>> targets;

    std::size_t length() const { return features.size(); }
};

struct TrainOptions {
    LossKind loss = LossKind::Mse;
    OptimizerSpec optimizer = OptimizerSpec::adam(0.001);
    int epochs = 100;
    int batch_size = 32;
    int bptt_window = 30;  // GatedRecurrent truncation length
    FreezeMask freeze;
    std::uint64_t seed = 0;
    /// Fit feature/target normalizers on this dataset before training
    /// (skipped automatically when they are already fitted, e.g. fine-tuning).
    bool fit_normalizers = true;
};

struct TrainResult {
    std::vector<double> loss_trace;  // mean batch loss per epoch, normalized space
};

/// Minibatch training, fully deterministic given the seed. Frozen blocks are
/// bit-identical afterwards. Throws NonFiniteLoss naming the epoch.
TrainResult train_epochs(MlpRegressor& model, const TabularDataset& data,
                         const TrainOptions& opt);

/// LaggedMlp: shuffled window minibatches over full windows. GatedRecurrent:
/// sequential truncated backpropagation through time, hidden state carried
/// (detached) across chunks.
TrainResult train_epochs(SequenceRegressor& model, const SequenceDataset& data,
                         const TrainOptions& opt);

}  // namespace ecograph
