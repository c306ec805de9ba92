#pragma once

#include "ecograph/autodiff.hpp"
#include "ecograph/errors.hpp"
#include "ecograph/forcing.hpp"
#include "ecograph/rng.hpp"
#include "ecograph/tensor.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace ecograph {

/// Named parameter matrix; bias blocks use rows == 1.
struct ParamBlock {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
};

/// Per-block training flags. Empty set means everything trains.
struct FreezeMask {
    std::set<std::string> frozen;

    bool is_frozen(const std::string& block) const { return frozen.count(block) > 0; }

    static FreezeMask none() { return {}; }

    /// Freeze every block except output heads (block names "head.*").
    static FreezeMask all_but_heads(const std::vector<ParamBlock>& blocks) {
        FreezeMask m;
        for (const auto& b : blocks)
            if (b.name.rfind("head.", 0) != 0) m.frozen.insert(b.name);
        return m;
    }
};

std::vector<double> pack(const std::vector<ParamBlock>& blocks);
void unpack(std::vector<ParamBlock>& blocks, const std::vector<double>& theta);
std::vector<std::uint8_t> frozen_flags(const std::vector<ParamBlock>& blocks,
                                       const FreezeMask& mask);

/// Parameters lifted onto a tape (or copied as plain doubles), aligned
/// index-for-index with the model's blocks.
template <class T>
using BoundParams = std::vector<Tensor<T>>;

inline BoundParams<double> bind_values(const std::vector<ParamBlock>& blocks) {
    BoundParams<double> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) {
        Tensor<double> t(b.rows, b.cols);
        t.data = b.values;
        out.push_back(std::move(t));
    }
    return out;
}

inline BoundParams<Var> bind_params(Tape& tape, const std::vector<ParamBlock>& blocks) {
    BoundParams<Var> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) {
        Tensor<Var> t(b.rows, b.cols);
        for (std::size_t i = 0; i < b.values.size(); ++i) t.data[i] = tape.leaf(b.values[i]);
        out.push_back(std::move(t));
    }
    return out;
}

/// Per-feature standardization statistics, fitted on the training split only
/// and stored with the model. Identity until fitted.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    bool fitted() const { return !mean.empty(); }
    void fit(const std::vector<std::vector<double>>& rows, std::size_t dim);

    template <class T>
    T apply_one(std::size_t i, const T& x) const {
        if (!fitted()) return x * 1.0;
        return (x - mean[i]) * (1.0 / stddev[i]);
    }

    double unapply_one(std::size_t i, double y) const {
        if (!fitted()) return y;
        return y * stddev[i] + mean[i];
    }
};

// ---------------------------------------------------------------------------
// MLP with soil-class embedding
// ---------------------------------------------------------------------------

struct MlpConfig {
    int n_soil_classes = 1;
    int embed_dim = 4;
    std::vector<std::string> feature_names;
    std::vector<int> hidden = {64, 64, 64, 64};
    std::vector<std::string> output_names = {"out"};
};

/// Feedforward regressor: soil-class embedding concatenated with standardized
/// dynamic features, LayerNorm on the combined input, ReLU hidden stack,
/// linear output.
class MlpRegressor {
public:
    MlpRegressor() = default;
    static MlpRegressor create(MlpConfig cfg, std::uint64_t seed);
    static MlpRegressor from_parts(MlpConfig cfg, std::vector<ParamBlock> blocks,
                                   Normalizer feature_norm, Normalizer target_norm);

    const MlpConfig& config() const { return cfg_; }
    std::vector<ParamBlock>& blocks() { return blocks_; }
    const std::vector<ParamBlock>& blocks() const { return blocks_; }
    Normalizer& feature_norm() { return feature_norm_; }
    const Normalizer& feature_norm() const { return feature_norm_; }
    Normalizer& target_norm() { return target_norm_; }
    const Normalizer& target_norm() const { return target_norm_; }

    /// Normalized-space forward; the trainer computes losses in this space.
    template <class T>
    std::vector<T> forward_normalized(const BoundParams<T>& params, int soil_class,
                                      const std::vector<T>& features) const {
        if (soil_class < 0 || soil_class >= cfg_.n_soil_classes)
            throw UnknownSoilClass("soil class " + std::to_string(soil_class) +
                                   " outside catalog of " +
                                   std::to_string(cfg_.n_soil_classes));
        if (features.size() != cfg_.feature_names.size())
            throw SchemaMismatch("expected " + std::to_string(cfg_.feature_names.size()) +
                                 " features, got " + std::to_string(features.size()));
        std::vector<T> x;
        x.reserve(static_cast<std::size_t>(cfg_.embed_dim) + features.size());
        const Tensor<T>& embed = params[0];
        for (int e = 0; e < cfg_.embed_dim; ++e)
            x.push_back(embed.at(static_cast<std::size_t>(soil_class),
                                 static_cast<std::size_t>(e)) *
                        1.0);
        for (std::size_t f = 0; f < features.size(); ++f)
            x.push_back(feature_norm_.apply_one(f, features[f]));
        x = layer_norm(x);
        std::size_t k = 1;
        for (std::size_t layer = 0; layer < cfg_.hidden.size(); ++layer) {
            const Tensor<T>& w = params[k++];
            const Tensor<T>& b = params[k++];
            std::vector<T> h = matvec(w, x);
            for (std::size_t i = 0; i < h.size(); ++i) h[i] = relu(h[i] + b.data[i]);
            x = std::move(h);
        }
        const Tensor<T>& w_out = params[k++];
        const Tensor<T>& b_out = params[k++];
        std::vector<T> y = matvec(w_out, x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] + b_out.data[i];
        return y;
    }

    /// Plain inference in physical units.
    std::vector<double> predict(int soil_class, std::span<const double> features) const;

private:
    MlpConfig cfg_;
    std::vector<ParamBlock> blocks_;
    Normalizer feature_norm_;
    Normalizer target_norm_;
};

// ---------------------------------------------------------------------------
// Sequence regressors
// ---------------------------------------------------------------------------

enum class SeqMode { LaggedMlp, GatedRecurrent };

struct SeqConfig {
    SeqMode mode = SeqMode::LaggedMlp;
    int window = 30;                        // LaggedMlp lag depth
    int hidden_state = 32;                  // GatedRecurrent state width
    std::vector<int> trunk_hidden = {64, 64};
    std::vector<std::string> feature_names;
    std::vector<std::string> heads = {"streamflow"};
};

/// Causal sequence-to-sequence regressor with named output heads sharing one
/// trunk. LaggedMlp flattens a fixed input window (earliest records
/// replicated while the series is shorter than the window); GatedRecurrent
/// carries a gated hidden state, h_t = z*h_{t-1} + (1-z)*cand(x_t), with the
/// state reset at series start.
class SequenceRegressor {
public:
    SequenceRegressor() = default;
    static SequenceRegressor create(SeqConfig cfg, std::uint64_t seed);
    static SequenceRegressor from_parts(SeqConfig cfg, std::vector<ParamBlock> blocks,
                                        Normalizer feature_norm, Normalizer target_norm);

    const SeqConfig& config() const { return cfg_; }
    std::vector<ParamBlock>& blocks() { return blocks_; }
    const std::vector<ParamBlock>& blocks() const { return blocks_; }
    Normalizer& feature_norm() { return feature_norm_; }
    const Normalizer& feature_norm() const { return feature_norm_; }
    Normalizer& target_norm() { return target_norm_; }
    const Normalizer& target_norm() const { return target_norm_; }

    /// Per-head predictions in physical units over a [t][feature] matrix.
    std::map<std::string, std::vector<double>> predict(
        const std::vector<std::vector<double>>& features) const;

    /// LaggedMlp window forward in normalized target space; `t` is the index
    /// of the step being predicted.
    template <class T>
    std::vector<T> lagged_forward_normalized(const BoundParams<T>& params,
                                             const std::vector<std::vector<T>>& features,
                                             std::size_t t) const {
        std::vector<T> x;
        const std::size_t n_feat = cfg_.feature_names.size();
        x.reserve(static_cast<std::size_t>(cfg_.window) * n_feat);
        for (int lag = cfg_.window - 1; lag >= 0; --lag) {
            long idx = static_cast<long>(t) - lag;
            if (idx < 0) idx = 0;  // replicate the earliest record: still causal
            const auto& row = features[static_cast<std::size_t>(idx)];
            for (std::size_t f = 0; f < n_feat; ++f)
                x.push_back(feature_norm_.apply_one(f, row[f]));
        }
        std::size_t k = 0;
        for (std::size_t layer = 0; layer < cfg_.trunk_hidden.size(); ++layer) {
            const Tensor<T>& w = params[k++];
            const Tensor<T>& b = params[k++];
            std::vector<T> h = matvec(w, x);
            for (std::size_t i = 0; i < h.size(); ++i) h[i] = relu(h[i] + b.data[i]);
            x = std::move(h);
        }
        std::vector<T> y;
        y.reserve(cfg_.heads.size());
        for (std::size_t head = 0; head < cfg_.heads.size(); ++head) {
            const Tensor<T>& w = params[k++];
            const Tensor<T>& b = params[k++];
            std::vector<T> o = matvec(w, x);
            y.push_back(o[0] + b.data[0]);
        }
        return y;
    }

    /// One GatedRecurrent step in normalized space; updates the hidden state.
    template <class T>
    std::vector<T> gated_step_normalized(const BoundParams<T>& params,
                                         const std::vector<T>& features,
                                         std::vector<T>& hidden) const {
        const Tensor<T>& gate_wx = params[0];
        const Tensor<T>& gate_wh = params[1];
        const Tensor<T>& gate_b = params[2];
        const Tensor<T>& cand_wx = params[3];
        const Tensor<T>& cand_b = params[4];

        std::vector<T> xn;
        xn.reserve(features.size());
        for (std::size_t f = 0; f < features.size(); ++f)
            xn.push_back(feature_norm_.apply_one(f, features[f]));

        std::vector<T> zx = matvec(gate_wx, xn);
        std::vector<T> zh = matvec(gate_wh, hidden);
        std::vector<T> cand = matvec(cand_wx, xn);
        for (std::size_t i = 0; i < hidden.size(); ++i) {
            T z = sigmoid(zx[i] + zh[i] + gate_b.data[i]);
            T c = tanh(cand[i] + cand_b.data[i]);
            hidden[i] = z * hidden[i] + (1.0 - z) * c;
        }
        std::vector<T> y;
        y.reserve(cfg_.heads.size());
        std::size_t k = 5;
        for (std::size_t head = 0; head < cfg_.heads.size(); ++head) {
            const Tensor<T>& w = params[k++];
            const Tensor<T>& b = params[k++];
            std::vector<T> o = matvec(w, hidden);
            y.push_back(o[0] + b.data[0]);
        }
        return y;
    }

private:
    SeqConfig cfg_;
    std::vector<ParamBlock> blocks_;
    Normalizer feature_norm_;
    Normalizer target_norm_;
};

// ---------------------------------------------------------------------------
// Forcing-derived features
// ---------------------------------------------------------------------------

/// The standard per-step feature set for sequence models: precipitation,
/// temperature, potential ET, and the annual harmonic of the calendar day.
std::vector<std::string> forcing_feature_names();
std::vector<std::vector<double>> forcing_features(const std::vector<ForcingRecord>& records);

}  // namespace ecograph
