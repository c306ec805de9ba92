#include "ecograph/nn.hpp"

#include <cmath>
#include <numbers>

namespace ecograph {

std::vector<double> pack(const std::vector<ParamBlock>& blocks) {
    std::vector<double> theta;
    std::size_t total = 0;
    for (const auto& b : blocks) total += b.values.size();
    theta.reserve(total);
    for (const auto& b : blocks) theta.insert(theta.end(), b.values.begin(), b.values.end());
    return theta;
}

void unpack(std::vector<ParamBlock>& blocks, const std::vector<double>& theta) {
    std::size_t pos = 0;
    for (auto& b : blocks) {
        if (pos + b.values.size() > theta.size())
            throw LengthMismatch("parameter vector shorter than model blocks");
        std::copy(theta.begin() + static_cast<long>(pos),
                  theta.begin() + static_cast<long>(pos + b.values.size()), b.values.begin());
        pos += b.values.size();
    }
    if (pos != theta.size()) throw LengthMismatch("parameter vector longer than model blocks");
}

std::vector<std::uint8_t> frozen_flags(const std::vector<ParamBlock>& blocks,
                                       const FreezeMask& mask) {
    std::vector<std::uint8_t> flags;
    bool any_trainable = false;
    for (const auto& b : blocks) {
        bool fz = mask.is_frozen(b.name);
        any_trainable = any_trainable || !fz;
        flags.insert(flags.end(), b.values.size(), fz ? 1 : 0);
    }
    if (!any_trainable)
        throw InvariantViolation("freeze mask leaves no trainable parameter block");
    return flags;
}

void Normalizer::fit(const std::vector<std::vector<double>>& rows, std::size_t dim) {
    mean.assign(dim, 0.0);
    stddev.assign(dim, 1.0);
    if (rows.empty()) return;
    for (const auto& r : rows)
        for (std::size_t i = 0; i < dim; ++i) mean[i] += r[i];
    for (std::size_t i = 0; i < dim; ++i) mean[i] /= static_cast<double>(rows.size());
    std::vector<double> var(dim, 0.0);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < dim; ++i) var[i] += (r[i] - mean[i]) * (r[i] - mean[i]);
    for (std::size_t i = 0; i < dim; ++i) {
        double s = std::sqrt(var[i] / static_cast<double>(rows.size()));
        stddev[i] = s > 1e-8 ? s : 1.0;
    }
}

namespace {

ParamBlock glorot_block(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng) {
    ParamBlock b{name, rows, cols, std::vector<double>(rows * cols)};
    double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : b.values) v = rng.uniform(-bound, bound);
    return b;
}

ParamBlock zero_block(const std::string& name, std::size_t rows, std::size_t cols) {
    return ParamBlock{name, rows, cols, std::vector<double>(rows * cols, 0.0)};
}

}  // namespace

MlpRegressor MlpRegressor::create(MlpConfig cfg, std::uint64_t seed) {
    if (cfg.n_soil_classes < 1 || cfg.embed_dim < 1 || cfg.output_names.empty())
        throw ConfigError("mlp config needs soil classes, embedding width and outputs");
    MlpRegressor m;
    Rng rng(seed);
    ParamBlock embed{"embedding", static_cast<std::size_t>(cfg.n_soil_classes),
                     static_cast<std::size_t>(cfg.embed_dim),
                     std::vector<double>(static_cast<std::size_t>(cfg.n_soil_classes) *
                                         static_cast<std::size_t>(cfg.embed_dim))};
    for (double& v : embed.values) v = rng.uniform(-0.1, 0.1);
    m.blocks_.push_back(std::move(embed));

    std::size_t in_dim = static_cast<std::size_t>(cfg.embed_dim) + cfg.feature_names.size();
    for (std::size_t layer = 0; layer < cfg.hidden.size(); ++layer) {
        std::size_t out_dim = static_cast<std::size_t>(cfg.hidden[layer]);
        std::string base = "hidden" + std::to_string(layer);
        m.blocks_.push_back(glorot_block(base + ".w", out_dim, in_dim, rng));
        m.blocks_.push_back(zero_block(base + ".b", 1, out_dim));
        in_dim = out_dim;
    }
    m.blocks_.push_back(glorot_block("out.w", cfg.output_names.size(), in_dim, rng));
    m.blocks_.push_back(zero_block("out.b", 1, cfg.output_names.size()));
    m.cfg_ = std::move(cfg);
    return m;
}

MlpRegressor MlpRegressor::from_parts(MlpConfig cfg, std::vector<ParamBlock> blocks,
                                      Normalizer feature_norm, Normalizer target_norm) {
    MlpRegressor reference = create(cfg, 0);
    if (blocks.size() != reference.blocks_.size())
        throw SchemaMismatch("checkpoint block count does not match the mlp config");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& got = blocks[i];
        const auto& want = reference.blocks_[i];
        if (got.name != want.name || got.rows != want.rows || got.cols != want.cols ||
            got.values.size() != want.values.size())
            throw SchemaMismatch("checkpoint block '" + got.name + "' has unexpected shape");
    }
    MlpRegressor m;
    m.cfg_ = std::move(cfg);
    m.blocks_ = std::move(blocks);
    m.feature_norm_ = std::move(feature_norm);
    m.target_norm_ = std::move(target_norm);
    return m;
}

std::vector<double> MlpRegressor::predict(int soil_class,
                                          std::span<const double> features) const {
    std::vector<double> feats(features.begin(), features.end());
    auto bound = bind_values(blocks_);
    std::vector<double> y = forward_normalized(bound, soil_class, feats);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = target_norm_.unapply_one(i, y[i]);
    return y;
}

SequenceRegressor SequenceRegressor::create(SeqConfig cfg, std::uint64_t seed) {
    if (cfg.feature_names.empty() || cfg.heads.empty())
        throw ConfigError("sequence config needs features and at least one head");
    SequenceRegressor m;
    Rng rng(seed);
    const std::size_t n_feat = cfg.feature_names.size();
    if (cfg.mode == SeqMode::LaggedMlp) {
        if (cfg.window < 1) throw ConfigError("lagged window must be >= 1");
        std::size_t in_dim = static_cast<std::size_t>(cfg.window) * n_feat;
        for (std::size_t layer = 0; layer < cfg.trunk_hidden.size(); ++layer) {
            std::size_t out_dim = static_cast<std::size_t>(cfg.trunk_hidden[layer]);
            std::string base = "trunk." + std::to_string(layer);
            m.blocks_.push_back(glorot_block(base + ".w", out_dim, in_dim, rng));
            m.blocks_.push_back(zero_block(base + ".b", 1, out_dim));
            in_dim = out_dim;
        }
        for (const auto& head : cfg.heads) {
            m.blocks_.push_back(glorot_block("head." + head + ".w", 1, in_dim, rng));
            m.blocks_.push_back(zero_block("head." + head + ".b", 1, 1));
        }
    } else {
        if (cfg.hidden_state < 1) throw ConfigError("gated hidden width must be >= 1");
        std::size_t h = static_cast<std::size_t>(cfg.hidden_state);
        m.blocks_.push_back(glorot_block("gate.wx", h, n_feat, rng));
        m.blocks_.push_back(glorot_block("gate.wh", h, h, rng));
        m.blocks_.push_back(zero_block("gate.b", 1, h));
        m.blocks_.push_back(glorot_block("cand.wx", h, n_feat, rng));
        m.blocks_.push_back(zero_block("cand.b", 1, h));
        for (const auto& head : cfg.heads) {
            m.blocks_.push_back(glorot_block("head." + head + ".w", 1, h, rng));
            m.blocks_.push_back(zero_block("head." + head + ".b", 1, 1));
        }
    }
    m.cfg_ = std::move(cfg);
    return m;
}

SequenceRegressor SequenceRegressor::from_parts(SeqConfig cfg, std::vector<ParamBlock> blocks,
                                                Normalizer feature_norm,
                                                Normalizer target_norm) {
    SequenceRegressor reference = create(cfg, 0);
    if (blocks.size() != reference.blocks_.size())
        throw SchemaMismatch("checkpoint block count does not match the sequence config");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& got = blocks[i];
        const auto& want = reference.blocks_[i];
        if (got.name != want.name || got.rows != want.rows || got.cols != want.cols ||
            got.values.size() != want.values.size())
            throw SchemaMismatch("checkpoint block '" + got.name + "' has unexpected shape");
    }
    SequenceRegressor m;
    m.cfg_ = std::move(cfg);
    m.blocks_ = std::move(blocks);
    m.feature_norm_ = std::move(feature_norm);
    m.target_norm_ = std::move(target_norm);
    return m;
}

std::map<std::string, std::vector<double>> SequenceRegressor::predict(
    const std::vector<std::vector<double>>& features) const {
    const std::size_t n = features.size();
    if (cfg_.mode == SeqMode::LaggedMlp && n < static_cast<std::size_t>(cfg_.window))
        throw InsufficientHistory("series length " + std::to_string(n) +
                                  " shorter than window " + std::to_string(cfg_.window));
    for (const auto& row : features)
        if (row.size() != cfg_.feature_names.size())
            throw SchemaMismatch("feature row width does not match the model schema");

    auto bound = bind_values(blocks_);
    std::map<std::string, std::vector<double>> out;
    for (const auto& head : cfg_.heads) out[head].reserve(n);

    if (cfg_.mode == SeqMode::LaggedMlp) {
        for (std::size_t t = 0; t < n; ++t) {
            std::vector<double> y = lagged_forward_normalized(bound, features, t);
            for (std::size_t h = 0; h < cfg_.heads.size(); ++h)
                out[cfg_.heads[h]].push_back(target_norm_.unapply_one(h, y[h]));
        }
    } else {
        std::vector<double> hidden(static_cast<std::size_t>(cfg_.hidden_state), 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            std::vector<double> y = gated_step_normalized(bound, features[t], hidden);
            for (std::size_t h = 0; h < cfg_.heads.size(); ++h)
                out[cfg_.heads[h]].push_back(target_norm_.unapply_one(h, y[h]));
        }
    }
    return out;
}

std::vector<std::string> forcing_feature_names() {
    return {"precip_mm", "temp_c", "pet_mm", "doy_sin", "doy_cos", "api_10", "api_90"};
}

std::vector<std::vector<double>> forcing_features(const std::vector<ForcingRecord>& records) {
    std::vector<std::vector<double>> rows;
    rows.reserve(records.size());
    // trailing-mean antecedent precipitation (causal: uses the past only)
    double api10 = 0.0, api90 = 0.0;
    std::size_t t = 0;
    for (const auto& r : records) {
        std::size_t w10 = std::min<std::size_t>(t + 1, 10);
        std::size_t w90 = std::min<std::size_t>(t + 1, 90);
        api10 += (r.precip - (t >= 10 ? records[t - 10].precip : 0.0));
        api90 += (r.precip - (t >= 90 ? records[t - 90].precip : 0.0));
        double doy = static_cast<double>((r.date.serial() % 365 + 365) % 365);
        double phase = 2.0 * std::numbers::pi * doy / 365.0;
        rows.push_back({r.precip, r.temp, r.pet, std::sin(phase), std::cos(phase),
                        api10 / static_cast<double>(w10), api90 / static_cast<double>(w90)});
        ++t;
    }
    return rows;
}

}  // namespace ecograph
