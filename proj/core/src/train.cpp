#include "ecograph/train.hpp"

#include "ecograph/rng.hpp"

#include <algorithm>
#include <cmath>

namespace ecograph {

namespace {

/// Pulls d(loss)/d(param) out of the sweep in flat pack() order.
std::vector<double> collect_gradients(const Gradients& grads, const BoundParams<Var>& bound) {
    std::vector<double> g;
    std::size_t total = 0;
    for (const auto& t : bound) total += t.data.size();
    g.reserve(total);
    for (const auto& t : bound)
        for (const Var& v : t.data) g.push_back(grads.wrt(v));
    return g;
}

/// Squared-error loss over a batch in normalized space. For Nse the batch
/// error is scaled by the batch target variance, i.e. 1 - NSE of the batch.
Var batch_loss(Tape& tape, LossKind kind, const std::vector<Var>& preds,
               const std::vector<double>& targets) {
    Var sq = tape.constant(0.0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        Var e = preds[i] - targets[i];
        sq = sq + e * e;
    }
    if (kind == LossKind::Mse) return sq * (1.0 / static_cast<double>(preds.size()));
    double mean_t = 0.0;
    for (double t : targets) mean_t += t;
    mean_t /= static_cast<double>(targets.size());
    double denom = 0.0;
    for (double t : targets) denom += (t - mean_t) * (t - mean_t);
    if (denom == 0.0) throw ConstantObservations("nse loss undefined on a constant batch");
    return sq * (1.0 / denom);
}

void check_loss_finite(double loss, int epoch) {
    if (!std::isfinite(loss)) throw NonFiniteLoss("training loss is not finite", epoch);
}

}  // namespace

TrainResult train_epochs(MlpRegressor& model, const TabularDataset& data,
                         const TrainOptions& opt) {
    if (data.size() == 0) throw LengthMismatch("training dataset is empty");
    if (data.soil_classes.size() != data.size() || data.targets.size() != data.size())
        throw LengthMismatch("dataset columns have inconsistent lengths");

    const std::size_t n_out = model.config().output_names.size();
    if (opt.fit_normalizers && !model.feature_norm().fitted()) {
        model.feature_norm().fit(data.features, model.config().feature_names.size());
        model.target_norm().fit(data.targets, n_out);
    }

    TrainResult result;
    if (opt.epochs <= 0) return result;

    std::vector<double> theta = pack(model.blocks());
    std::vector<std::uint8_t> frozen = frozen_flags(model.blocks(), opt.freeze);
    auto optimizer = make_optimizer(opt.optimizer, theta.size());
    Rng rng(opt.seed);

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const std::size_t batch = std::max<std::size_t>(
        1, std::min<std::size_t>(static_cast<std::size_t>(opt.batch_size), data.size()));
    Tape tape;

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += batch) {
            std::size_t end = std::min(order.size(), begin + batch);
            tape.clear();
            BoundParams<Var> bound = bind_params(tape, model.blocks());
            std::vector<Var> preds;
            std::vector<double> targets;
            preds.reserve((end - begin) * n_out);
            targets.reserve((end - begin) * n_out);
            for (std::size_t k = begin; k < end; ++k) {
                std::size_t i = order[k];
                std::vector<Var> feats;
                feats.reserve(data.features[i].size());
                for (double f : data.features[i]) feats.push_back(tape.constant(f));
                std::vector<Var> y =
                    model.forward_normalized(bound, data.soil_classes[i], feats);
                for (std::size_t o = 0; o < n_out; ++o) {
                    preds.push_back(y[o]);
                    double t = data.targets[i][o];
                    targets.push_back(model.target_norm().fitted()
                                          ? (t - model.target_norm().mean[o]) /
                                                model.target_norm().stddev[o]
                                          : t);
                }
            }
            Var loss = batch_loss(tape, opt.loss, preds, targets);
            check_loss_finite(loss.value(), epoch);
            Gradients grads = backward(loss);
            std::vector<double> g = collect_gradients(grads, bound);
            optimizer->step(theta, g, frozen);
            unpack(model.blocks(), theta);
            epoch_loss += loss.value();
            ++n_batches;
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(n_batches));
    }
    return result;
}

TrainResult train_epochs(SequenceRegressor& model, const SequenceDataset& data,
                         const TrainOptions& opt) {
    const std::size_t n = data.length();
    if (n == 0) throw LengthMismatch("training dataset is empty");
    const auto& heads = model.config().heads;
    for (const auto& head : heads) {
        auto it = data.targets.find(head);
        if (it == data.targets.end() || it->second.size() != n)
            throw LengthMismatch("missing or misaligned target series for head '" + head + "'");
    }
    if (model.config().mode == SeqMode::LaggedMlp &&
        n < static_cast<std::size_t>(model.config().window))
        throw InsufficientHistory("series shorter than the model window");

    if (opt.fit_normalizers && !model.feature_norm().fitted()) {
        model.feature_norm().fit(data.features, model.config().feature_names.size());
        std::vector<std::vector<double>> target_rows(n, std::vector<double>(heads.size()));
        for (std::size_t h = 0; h < heads.size(); ++h) {
            const auto& series = data.targets.at(heads[h]);
            for (std::size_t t = 0; t < n; ++t) target_rows[t][h] = series[t];
        }
        model.target_norm().fit(target_rows, heads.size());
    }

    TrainResult result;
    if (opt.epochs <= 0) return result;

    std::vector<double> theta = pack(model.blocks());
    std::vector<std::uint8_t> frozen = frozen_flags(model.blocks(), opt.freeze);
    auto optimizer = make_optimizer(opt.optimizer, theta.size());
    Rng rng(opt.seed);
    Tape tape;

    auto normalized_target = [&](std::size_t head, std::size_t t) {
        double v = data.targets.at(heads[head])[t];
        return model.target_norm().fitted()
                   ? (v - model.target_norm().mean[head]) / model.target_norm().stddev[head]
                   : v;
    };

    if (model.config().mode == SeqMode::LaggedMlp) {
        const std::size_t first = static_cast<std::size_t>(model.config().window) - 1;
        std::vector<std::size_t> order;
        for (std::size_t t = first; t < n; ++t) order.push_back(t);
        const std::size_t batch = std::max<std::size_t>(
            1, std::min<std::size_t>(static_cast<std::size_t>(opt.batch_size), order.size()));

        for (int epoch = 0; epoch < opt.epochs; ++epoch) {
            rng.shuffle(order);
            double epoch_loss = 0.0;
            std::size_t n_batches = 0;
            for (std::size_t begin = 0; begin < order.size(); begin += batch) {
                std::size_t end = std::min(order.size(), begin + batch);
                tape.clear();
                BoundParams<Var> bound = bind_params(tape, model.blocks());
                // lift only the rows this batch touches
                std::vector<std::vector<Var>> rows(n);
                auto row_at = [&](std::size_t t) -> const std::vector<Var>& {
                    if (rows[t].empty()) {
                        rows[t].reserve(data.features[t].size());
                        for (double f : data.features[t]) rows[t].push_back(tape.constant(f));
                    }
                    return rows[t];
                };
                std::vector<Var> preds;
                std::vector<double> targets;
                for (std::size_t k = begin; k < end; ++k) {
                    std::size_t t = order[k];
                    for (int lag = 0; lag < model.config().window; ++lag)
                        row_at(t - static_cast<std::size_t>(lag));
                    std::vector<Var> y = model.lagged_forward_normalized(bound, rows, t);
                    for (std::size_t h = 0; h < heads.size(); ++h) {
                        preds.push_back(y[h]);
                        targets.push_back(normalized_target(h, t));
                    }
                }
                Var loss = batch_loss(tape, opt.loss, preds, targets);
                check_loss_finite(loss.value(), epoch);
                Gradients grads = backward(loss);
                std::vector<double> g = collect_gradients(grads, bound);
                optimizer->step(theta, g, frozen);
                unpack(model.blocks(), theta);
                epoch_loss += loss.value();
                ++n_batches;
            }
            result.loss_trace.push_back(epoch_loss / static_cast<double>(n_batches));
        }
        return result;
    }

    // GatedRecurrent: sequential truncated BPTT, hidden state detached between
    // chunks, reset at every epoch (= series start).
    const std::size_t chunk = std::max(1, opt.bptt_window);
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        std::vector<double> hidden_values(static_cast<std::size_t>(model.config().hidden_state),
                                          0.0);
        double epoch_loss = 0.0;
        std::size_t n_chunks = 0;
        for (std::size_t begin = 0; begin < n; begin += chunk) {
            std::size_t end = std::min(n, begin + chunk);
            tape.clear();
            BoundParams<Var> bound = bind_params(tape, model.blocks());
            std::vector<Var> hidden;
            hidden.reserve(hidden_values.size());
            for (double h : hidden_values) hidden.push_back(tape.constant(h));
            std::vector<Var> preds;
            std::vector<double> targets;
            for (std::size_t t = begin; t < end; ++t) {
                std::vector<Var> feats;
                feats.reserve(data.features[t].size());
                for (double f : data.features[t]) feats.push_back(tape.constant(f));
                std::vector<Var> y = model.gated_step_normalized(bound, feats, hidden);
                for (std::size_t h = 0; h < heads.size(); ++h) {
                    preds.push_back(y[h]);
                    targets.push_back(normalized_target(h, t));
                }
            }
            Var loss = batch_loss(tape, opt.loss, preds, targets);
            check_loss_finite(loss.value(), epoch);
            Gradients grads = backward(loss);
            std::vector<double> g = collect_gradients(grads, bound);
            optimizer->step(theta, g, frozen);
            unpack(model.blocks(), theta);
            for (std::size_t i = 0; i < hidden.size(); ++i)
                hidden_values[i] = hidden[i].value();
            epoch_loss += loss.value();
            ++n_chunks;
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(n_chunks));
    }
    return result;
}

}  // namespace ecograph
