#include "ecograph/distill.hpp"

#include "ecograph/rng.hpp"

#include <algorithm>
#include <cmath>

namespace ecograph {

std::string to_string(DistillMode mode) {
    switch (mode) {
        case DistillMode::DataToProcess: return "data_to_process";
        case DistillMode::DataToMl: return "data_to_ml";
        case DistillMode::ProcessToMl: return "process_to_ml";
        case DistillMode::ProcessToProcess: return "process_to_process";
    }
    return "unknown";
}

std::map<std::string, std::pair<double, double>> default_hbv_bounds() {
    // recession-rate ranges are disjoint on purpose: K0 >= K1 >= K2 holds for
    // every bounded combination
    return {
        {"tt", {-2.5, 2.5}},   {"cfmax", {0.5, 10.0}}, {"fc", {50.0, 500.0}},
        {"beta", {0.5, 6.0}},  {"lp", {0.3, 1.0}},     {"k0", {0.2, 0.8}},
        {"k1", {0.02, 0.2}},   {"k2", {0.001, 0.02}},  {"uzl", {5.0, 100.0}},
        {"perc", {0.1, 6.0}},
    };
}

namespace {

/// Deterministic initial state: half-full soil store, a little baseflow store.
template <class T>
HbvState<T> default_hbv_state(const HbvParams<T>& p) {
    return make_hbv_state<T>(p.fc * 0.0, p.fc * 0.5, p.fc * 0.0, p.fc * 0.0 + 10.0, p.maxbas);
}

struct HbvParamAccess {
    const char* name;
    double HbvParams<double>::*field_d;
    Var HbvParams<Var>::*field_v;
};

constexpr HbvParamAccess kHbvParamTable[] = {
    {"tt", &HbvParams<double>::tt, &HbvParams<Var>::tt},
    {"cfmax", &HbvParams<double>::cfmax, &HbvParams<Var>::cfmax},
    {"fc", &HbvParams<double>::fc, &HbvParams<Var>::fc},
    {"beta", &HbvParams<double>::beta, &HbvParams<Var>::beta},
    {"lp", &HbvParams<double>::lp, &HbvParams<Var>::lp},
    {"k0", &HbvParams<double>::k0, &HbvParams<Var>::k0},
    {"k1", &HbvParams<double>::k1, &HbvParams<Var>::k1},
    {"k2", &HbvParams<double>::k2, &HbvParams<Var>::k2},
    {"uzl", &HbvParams<double>::uzl, &HbvParams<Var>::uzl},
    {"perc", &HbvParams<double>::perc, &HbvParams<Var>::perc},
};

double logit(double frac) { return std::log(frac / (1.0 - frac)); }

void check_divergence(const std::vector<double>& trace, int& rising) {
    std::size_t n = trace.size();
    if (n >= 2 && trace[n - 1] > trace[n - 2]) ++rising;
    else rising = 0;
    if (rising >= 50)
        throw DivergedOptimization("loss increased 50 consecutive iterations");
}

}  // namespace

std::vector<double> simulate_hbv_series(const HbvParams<double>& params,
                                        const ForcingSeries& forcing) {
    validate_hbv_params(params);
    HbvState<double> state = default_hbv_state(params);
    std::vector<double> q;
    q.reserve(forcing.length());
    for (std::size_t t = 0; t < forcing.length(); ++t)
        q.push_back(hbv_step(state, params, forcing.at(0, t)).q_out);
    return q;
}

HbvCalibrationResult calibrate_process(const HbvCalibrationJob& job) {
    if (!job.train.valid() || !job.holdout.valid())
        throw PreconditionViolation("calibration needs valid train and holdout windows");
    if (job.train.end > job.forcing.length() || job.holdout.end > job.forcing.length())
        throw LengthMismatch("window exceeds the forcing series");
    if (job.observations.size() != job.forcing.length())
        throw LengthMismatch("observations must align with the forcing series");
    if (job.calibrate.empty()) throw PreconditionViolation("no parameters selected");

    std::vector<double> obs_train = job.train.slice(job.observations);
    {
        double first = obs_train[0];
        bool constant = true;
        for (double v : obs_train) constant = constant && v == first;
        if (constant)
            throw ConstantObservations("training observations are constant");
    }

    // initial raw values for the sigmoid reparameterization
    std::vector<const HbvParamAccess*> calibrated;
    std::vector<double> raws;
    std::vector<std::pair<double, double>> bounds;
    for (const auto& name : job.calibrate) {
        const HbvParamAccess* access = nullptr;
        for (const auto& a : kHbvParamTable)
            if (name == a.name) access = &a;
        if (access == nullptr) throw ConfigError("unknown hbv parameter '" + name + "'");
        auto it = job.bounds.find(name);
        if (it == job.bounds.end()) throw ConfigError("no bounds for parameter '" + name + "'");
        auto [lo, hi] = it->second;
        double v0 = job.initial.*(access->field_d);
        if (!(v0 > lo && v0 < hi))
            throw InvalidBounds("initial '" + name + "' must lie strictly inside its bounds");
        calibrated.push_back(access);
        raws.push_back(logit((v0 - lo) / (hi - lo)));
        bounds.emplace_back(lo, hi);
    }

    auto fitted_from_raws = [&](const std::vector<double>& r) {
        HbvParams<double> p = job.initial;
        for (std::size_t i = 0; i < calibrated.size(); ++i)
            p.*(calibrated[i]->field_d) =
                bounds[i].first +
                (bounds[i].second - bounds[i].first) * sigmoid_value(r[i]);
        return p;
    };

    HbvCalibrationResult result;
    auto evaluate = [&](const HbvParams<double>& p) {
        std::vector<double> sim = simulate_hbv_series(p, job.forcing);
        result.train_skill = skill(obs_train, job.train.slice(sim));
        result.holdout_skill =
            skill(job.holdout.slice(job.observations), job.holdout.slice(sim));
    };

    if (job.iterations <= 0) {
        result.fitted = job.initial;
        evaluate(result.fitted);
        return result;
    }

    double obs_dev = 0.0;
    {
        double mean = 0.0;
        for (double v : obs_train) mean += v;
        mean /= static_cast<double>(obs_train.size());
        for (double v : obs_train) obs_dev += (v - mean) * (v - mean);
    }

    auto optimizer = make_optimizer(job.optimizer, raws.size());
    std::vector<std::uint8_t> frozen;  // nothing frozen
    Tape tape;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<double> best_raws = raws;
    int rising = 0;

    for (int iter = 0; iter < job.iterations; ++iter) {
        tape.clear();
        std::vector<Var> raw_vars;
        raw_vars.reserve(raws.size());
        HbvParams<Var> pv;
        pv.maxbas = job.initial.maxbas;
        for (const auto& a : kHbvParamTable)
            pv.*(a.field_v) = tape.constant(job.initial.*(a.field_d));
        for (std::size_t i = 0; i < calibrated.size(); ++i) {
            Var raw = tape.leaf(raws[i]);
            raw_vars.push_back(raw);
            BoundedParam bounded(raw, bounds[i].first, bounds[i].second);
            pv.*(calibrated[i]->field_v) = bounded.value();
        }

        HbvState<Var> state = default_hbv_state(pv);
        Var sq_err = tape.constant(0.0);
        for (std::size_t t = 0; t < job.train.end; ++t) {
            Var q = hbv_step(state, pv, job.forcing.at(0, t)).q_out;
            if (t >= job.train.begin) {
                Var e = q - job.observations[t];
                sq_err = sq_err + e * e;
            }
        }
        Var loss = job.loss == LossKind::Mse
                       ? sq_err * (1.0 / static_cast<double>(job.train.length()))
                       : sq_err * (1.0 / obs_dev);  // 1 - NSE up to the constant term
        if (!std::isfinite(loss.value()))
            throw NonFiniteLoss("calibration loss is not finite", iter);

        result.loss_trace.push_back(loss.value());
        if (loss.value() < best_loss) {
            best_loss = loss.value();
            best_raws = raws;
        }
        check_divergence(result.loss_trace, rising);

        Gradients grads = backward(loss);
        std::vector<double> g;
        g.reserve(raw_vars.size());
        for (const Var& rv : raw_vars) g.push_back(grads.wrt(rv));
        optimizer->step(raws, g, frozen);
    }

    result.fitted = fitted_from_raws(best_raws);
    evaluate(result.fitted);
    return result;
}

// ---------------------------------------------------------------------------
// Surrogate distillation
// ---------------------------------------------------------------------------

SurrogateResult distill_surrogate(const SurrogateJob& job) {
    if (!job.train.valid() || !job.holdout.valid())
        throw PreconditionViolation("surrogate job needs valid train and holdout windows");
    if (job.train.overlaps(job.holdout))
        throw PreconditionViolation("holdout window overlaps the training window");
    if (job.teacher_series.size() != job.forcing.length())
        throw LengthMismatch("teacher series must align with the forcing series");
    if (job.holdout.end > job.forcing.length())
        throw LengthMismatch("window exceeds the forcing series");

    std::vector<std::vector<double>> features = forcing_features(job.forcing.records());

    SequenceRegressor model = SequenceRegressor::create(job.student, job.train_options.seed);
    SequenceDataset train_data;
    train_data.features = job.train.slice(features);
    train_data.targets[job.head] = job.train.slice(job.teacher_series);

    SurrogateResult result;
    result.trace = train_epochs(model, train_data, job.train_options);
    result.predictions = model.predict(features)[job.head];
    result.train_skill =
        skill(job.train.slice(job.teacher_series), job.train.slice(result.predictions));
    result.holdout_skill =
        skill(job.holdout.slice(job.teacher_series), job.holdout.slice(result.predictions));
    result.model = std::move(model);
    return result;
}

// ---------------------------------------------------------------------------
// Process-to-process transfer
// ---------------------------------------------------------------------------

std::vector<EnvSample> random_env_ensemble(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<EnvSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        EnvSample s;
        s.env.wfps = rng.uniform(0.05, 0.95);
        s.env.ph = rng.uniform(4.5, 8.5);
        s.env.temp = rng.uniform(2.0, 30.0);
        s.env.humus_dec = rng.uniform(0.0, 0.05);
        s.nh4 = rng.uniform(0.1, 3.0);
        out.push_back(s);
    }
    return out;
}

ProcessTransferResult transfer_process(const ProcessTransferJob& job) {
    if (job.teacher_variable != job.student_variable)
        throw PreconditionViolation("teacher and student output variables differ: '" +
                                    job.teacher_variable + "' vs '" + job.student_variable +
                                    "'");
    if (job.train.empty() || job.holdout.empty())
        throw PreconditionViolation("transfer needs train and holdout ensembles");
    if (!job.teacher) throw PreconditionViolation("no teacher bound");

    std::vector<double> target_train, target_holdout;
    for (const auto& s : job.train) target_train.push_back(job.teacher(s));
    for (const auto& s : job.holdout) target_holdout.push_back(job.teacher(s));

    struct Access {
        const char* name;
        double NitrifParamsParton<double>::*fd;
        Var NitrifParamsParton<Var>::*fv;
    };
    static constexpr Access kTable[] = {
        {"k1", &NitrifParamsParton<double>::k1, &NitrifParamsParton<Var>::k1},
        {"k2", &NitrifParamsParton<double>::k2, &NitrifParamsParton<Var>::k2},
        {"w_opt", &NitrifParamsParton<double>::w_opt, &NitrifParamsParton<Var>::w_opt},
        {"t_opt", &NitrifParamsParton<double>::t_opt, &NitrifParamsParton<Var>::t_opt},
        {"ph_half", &NitrifParamsParton<double>::ph_half, &NitrifParamsParton<Var>::ph_half},
    };

    std::vector<double> raws;
    std::vector<std::pair<double, double>> bounds;
    for (const auto& a : kTable) {
        auto it = job.bounds.find(a.name);
        if (it == job.bounds.end())
            throw ConfigError(std::string("no bounds for parameter '") + a.name + "'");
        double v0 = job.initial.*(a.fd);
        auto [lo, hi] = it->second;
        if (!(v0 > lo && v0 < hi))
            throw InvalidBounds(std::string("initial '") + a.name +
                                "' must lie strictly inside its bounds");
        raws.push_back(logit((v0 - lo) / (hi - lo)));
        bounds.emplace_back(lo, hi);
    }

    auto student_from_raws = [&](const std::vector<double>& r) {
        NitrifParamsParton<double> p = job.initial;
        for (std::size_t i = 0; i < raws.size(); ++i)
            p.*(kTable[i].fd) =
                bounds[i].first + (bounds[i].second - bounds[i].first) * sigmoid_value(r[i]);
        return p;
    };

    auto optimizer = make_optimizer(job.optimizer, raws.size());
    std::vector<std::uint8_t> frozen;
    Tape tape;
    ProcessTransferResult result;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<double> best_raws = raws;
    int rising = 0;

    for (int iter = 0; iter < job.iterations; ++iter) {
        tape.clear();
        NitrifParamsParton<Var> pv;
        pv.z = job.initial.z;
        pv.bulk_density = job.initial.bulk_density;
        pv.porosity = job.initial.porosity;
        std::vector<Var> raw_vars;
        for (std::size_t i = 0; i < raws.size(); ++i) {
            Var raw = tape.leaf(raws[i]);
            raw_vars.push_back(raw);
            BoundedParam bounded(raw, bounds[i].first, bounds[i].second);
            pv.*(kTable[i].fv) = bounded.value();
        }
        Var sq = tape.constant(0.0);
        for (std::size_t i = 0; i < job.train.size(); ++i) {
            const EnvSample& s = job.train[i];
            double nh4_conc = s.nh4 / (pv.bulk_density * pv.z);
            Var f = nitrif_parton(s.env, nh4_conc, pv);
            Var e = f - target_train[i];
            sq = sq + e * e;
        }
        Var loss = sq * (1.0 / static_cast<double>(job.train.size()));
        if (!std::isfinite(loss.value()))
            throw NonFiniteLoss("transfer loss is not finite", iter);
        result.loss_trace.push_back(loss.value());
        if (loss.value() < best_loss) {
            best_loss = loss.value();
            best_raws = raws;
        }
        check_divergence(result.loss_trace, rising);

        Gradients grads = backward(loss);
        std::vector<double> g;
        for (const Var& rv : raw_vars) g.push_back(grads.wrt(rv));
        optimizer->step(raws, g, frozen);
    }

    result.fitted = student_from_raws(best_raws);
    auto student_flux = [&](const EnvSample& s) {
        double nh4_conc = s.nh4 / (result.fitted.bulk_density * result.fitted.z);
        return nitrif_parton(s.env, nh4_conc, result.fitted);
    };
    std::vector<double> sim_train, sim_holdout;
    for (const auto& s : job.train) sim_train.push_back(student_flux(s));
    for (const auto& s : job.holdout) sim_holdout.push_back(student_flux(s));
    result.train_agreement = skill(target_train, sim_train);
    result.holdout_agreement = skill(target_holdout, sim_holdout);
    return result;
}

// ---------------------------------------------------------------------------
// Phase I strategies
// ---------------------------------------------------------------------------

ResidualResult residual_learn(const ResidualPlan& plan) {
    const std::size_t n = plan.features.size();
    if (plan.simplified.size() != n || plan.original.size() != n)
        throw PairingMismatch("simplified/original series must pair with the feature axis");
    if (!plan.train.valid() || plan.train.end > n)
        throw PreconditionViolation("residual plan needs a valid training window");
    if (plan.holdout.end > n) throw LengthMismatch("holdout window exceeds the series");

    const std::size_t n_feat = plan.features.empty() ? 0 : plan.features[0].size();
    MlpConfig cfg;
    cfg.n_soil_classes = 1;
    cfg.embed_dim = 1;
    for (std::size_t f = 0; f < n_feat; ++f) cfg.feature_names.push_back("x" + std::to_string(f));
    cfg.feature_names.push_back("simplified");
    cfg.hidden = plan.hidden;
    cfg.output_names = {"residual"};

    MlpRegressor corrector = MlpRegressor::create(cfg, plan.train_options.seed);
    TabularDataset data;
    for (std::size_t t = plan.train.begin; t < plan.train.end; ++t) {
        std::vector<double> row = plan.features[t];
        row.push_back(plan.simplified[t]);
        data.features.push_back(std::move(row));
        data.targets.push_back({plan.original[t] - plan.simplified[t]});
        data.soil_classes.push_back(0);
    }
    train_epochs(corrector, data, plan.train_options);

    ResidualResult result;
    result.corrected.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<double> row = plan.features[t];
        row.push_back(plan.simplified[t]);
        result.corrected.push_back(plan.simplified[t] + corrector.predict(0, row)[0]);
    }
    result.train_skill =
        skill(plan.train.slice(plan.original), plan.train.slice(result.corrected));
    if (plan.holdout.valid())
        result.holdout_skill =
            skill(plan.holdout.slice(plan.original), plan.holdout.slice(result.corrected));
    SkillMetrics baseline =
        skill(plan.train.slice(plan.original), plan.train.slice(plan.simplified));
    result.no_improvement = result.train_skill.composite < baseline.composite;
    result.corrector = std::move(corrector);
    return result;
}

TransferResult transfer_learn(const TransferPlan& plan) {
    if (plan.finetune.length() == 0) throw EmptyFinetuneSet("fine-tune dataset is empty");
    if (plan.pretrain.length() == 0) throw PreconditionViolation("pretrain dataset is empty");

    TransferResult result;
    SequenceRegressor model = SequenceRegressor::create(plan.student, plan.pretrain_options.seed);
    result.pretrain_trace = train_epochs(model, plan.pretrain, plan.pretrain_options);

    TrainOptions ft = plan.finetune_options;
    ft.freeze = FreezeMask::all_but_heads(model.blocks());
    ft.fit_normalizers = false;  // keep pretrain statistics
    result.finetune_trace = train_epochs(model, plan.finetune, ft);
    result.model = std::move(model);
    return result;
}

HybridResult hybrid_distill(const HybridPlan& plan) {
    HybridResult result;
    result.residual_stage = residual_learn(plan.residual);

    const std::size_t n = plan.residual.features.size();
    if (!plan.finetune_window.valid() || plan.finetune_window.end > n)
        throw PreconditionViolation("hybrid plan needs a valid fine-tune window");

    Window pretrain = plan.pretrain_window.valid() ? plan.pretrain_window
                                                   : plan.residual.train;
    if (pretrain.end > n) throw PreconditionViolation("pretrain window exceeds the series");

    TransferPlan transfer;
    transfer.student = plan.student;
    transfer.pretrain_options = plan.pretrain_options;
    transfer.finetune_options = plan.finetune_options;
    transfer.pretrain.features = pretrain.slice(plan.residual.features);
    transfer.pretrain.targets[plan.student.heads[0]] =
        pretrain.slice(result.residual_stage.corrected);
    transfer.finetune.features = plan.finetune_window.slice(plan.residual.features);
    transfer.finetune.targets[plan.student.heads[0]] =
        plan.finetune_window.slice(plan.residual.original);
    result.transfer_stage = transfer_learn(transfer);

    result.predictions =
        result.transfer_stage.model.predict(plan.residual.features)[plan.student.heads[0]];
    return result;
}

}  // namespace ecograph
