#include "ecograph/updater.hpp"

#include <algorithm>
#include <cmath>

namespace ecograph {

std::vector<double> NodeUpdater::default_state() const {
    return std::vector<double>(state_variables().size(), 0.0);
}

// ---------------------------------------------------------------------------
// HbvUpdater
// ---------------------------------------------------------------------------

namespace {

std::vector<VariableSpec> hbv_state_vars(int maxbas) {
    std::vector<VariableSpec> vars = {{"snow", "mm", 100.0},
                                      {"sm", "mm", 100.0},
                                      {"suz", "mm", 10.0},
                                      {"slz", "mm", 10.0}};
    for (int i = 0; i < maxbas; ++i)
        vars.push_back({"route_" + std::to_string(i), "mm", 1.0});
    return vars;
}

HbvState<double> unpack_hbv_state(std::span<const double> state, int maxbas) {
    HbvState<double> s;
    s.snow = state[0];
    s.sm = state[1];
    s.suz = state[2];
    s.slz = state[3];
    s.routing.assign(state.begin() + 4, state.begin() + 4 + maxbas);
    return s;
}

void pack_hbv_state(const HbvState<double>& s, std::span<double> out) {
    out[0] = s.snow;
    out[1] = s.sm;
    out[2] = s.suz;
    out[3] = s.slz;
    for (std::size_t i = 0; i < s.routing.size(); ++i) out[4 + i] = s.routing[i];
}

}  // namespace

HbvUpdater::HbvUpdater(HbvParams<double> params) : params_(params) {
    validate_hbv_params(params_);
    state_vars_ = hbv_state_vars(params_.maxbas);
    flux_vars_ = {{"q_out", "mm/day", 1.0},
                  {"et", "mm/day", 1.0},
                  {"melt", "mm/day", 1.0},
                  {"recharge", "mm/day", 1.0}};
    messages_ = {"inflow"};
}

void HbvUpdater::step(const UpdateContext& ctx, std::span<double> state_next,
                      std::span<double> fluxes) const {
    HbvState<double> s = unpack_hbv_state(ctx.state, params_.maxbas);
    HbvFluxes<double> f = hbv_step(s, params_, *ctx.forcing);
    pack_hbv_state(s, state_next);
    double inflow = ctx.messages.empty() ? 0.0 : ctx.messages[0];
    fluxes[0] = f.q_out + inflow;
    fluxes[1] = f.et;
    fluxes[2] = f.melt;
    fluxes[3] = f.recharge;
}

// ---------------------------------------------------------------------------
// HbvNitrogenUpdater
// ---------------------------------------------------------------------------

HbvNitrogenUpdater::HbvNitrogenUpdater(HbvParams<double> hbv, NitrogenParams<double> nitrogen)
    : hbv_(hbv), nitrogen_(nitrogen) {
    validate_hbv_params(hbv_);
    validate_nitrogen_params(nitrogen_);
    state_vars_ = hbv_state_vars(hbv_.maxbas);
    state_vars_.push_back({"nh4", "gN/m2", 1.0});
    state_vars_.push_back({"no3", "gN/m2", 1.0});
    state_vars_.push_back({"orgn", "gN/m2", 1.0});
    state_vars_.push_back({"n_reservoir", "gN/m2", 1.0});
    flux_vars_ = {{"q_out", "mm/day", 1.0},          {"et", "mm/day", 1.0},
                  {"melt", "mm/day", 1.0},           {"recharge", "mm/day", 1.0},
                  {"mineralization", "gN/m2/day", 1.0}, {"nitrification", "gN/m2/day", 1.0},
                  {"uptake_nh4", "gN/m2/day", 1.0},  {"uptake_no3", "gN/m2/day", 1.0},
                  {"denit", "gN/m2/day", 1.0},       {"export_load", "gN/m2/day", 1.0}};
    messages_ = {"inflow"};
}

void HbvNitrogenUpdater::step(const UpdateContext& ctx, std::span<double> state_next,
                              std::span<double> fluxes) const {
    const int maxbas = hbv_.maxbas;
    HbvState<double> hs = unpack_hbv_state(ctx.state, maxbas);
    HbvFluxes<double> hf = hbv_step(hs, hbv_, *ctx.forcing);
    pack_hbv_state(hs, state_next);

    std::size_t off = static_cast<std::size_t>(4 + maxbas);
    NitrogenState<double> ns{ctx.state[off], ctx.state[off + 1], ctx.state[off + 2],
                             ctx.state[off + 3]};
    NitrogenFluxes<double> nf = nitrogen_step(ns, nitrogen_, ctx.forcing->temp, hf.q_out);
    state_next[off] = ns.nh4;
    state_next[off + 1] = ns.no3;
    state_next[off + 2] = ns.orgn;
    state_next[off + 3] = ns.reservoir;

    double inflow = ctx.messages.empty() ? 0.0 : ctx.messages[0];
    fluxes[0] = hf.q_out + inflow;
    fluxes[1] = hf.et;
    fluxes[2] = hf.melt;
    fluxes[3] = hf.recharge;
    fluxes[4] = nf.mineralization;
    fluxes[5] = nf.nitrification;
    fluxes[6] = nf.uptake_nh4;
    fluxes[7] = nf.uptake_no3;
    fluxes[8] = nf.denit;
    fluxes[9] = nf.export_load;
}

// ---------------------------------------------------------------------------
// Nitrification flux strategies
// ---------------------------------------------------------------------------

DelGrossoFlux::DelGrossoFlux(std::map<int, NitrifParamsDelGrosso<double>> by_class)
    : by_class_(std::move(by_class)) {
    for (const auto& [cls, p] : by_class_) validate_delgrosso_params(p);
}

double DelGrossoFlux::flux(const SoilEnv& env, double nh4, int soil_class) const {
    auto it = by_class_.find(soil_class);
    if (it == by_class_.end())
        throw UnknownSoilClass("no delgrosso parameters for soil class " +
                               std::to_string(soil_class));
    return nitrif_delgrosso(env, nh4, it->second);
}

PartonFlux::PartonFlux(std::map<int, NitrifParamsParton<double>> by_class)
    : by_class_(std::move(by_class)) {
    for (const auto& [cls, p] : by_class_) validate_parton_params(p);
}

double PartonFlux::flux(const SoilEnv& env, double nh4, int soil_class) const {
    auto it = by_class_.find(soil_class);
    if (it == by_class_.end())
        throw UnknownSoilClass("no parton parameters for soil class " +
                               std::to_string(soil_class));
    // pools are area-based; convert to the layer's mass basis and back
    const auto& p = it->second;
    double nh4_conc = nh4 / (p.bulk_density * p.z);
    return nitrif_parton(env, nh4_conc, p);
}

MlNitrifFlux::MlNitrifFlux(MlpRegressor model) : model_(std::move(model)) {
    if (model_.config().feature_names != feature_names())
        throw SchemaMismatch("ml nitrification model must use the standard feature schema");
}

std::vector<std::string> MlNitrifFlux::feature_names() {
    return {"wfps", "temp_c", "ph", "humus_dec", "nh4"};
}

double MlNitrifFlux::flux(const SoilEnv& env, double nh4, int soil_class) const {
    std::vector<double> feats = {env.wfps, env.temp, env.ph, env.humus_dec, nh4};
    double f = model_.predict(soil_class, feats)[0];
    // a learned flux must still respect pool limits
    return std::clamp(f, 0.0, nh4);
}

HybridNitrifFlux::HybridNitrifFlux(std::shared_ptr<const NitrifFluxModel> process,
                                   MlpRegressor residual)
    : process_(std::move(process)), residual_(std::move(residual)) {
    if (residual_.config().feature_names != feature_names())
        throw SchemaMismatch("hybrid residual model must use the standard feature schema");
}

std::vector<std::string> HybridNitrifFlux::feature_names() {
    return {"wfps", "temp_c", "ph", "humus_dec", "nh4", "process_flux"};
}

double HybridNitrifFlux::flux(const SoilEnv& env, double nh4, int soil_class) const {
    double base = process_->flux(env, nh4, soil_class);
    std::vector<double> feats = {env.wfps, env.temp, env.ph, env.humus_dec, nh4, base};
    double corrected = base + residual_.predict(soil_class, feats)[0];
    return std::clamp(corrected, 0.0, nh4);
}

// ---------------------------------------------------------------------------
// NitrifCellUpdater
// ---------------------------------------------------------------------------

NitrifCellUpdater::NitrifCellUpdater(std::shared_ptr<const NitrifFluxModel> flux_model,
                                     NitrifCellDynamics dynamics)
    : flux_model_(std::move(flux_model)), dynamics_(dynamics) {
    state_vars_ = {{"nh4", "gN/m2", 1.0}, {"wfps", "-", 1.0}};
    flux_vars_ = {{"nitrification", "gN/m2/day", 1.0}};
}

std::vector<double> NitrifCellUpdater::default_state() const {
    return {0.5, 0.4};  // nh4, wfps
}

void NitrifCellUpdater::step(const UpdateContext& ctx, std::span<double> state_next,
                             std::span<double> fluxes) const {
    double nh4 = ctx.state[0];
    double wfps = ctx.state[1];
    wfps = std::clamp(dynamics_.w_decay * wfps + dynamics_.w_gain * ctx.forcing->precip, 0.0,
                      1.0);
    SoilEnv env{wfps, dynamics_.ph, ctx.forcing->temp, dynamics_.humus_dec};
    double f = flux_model_->flux(env, nh4, ctx.attrs->soil_class);
    state_next[0] = nh4 + dynamics_.nh4_input - f;
    state_next[1] = wfps;
    fluxes[0] = f;
}

// ---------------------------------------------------------------------------
// PassThroughUpdater / LinearUpdater
// ---------------------------------------------------------------------------

PassThroughUpdater::PassThroughUpdater() {
    state_vars_ = {{"level", "-", 1.0}};
    flux_vars_ = {{"outflow", "-", 1.0}};
    messages_ = {"inflow"};
}

void PassThroughUpdater::step(const UpdateContext& ctx, std::span<double> state_next,
                              std::span<double> fluxes) const {
    double inflow = ctx.messages.empty() ? 0.0 : ctx.messages[0];
    double level = inflow + ctx.forcing->precip;
    state_next[0] = level;
    fluxes[0] = level;
}

LinearUpdater::LinearUpdater(double gain, double offset) : gain_(gain), offset_(offset) {
    state_vars_ = {{"level", "-", 1.0}};
    flux_vars_ = {{"outflow", "-", 1.0}};
    messages_ = {"inflow"};
}

void LinearUpdater::step(const UpdateContext& ctx, std::span<double> state_next,
                         std::span<double> fluxes) const {
    double inflow = ctx.messages.empty() ? 0.0 : ctx.messages[0];
    double level = gain_ * inflow + offset_;
    state_next[0] = level;
    fluxes[0] = level;
}

}  // namespace ecograph
