#pragma once

#include "ecograph/forcing.hpp"
#include "ecograph/hbv.hpp"
#include "ecograph/nitrif.hpp"
#include "ecograph/nitrogen.hpp"
#include "ecograph/nn.hpp"
#include "ecograph/state.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ecograph {

/// Everything a node update may read: its attributes, the day's forcing, its
/// current state slice (updater-local order) and the aggregated messages
/// (one per declared message name; unbound messages are 0).
struct UpdateContext {
    NodeId node = 0;
    const NodeAttributes* attrs = nullptr;
    const ForcingRecord* forcing = nullptr;
    std::span<const double> state;
    std::span<const double> messages;
};

/// Per-node transition rule. Implementations are pure: identical inputs give
/// identical outputs, so nodes may be evaluated concurrently within a
/// synchronous step.
class NodeUpdater {
public:
    virtual ~NodeUpdater() = default;
    virtual std::string name() const = 0;
    /// State variables owned by this updater (local order).
    virtual const std::vector<VariableSpec>& state_variables() const = 0;
    /// Flux variables emitted each step (local order).
    virtual const std::vector<VariableSpec>& flux_variables() const = 0;
    /// Message slots this updater consumes (may be empty).
    virtual const std::vector<std::string>& message_names() const = 0;
    /// Computes state_next and fluxes from the context (both in local order).
    virtual void step(const UpdateContext& ctx, std::span<double> state_next,
                      std::span<double> fluxes) const = 0;
    /// Default initial values for this updater's state variables.
    virtual std::vector<double> default_state() const;
};

using UpdaterPtr = std::shared_ptr<const NodeUpdater>;

// ---------------------------------------------------------------------------
// Process updaters
// ---------------------------------------------------------------------------

/// Lumped HBV hydrology; optional "inflow" message adds routed upstream flow
/// to the node's own outflow.
class HbvUpdater : public NodeUpdater {
public:
    explicit HbvUpdater(HbvParams<double> params);
    std::string name() const override { return "hbv"; }
    const std::vector<VariableSpec>& state_variables() const override { return state_vars_; }
    const std::vector<VariableSpec>& flux_variables() const override { return flux_vars_; }
    const std::vector<std::string>& message_names() const override { return messages_; }
    void step(const UpdateContext& ctx, std::span<double> state_next,
              std::span<double> fluxes) const override;
    const HbvParams<double>& params() const { return params_; }

private:
    HbvParams<double> params_;
    std::vector<VariableSpec> state_vars_;
    std::vector<VariableSpec> flux_vars_;
    std::vector<std::string> messages_;
};

/// HBV hydrology coupled to the lumped nitrogen cycle; the day's local
/// streamflow drives nitrate export.
class HbvNitrogenUpdater : public NodeUpdater {
public:
    HbvNitrogenUpdater(HbvParams<double> hbv, NitrogenParams<double> nitrogen);
    std::string name() const override { return "hbv_nitrogen"; }
    const std::vector<VariableSpec>& state_variables() const override { return state_vars_; }
    const std::vector<VariableSpec>& flux_variables() const override { return flux_vars_; }
    const std::vector<std::string>& message_names() const override { return messages_; }
    void step(const UpdateContext& ctx, std::span<double> state_next,
              std::span<double> fluxes) const override;
    const HbvParams<double>& hbv_params() const { return hbv_; }
    const NitrogenParams<double>& nitrogen_params() const { return nitrogen_; }

private:
    HbvParams<double> hbv_;
    NitrogenParams<double> nitrogen_;
    std::vector<VariableSpec> state_vars_;
    std::vector<VariableSpec> flux_vars_;
    std::vector<std::string> messages_;
};

// ---------------------------------------------------------------------------
// Nitrification cell (process / ML / hybrid strategies share the dynamics)
// ---------------------------------------------------------------------------

/// Strategy computing the daily nitrification flux of one cell.
class NitrifFluxModel {
public:
    virtual ~NitrifFluxModel() = default;
    virtual std::string name() const = 0;
    virtual double flux(const SoilEnv& env, double nh4, int soil_class) const = 0;
};

class DelGrossoFlux : public NitrifFluxModel {
public:
    explicit DelGrossoFlux(std::map<int, NitrifParamsDelGrosso<double>> by_class);
    std::string name() const override { return "delgrosso"; }
    double flux(const SoilEnv& env, double nh4, int soil_class) const override;
    const std::map<int, NitrifParamsDelGrosso<double>>& params() const { return by_class_; }

private:
    std::map<int, NitrifParamsDelGrosso<double>> by_class_;
};

class PartonFlux : public NitrifFluxModel {
public:
    explicit PartonFlux(std::map<int, NitrifParamsParton<double>> by_class);
    std::string name() const override { return "parton"; }
    double flux(const SoilEnv& env, double nh4, int soil_class) const override;
    const std::map<int, NitrifParamsParton<double>>& params() const { return by_class_; }

private:
    std::map<int, NitrifParamsParton<double>> by_class_;
};

/// Pure ML flux: MLP on (wfps, temp, ph, humus_dec, nh4) with soil embedding.
class MlNitrifFlux : public NitrifFluxModel {
public:
    explicit MlNitrifFlux(MlpRegressor model);
    std::string name() const override { return "ml"; }
    double flux(const SoilEnv& env, double nh4, int soil_class) const override;
    static std::vector<std::string> feature_names();
    const MlpRegressor& model() const { return model_; }

private:
    MlpRegressor model_;
};

/// Hybrid flux: process flux plus an MLP residual whose inputs are the node
/// state, the environment features and the process flux itself.
class HybridNitrifFlux : public NitrifFluxModel {
public:
    HybridNitrifFlux(std::shared_ptr<const NitrifFluxModel> process, MlpRegressor residual);
    std::string name() const override { return "hybrid"; }
    double flux(const SoilEnv& env, double nh4, int soil_class) const override;
    static std::vector<std::string> feature_names();
    const MlpRegressor& residual_model() const { return residual_; }

private:
    std::shared_ptr<const NitrifFluxModel> process_;
    MlpRegressor residual_;
};

/// Shared cell dynamics for the nitrification benchmark: a wfps store driven
/// by precipitation and an ammonium pool fed at a constant rate and depleted
/// by the strategy's flux.
struct NitrifCellDynamics {
    double nh4_input = 0.05;  // g N/m^2/day
    double w_decay = 0.9;     // daily wfps persistence
    double w_gain = 0.012;    // wfps per mm precip
    double ph = 6.5;
    double humus_dec = 0.02;  // g N/m^2/day
};

class NitrifCellUpdater : public NodeUpdater {
public:
    NitrifCellUpdater(std::shared_ptr<const NitrifFluxModel> flux_model,
                      NitrifCellDynamics dynamics);
    std::string name() const override { return "nitrif_cell(" + flux_model_->name() + ")"; }
    const std::vector<VariableSpec>& state_variables() const override { return state_vars_; }
    const std::vector<VariableSpec>& flux_variables() const override { return flux_vars_; }
    const std::vector<std::string>& message_names() const override { return messages_; }
    void step(const UpdateContext& ctx, std::span<double> state_next,
              std::span<double> fluxes) const override;
    std::vector<double> default_state() const override;
    const NitrifCellDynamics& dynamics() const { return dynamics_; }
    const std::shared_ptr<const NitrifFluxModel>& flux_model() const { return flux_model_; }

private:
    std::shared_ptr<const NitrifFluxModel> flux_model_;
    NitrifCellDynamics dynamics_;
    std::vector<VariableSpec> state_vars_;
    std::vector<VariableSpec> flux_vars_;
    std::vector<std::string> messages_;
};

// ---------------------------------------------------------------------------
// Structural test updaters
// ---------------------------------------------------------------------------

/// state := inflow message + precip; outflow := state. The impulse-timing
/// probe for scheduler semantics.
class PassThroughUpdater : public NodeUpdater {
public:
    PassThroughUpdater();
    std::string name() const override { return "passthrough"; }
    const std::vector<VariableSpec>& state_variables() const override { return state_vars_; }
    const std::vector<VariableSpec>& flux_variables() const override { return flux_vars_; }
    const std::vector<std::string>& message_names() const override { return messages_; }
    void step(const UpdateContext& ctx, std::span<double> state_next,
              std::span<double> fluxes) const override;

private:
    std::vector<VariableSpec> state_vars_;
    std::vector<VariableSpec> flux_vars_;
    std::vector<std::string> messages_;
};

/// state := gain * inflow message + offset; outflow := state.
class LinearUpdater : public NodeUpdater {
public:
    LinearUpdater(double gain, double offset);
    std::string name() const override { return "linear"; }
    const std::vector<VariableSpec>& state_variables() const override { return state_vars_; }
    const std::vector<VariableSpec>& flux_variables() const override { return flux_vars_; }
    const std::vector<std::string>& message_names() const override { return messages_; }
    void step(const UpdateContext& ctx, std::span<double> state_next,
              std::span<double> fluxes) const override;

private:
    double gain_;
    double offset_;
    std::vector<VariableSpec> state_vars_;
    std::vector<VariableSpec> flux_vars_;
    std::vector<std::string> messages_;
};

}  // namespace ecograph
