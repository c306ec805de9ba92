#pragma once

#include "ecograph/metrics.hpp"
#include "ecograph/state.hpp"
#include "ecograph/updater.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace ecograph {

/// Pure deterministic reduction of upstream values. Empty neighborhoods yield
/// the declared neutral: 0 for every built-in kind (flux fields are
/// non-negative, so 0 stands in for Max's identity as well).
struct AggregateOp {
    enum class Kind { Sum, Mean, Max, WeightedSum, Custom };
    using CustomFn =
        std::function<double(std::span<const double> values, std::span<const double> weights)>;

    Kind kind = Kind::WeightedSum;
    std::string custom_name;
    CustomFn custom;

    static AggregateOp sum() { return {Kind::Sum, "", nullptr}; }
    static AggregateOp mean() { return {Kind::Mean, "", nullptr}; }
    static AggregateOp max() { return {Kind::Max, "", nullptr}; }
    static AggregateOp weighted_sum() { return {Kind::WeightedSum, "", nullptr}; }
    static AggregateOp custom_op(std::string name, CustomFn fn) {
        return {Kind::Custom, std::move(name), std::move(fn)};
    }
};

double aggregate(const AggregateOp& op, std::span<const double> values,
                 std::span<const double> weights);

AggregateOp parse_aggregate_op(const std::string& name);

/// Binds one of an updater's message slots to an upstream flux variable.
struct MessageSpec {
    std::string message;      // updater-declared message name
    std::string source_flux;  // flux variable aggregated over in-edges
    AggregateOp op = AggregateOp::weighted_sum();
};

struct NodeSelector {
    enum class Kind { All, BySoilClass, Explicit };
    Kind kind = Kind::All;
    int soil_class = 0;
    std::vector<NodeId> nodes;

    static NodeSelector all() { return {}; }
    static NodeSelector by_soil_class(int cls) { return {Kind::BySoilClass, cls, {}}; }
    static NodeSelector explicit_nodes(std::vector<NodeId> ids) {
        return {Kind::Explicit, 0, std::move(ids)};
    }

    bool matches(NodeId node, const NodeAttributes& attrs) const;
};

/// Assigns an updater (and its message wiring) to a set of nodes. Every node
/// must be covered by exactly one binding.
struct UpdaterBinding {
    NodeSelector selector;
    UpdaterPtr updater;
    std::vector<MessageSpec> messages;
};

struct Schedule {
    enum class Kind { Synchronous, TopologicalAsync, ConvergenceIterative };
    Kind kind = Kind::Synchronous;
    double tol = 1e-6;  // max absolute scaled state change
    int max_iter = 20;

    static Schedule synchronous() { return {}; }
    static Schedule topological_async() { return {Kind::TopologicalAsync, 0.0, 1}; }
    static Schedule convergence(double tol, int max_iter) {
        return {Kind::ConvergenceIterative, tol, max_iter};
    }
};

Schedule parse_schedule(const std::string& name, double tol = 1e-6, int max_iter = 20);

/// The aggregate-update executor over one graph. Construction resolves the
/// union state/flux schemas and validates binding coverage; the engine itself
/// is immutable afterwards and safe to share across readers.
class Engine {
public:
    Engine(const WatershedGraph& graph, std::vector<UpdaterBinding> bindings,
           Schedule schedule);

    const WatershedGraph& graph() const { return graph_; }
    const Schedule& schedule() const { return schedule_; }
    SchemaPtr state_schema() const { return state_schema_; }
    SchemaPtr flux_schema() const { return flux_schema_; }

    /// States with every updater's declared defaults in place.
    NodeStates initial_states() const;

    struct StepResult {
        NodeStates states;
        std::vector<double> fluxes;  // node-major, flux schema order
        bool converged = true;
        int iterations = 1;
    };

    /// One forcing step; `prev_fluxes` are last step's fluxes (empty on the
    /// first step). Pure: inputs are untouched.
    StepResult step(const NodeStates& states, std::span<const double> prev_fluxes,
                    const ForcingSeries& forcing, std::size_t t) const;

    /// Runs the whole forcing window, recording one snapshot per step.
    Trajectory run(const NodeStates& initial, const ForcingSeries& forcing) const;

private:
    struct NodeBinding {
        const NodeUpdater* updater = nullptr;
        std::vector<std::size_t> state_slots;   // updater-local -> global
        std::vector<std::size_t> flux_slots;    // updater-local -> global
        // per message slot: source flux global index (or npos) and op
        std::vector<std::pair<std::size_t, const AggregateOp*>> message_sources;
    };

    void sweep(const NodeStates& states, std::span<const double> message_fluxes,
               const ForcingSeries& forcing, std::size_t t, NodeStates& out_states,
               std::vector<double>& out_fluxes, const std::vector<NodeId>& order,
               bool in_place_messages) const;

    double scaled_state_delta(const NodeStates& a, const NodeStates& b) const;

    WatershedGraph graph_;
    std::vector<UpdaterBinding> bindings_;
    Schedule schedule_;
    SchemaPtr state_schema_;
    SchemaPtr flux_schema_;
    std::vector<NodeBinding> node_bindings_;           // per node
    std::vector<std::vector<Edge>> in_edges_;          // per node
    std::vector<NodeId> topo_order_;                   // empty unless needed
};

/// Per-node (and node-mean) skill of trajectory `sim` against `ref` for one
/// variable. Axes must match exactly.
struct ComparisonTable {
    std::vector<SkillMetrics> per_node;
    SkillMetrics mean;  // arithmetic mean of the per-node entries
};

ComparisonTable compare_runs(const Trajectory& ref, const Trajectory& sim,
                             const std::string& variable);

}  // namespace ecograph
