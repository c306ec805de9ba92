#include "ecograph/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ecograph {

double aggregate(const AggregateOp& op, std::span<const double> values,
                 std::span<const double> weights) {
    switch (op.kind) {
        case AggregateOp::Kind::Sum: {
            double s = 0.0;
            for (double v : values) s += v;
            return s;
        }
        case AggregateOp::Kind::Mean: {
            if (values.empty()) return 0.0;
            double s = 0.0;
            for (double v : values) s += v;
            return s / static_cast<double>(values.size());
        }
        case AggregateOp::Kind::Max: {
            if (values.empty()) return 0.0;  // neutral for non-negative flux fields
            double m = values[0];
            for (double v : values) m = std::max(m, v);
            return m;
        }
        case AggregateOp::Kind::WeightedSum: {
            double s = 0.0;
            for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
            return s;
        }
        case AggregateOp::Kind::Custom:
            if (!op.custom) throw ConfigError("custom aggregate '" + op.custom_name +
                                              "' has no function bound");
            return op.custom(values, weights);
    }
    throw ConfigError("unhandled aggregate kind");
}

AggregateOp parse_aggregate_op(const std::string& name) {
    if (name == "sum") return AggregateOp::sum();
    if (name == "mean") return AggregateOp::mean();
    if (name == "max") return AggregateOp::max();
    if (name == "weighted_sum") return AggregateOp::weighted_sum();
    throw ConfigError("unknown aggregate op '" + name + "'");
}

bool NodeSelector::matches(NodeId node, const NodeAttributes& attrs) const {
    switch (kind) {
        case Kind::All:
            return true;
        case Kind::BySoilClass:
            return attrs.soil_class == soil_class;
        case Kind::Explicit:
            return std::find(nodes.begin(), nodes.end(), node) != nodes.end();
    }
    return false;
}

Schedule parse_schedule(const std::string& name, double tol, int max_iter) {
    if (name == "synchronous") return Schedule::synchronous();
    if (name == "topological_async") return Schedule::topological_async();
    if (name == "convergence_iterative") return Schedule::convergence(tol, max_iter);
    throw ConfigError("unknown schedule '" + name + "'");
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

Engine::Engine(const WatershedGraph& graph, std::vector<UpdaterBinding> bindings,
               Schedule schedule)
    : graph_(graph), bindings_(std::move(bindings)), schedule_(schedule) {
    ValidationReport report = validate(graph_);
    if (!report.ok())
        throw ConfigError("graph failed validation: " + report.issues.front().message);
    if (bindings_.empty()) throw ConfigError("no updater bindings");
    if (schedule_.kind == Schedule::Kind::ConvergenceIterative &&
        (!(schedule_.tol > 0.0) || schedule_.max_iter < 1))
        throw ConfigError("convergence schedule needs tol > 0 and max_iter >= 1");

    // union schemas across bindings, name-deduplicated
    std::vector<VariableSpec> state_vars;
    std::vector<VariableSpec> flux_vars;
    auto merge = [](std::vector<VariableSpec>& into, const VariableSpec& v) {
        for (const auto& existing : into) {
            if (existing.name == v.name) {
                if (existing.unit != v.unit)
                    throw ConfigError("variable '" + v.name + "' declared with units '" +
                                      existing.unit + "' and '" + v.unit + "'");
                return;
            }
        }
        into.push_back(v);
    };
    for (const auto& b : bindings_) {
        if (!b.updater) throw ConfigError("binding without an updater");
        for (const auto& v : b.updater->state_variables()) merge(state_vars, v);
        for (const auto& v : b.updater->flux_variables()) merge(flux_vars, v);
    }
    state_schema_ = std::make_shared<StateSchema>(state_vars);
    flux_schema_ = std::make_shared<StateSchema>(flux_vars);

    // exactly one binding per node
    const int n = graph_.node_count();
    node_bindings_.resize(static_cast<std::size_t>(n));
    for (NodeId node = 0; node < n; ++node) {
        const NodeAttributes& attrs = graph_.nodes[static_cast<std::size_t>(node)];
        int matched = -1;
        for (std::size_t b = 0; b < bindings_.size(); ++b) {
            if (!bindings_[b].selector.matches(node, attrs)) continue;
            if (matched >= 0)
                throw ConfigError("node " + std::to_string(node) +
                                  " matched by more than one binding");
            matched = static_cast<int>(b);
        }
        if (matched < 0)
            throw ConfigError("node " + std::to_string(node) + " matched by no binding");

        const UpdaterBinding& binding = bindings_[static_cast<std::size_t>(matched)];
        NodeBinding nb;
        nb.updater = binding.updater.get();
        for (const auto& v : nb.updater->state_variables())
            nb.state_slots.push_back(state_schema_->require(v.name));
        for (const auto& v : nb.updater->flux_variables())
            nb.flux_slots.push_back(flux_schema_->require(v.name));
        for (const auto& msg : nb.updater->message_names()) {
            const MessageSpec* spec = nullptr;
            for (const auto& m : binding.messages)
                if (m.message == msg) spec = &m;
            if (spec == nullptr) {
                nb.message_sources.emplace_back(std::numeric_limits<std::size_t>::max(),
                                                nullptr);
            } else {
                nb.message_sources.emplace_back(flux_schema_->require(spec->source_flux),
                                                &spec->op);
            }
        }
        node_bindings_[static_cast<std::size_t>(node)] = std::move(nb);
    }

    in_edges_ = graph_.in_edges();
    if (schedule_.kind == Schedule::Kind::TopologicalAsync)
        topo_order_ = topological_order(graph_);  // CycleDetected propagates
}

NodeStates Engine::initial_states() const {
    NodeStates states(state_schema_, graph_.node_count());
    for (NodeId node = 0; node < graph_.node_count(); ++node) {
        const NodeBinding& nb = node_bindings_[static_cast<std::size_t>(node)];
        std::vector<double> defaults = nb.updater->default_state();
        for (std::size_t i = 0; i < defaults.size(); ++i)
            states.set(node, nb.state_slots[i], defaults[i]);
    }
    return states;
}

void Engine::sweep(const NodeStates& states, std::span<const double> message_fluxes,
                   const ForcingSeries& forcing, std::size_t t, NodeStates& out_states,
                   std::vector<double>& out_fluxes, const std::vector<NodeId>& order,
                   bool in_place_messages) const {
    const std::size_t n_flux = flux_schema_->size();
    std::vector<double> local_state;
    std::vector<double> local_next;
    std::vector<double> local_flux;
    std::vector<double> values;
    std::vector<double> weights;
    std::vector<double> messages;

    for (NodeId node : order) {
        const NodeBinding& nb = node_bindings_[static_cast<std::size_t>(node)];
        messages.clear();
        for (const auto& [flux_idx, op] : nb.message_sources) {
            if (op == nullptr) {
                messages.push_back(0.0);
                continue;
            }
            values.clear();
            weights.clear();
            for (const Edge& e : in_edges_[static_cast<std::size_t>(node)]) {
                const double* src =
                    in_place_messages ? out_fluxes.data() : message_fluxes.data();
                double v = (in_place_messages || !message_fluxes.empty())
                               ? src[static_cast<std::size_t>(e.from) * n_flux + flux_idx]
                               : 0.0;
                values.push_back(v);
                weights.push_back(e.weight);
            }
            messages.push_back(aggregate(*op, values, weights));
        }

        local_state.resize(nb.state_slots.size());
        for (std::size_t i = 0; i < nb.state_slots.size(); ++i)
            local_state[i] = states.get(node, nb.state_slots[i]);
        local_next.assign(nb.state_slots.size(), 0.0);
        local_flux.assign(nb.flux_slots.size(), 0.0);

        UpdateContext ctx;
        ctx.node = node;
        ctx.attrs = &graph_.nodes[static_cast<std::size_t>(node)];
        const ForcingRecord& rec = forcing.at(node, t);
        ctx.forcing = &rec;
        ctx.state = local_state;
        ctx.messages = messages;
        nb.updater->step(ctx, local_next, local_flux);

        for (std::size_t i = 0; i < nb.state_slots.size(); ++i) {
            if (!std::isfinite(local_next[i]))
                throw NonFiniteState("node " + std::to_string(node) + " produced non-finite '" +
                                     state_schema_->at(nb.state_slots[i]).name + "'");
            out_states.set(node, nb.state_slots[i], local_next[i]);
        }
        for (std::size_t i = 0; i < nb.flux_slots.size(); ++i) {
            if (!std::isfinite(local_flux[i]))
                throw NonFiniteState("node " + std::to_string(node) + " produced non-finite '" +
                                     flux_schema_->at(nb.flux_slots[i]).name + "'");
            out_fluxes[static_cast<std::size_t>(node) * n_flux + nb.flux_slots[i]] =
                local_flux[i];
        }
    }
}

double Engine::scaled_state_delta(const NodeStates& a, const NodeStates& b) const {
    double worst = 0.0;
    for (NodeId node = 0; node < a.node_count(); ++node) {
        for (std::size_t v = 0; v < state_schema_->size(); ++v) {
            double scale = state_schema_->at(v).scale;
            double d = std::abs(a.get(node, v) - b.get(node, v)) / (scale > 0.0 ? scale : 1.0);
            worst = std::max(worst, d);
        }
    }
    return worst;
}

Engine::StepResult Engine::step(const NodeStates& states, std::span<const double> prev_fluxes,
                                const ForcingSeries& forcing, std::size_t t) const {
    if (forcing.binding() == ForcingBinding::PerNodeColumn &&
        forcing.node_count() != graph_.node_count())
        throw GraphMismatch("forcing node count does not match the graph");
    const std::size_t n_flux = flux_schema_->size();
    const std::size_t flux_len = static_cast<std::size_t>(graph_.node_count()) * n_flux;
    if (!prev_fluxes.empty() && prev_fluxes.size() != flux_len)
        throw LengthMismatch("previous flux buffer has the wrong length");

    std::vector<NodeId> natural_order(static_cast<std::size_t>(graph_.node_count()));
    for (NodeId i = 0; i < graph_.node_count(); ++i)
        natural_order[static_cast<std::size_t>(i)] = i;

    StepResult result;
    result.states = states;  // copy; unwritten variables carry over
    result.fluxes.assign(flux_len, 0.0);

    switch (schedule_.kind) {
        case Schedule::Kind::Synchronous: {
            sweep(states, prev_fluxes, forcing, t, result.states, result.fluxes, natural_order,
                  false);
            return result;
        }
        case Schedule::Kind::TopologicalAsync: {
            sweep(states, {}, forcing, t, result.states, result.fluxes, topo_order_, true);
            return result;
        }
        case Schedule::Kind::ConvergenceIterative: {
            NodeStates prev_iter = states;
            std::vector<double> iter_fluxes(prev_fluxes.begin(), prev_fluxes.end());
            bool measured_converged = false;
            int iter = 0;
            while (iter < schedule_.max_iter) {
                ++iter;
                NodeStates next = states;
                std::vector<double> next_fluxes(flux_len, 0.0);
                sweep(states, iter_fluxes, forcing, t, next, next_fluxes, natural_order, false);
                if (iter > 1 && scaled_state_delta(next, prev_iter) < schedule_.tol) {
                    result.states = next;
                    result.fluxes = std::move(next_fluxes);
                    measured_converged = true;
                    break;
                }
                prev_iter = next;
                result.states = std::move(next);
                result.fluxes = std::move(next_fluxes);
                iter_fluxes = result.fluxes;
            }
            result.iterations = iter;
            // a single-sweep budget is synchronous by definition, not a failure
            result.converged = measured_converged || schedule_.max_iter == 1;
            return result;
        }
    }
    throw ConfigError("unhandled schedule kind");
}

Trajectory Engine::run(const NodeStates& initial, const ForcingSeries& forcing) const {
    if (!initial.schema().same_as(*state_schema_))
        throw SchemaMismatch("initial states do not match the engine schema");

    Trajectory traj;
    traj.dates = forcing.dates();
    traj.initial = snapshot(initial, -1);
    traj.flux_schema = flux_schema_;

    NodeStates states = initial;
    std::vector<double> prev_fluxes;
    bool any_nonconverged = false;
    std::vector<bool> converged;
    for (std::size_t t = 0; t < forcing.length(); ++t) {
        StepResult r = step(states, prev_fluxes, forcing, t);
        states = std::move(r.states);
        prev_fluxes = std::move(r.fluxes);
        traj.snapshots.push_back(snapshot(states, static_cast<long>(t)));
        traj.fluxes.push_back(prev_fluxes);
        converged.push_back(r.converged);
        any_nonconverged = any_nonconverged || !r.converged;
    }
    if (any_nonconverged) traj.converged = std::move(converged);
    return traj;
}

ComparisonTable compare_runs(const Trajectory& ref, const Trajectory& sim,
                             const std::string& variable) {
    if (ref.dates != sim.dates) throw AxisMismatch("trajectory date axes differ");
    if (ref.node_count() != sim.node_count())
        throw AxisMismatch("trajectory node sets differ");

    ComparisonTable table;
    SkillMetrics acc;
    for (NodeId node = 0; node < ref.node_count(); ++node) {
        std::vector<double> a = ref.series(variable, node);
        std::vector<double> b = sim.series(variable, node);
        SkillMetrics m;
        try {
            m = skill(a, b);
        } catch (const ConstantSeries&) {
            // a constant simulation (e.g. the mean predictor) still has a
            // well-defined NSE; the correlation-based scores do not
            m.nse = nse(a, b);
            m.kge = m.composite = m.r = m.alpha = m.beta =
                std::numeric_limits<double>::quiet_NaN();
        }
        acc.nse += m.nse;
        acc.kge += m.kge;
        acc.composite += m.composite;
        acc.r += m.r;
        acc.alpha += m.alpha;
        acc.beta += m.beta;
        table.per_node.push_back(m);
    }
    double n = static_cast<double>(table.per_node.size());
    table.mean = {acc.nse / n, acc.kge / n, acc.composite / n,
                  acc.r / n,   acc.alpha / n, acc.beta / n};
    return table;
}

}  // namespace ecograph
