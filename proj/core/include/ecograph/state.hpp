#pragma once

#include "ecograph/date.hpp"
#include "ecograph/errors.hpp"
#include "ecograph/graph.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ecograph {

/// Declares one named state or flux variable: unit label plus the magnitude
/// used to scale convergence tests.
struct VariableSpec {
    std::string name;
    std::string unit = "-";
    double scale = 1.0;
};

/// Ordered variable declaration shared by every node of a model.
class StateSchema {
public:
    StateSchema() = default;
    explicit StateSchema(std::vector<VariableSpec> vars) : vars_(std::move(vars)) {}

    std::size_t size() const { return vars_.size(); }
    const std::vector<VariableSpec>& variables() const { return vars_; }
    const VariableSpec& at(std::size_t i) const { return vars_[i]; }

    int find(const std::string& name) const {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    std::size_t require(const std::string& name) const {
        int i = find(name);
        if (i < 0) throw SchemaMismatch("unknown variable '" + name + "'");
        return static_cast<std::size_t>(i);
    }

    bool same_as(const StateSchema& other) const {
        if (vars_.size() != other.vars_.size()) return false;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].name != other.vars_[i].name) return false;
        return true;
    }

private:
    std::vector<VariableSpec> vars_;
};

using SchemaPtr = std::shared_ptr<const StateSchema>;

/// Per-node named state values, n_nodes x n_vars row-major.
class NodeStates {
public:
    NodeStates() = default;
    NodeStates(SchemaPtr schema, int n_nodes)
        : schema_(std::move(schema)),
          n_nodes_(n_nodes),
          data_(static_cast<std::size_t>(n_nodes) * schema_->size(), 0.0) {}

    const StateSchema& schema() const { return *schema_; }
    SchemaPtr schema_ptr() const { return schema_; }
    int node_count() const { return n_nodes_; }

    double get(NodeId node, std::size_t var) const {
        return data_[static_cast<std::size_t>(node) * schema_->size() + var];
    }
    void set(NodeId node, std::size_t var, double v) {
        data_[static_cast<std::size_t>(node) * schema_->size() + var] = v;
    }

    std::span<const double> node_values(NodeId node) const {
        return {data_.data() + static_cast<std::size_t>(node) * schema_->size(),
                schema_->size()};
    }
    std::span<double> node_values(NodeId node) {
        return {data_.data() + static_cast<std::size_t>(node) * schema_->size(),
                schema_->size()};
    }

    const std::vector<double>& raw() const { return data_; }
    std::vector<double>& raw() { return data_; }

private:
    SchemaPtr schema_;
    int n_nodes_ = 0;
    std::vector<double> data_;
};

/// Frozen copy of all node states at one time index.
struct StateSnapshot {
    long time_index = -1;
    NodeStates states;
};

/// Bit-exact capture of the current states.
inline StateSnapshot snapshot(const NodeStates& states, long time_index) {
    return StateSnapshot{time_index, states};
}

/// Restores a snapshot into a model with a matching schema.
inline NodeStates restore(const StateSnapshot& snap, const StateSchema& expected) {
    if (!snap.states.schema().same_as(expected))
        throw SchemaMismatch("snapshot schema does not match the current model schema");
    return snap.states;
}

/// Simulation record: initial snapshot, one snapshot per step, and per-step
/// per-node flux values under their own schema.
struct Trajectory {
    std::vector<Date> dates;
    StateSnapshot initial;
    std::vector<StateSnapshot> snapshots;
    SchemaPtr flux_schema;
    std::vector<std::vector<double>> fluxes;  // [step][node * n_flux + var]
    std::vector<bool> converged;              // per step; empty means all converged

    std::size_t steps() const { return snapshots.size(); }
    int node_count() const { return initial.states.node_count(); }

    double flux_at(std::size_t step, NodeId node, std::size_t var) const {
        return fluxes[step][static_cast<std::size_t>(node) * flux_schema->size() + var];
    }

    /// Time series of a named variable (state first, then flux namespace).
    std::vector<double> series(const std::string& variable, NodeId node) const;
};

}  // namespace ecograph
