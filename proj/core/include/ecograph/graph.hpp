#pragma once

#include "ecograph/errors.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ecograph {

/// Dense non-negative node index, stable for the lifetime of a graph.
/// Assignment is deterministic: row-major over grids, input order over lists.
using NodeId = int;

struct NodeAttributes {
    double area = 0.0;       // m^2
    double elevation = 0.0;  // m
    int soil_class = 0;
    int landuse_class = 0;
};

/// Directed flow edge; weight is the fraction of the source node's outflow.
struct Edge {
    NodeId from = -1;
    NodeId to = -1;
    double weight = 1.0;
};

enum class GraphKind { Lumped, SemiDistributed, DistributedGrid };

/// Raster provenance for graphs built from a flow-direction grid.
/// cell_to_node maps row-major cell index to NodeId (-1 for nodata cells).
struct GridMeta {
    int nrows = 0;
    int ncols = 0;
    double cellsize = 0.0;  // m
    double xllcorner = 0.0;
    double yllcorner = 0.0;
    std::vector<NodeId> cell_to_node;
};

/// Optional categorical catalogs; 0 means "not declared, don't check".
struct Catalogs {
    int soil_classes = 0;
    int landuse_classes = 0;
};

struct ValidationIssue {
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

/// Directed graph of spatial units. One node is a lumped model; a multi-node
/// DAG is semi-distributed; a grid-derived graph is fully distributed.
struct WatershedGraph {
    std::vector<NodeAttributes> nodes;
    std::vector<Edge> edges;
    std::optional<GridMeta> grid_meta;
    Catalogs catalogs;

    int node_count() const { return static_cast<int>(nodes.size()); }

    /// Classification is derived, never stored: Lumped iff edgeless single
    /// node; DistributedGrid iff grid provenance is present.
    GraphKind kind() const {
        if (grid_meta.has_value()) return GraphKind::DistributedGrid;
        if (nodes.size() == 1 && edges.empty()) return GraphKind::Lumped;
        return GraphKind::SemiDistributed;
    }

    /// In-edges grouped per target node, in input order.
    std::vector<std::vector<Edge>> in_edges() const;
    /// Out-edges grouped per source node, in input order.
    std::vector<std::vector<Edge>> out_edges() const;
};

/// Reports every invariant violation; an empty report means the graph is valid.
ValidationReport validate(const WatershedGraph& g);

/// Deterministic topological order: among simultaneously ready nodes the
/// smallest NodeId goes first. Throws CycleDetected with one cycle's node set.
std::vector<NodeId> topological_order(const WatershedGraph& g);

}  // namespace ecograph
