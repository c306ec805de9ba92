#include "ecograph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace ecograph {

std::vector<std::vector<Edge>> WatershedGraph::in_edges() const {
    std::vector<std::vector<Edge>> by_target(nodes.size());
    for (const Edge& e : edges) {
        if (e.to >= 0 && e.to < node_count()) by_target[static_cast<std::size_t>(e.to)].push_back(e);
    }
    return by_target;
}

std::vector<std::vector<Edge>> WatershedGraph::out_edges() const {
    std::vector<std::vector<Edge>> by_source(nodes.size());
    for (const Edge& e : edges) {
        if (e.from >= 0 && e.from < node_count())
            by_source[static_cast<std::size_t>(e.from)].push_back(e);
    }
    return by_source;
}

ValidationReport validate(const WatershedGraph& g) {
    ValidationReport report;
    auto add = [&](std::string msg) { report.issues.push_back({std::move(msg)}); };

    const int n = g.node_count();
    if (n == 0) add("graph has no nodes");

    for (int i = 0; i < n; ++i) {
        const NodeAttributes& a = g.nodes[static_cast<std::size_t>(i)];
        if (!(a.area > 0.0)) add("node " + std::to_string(i) + ": area must be > 0");
        if (g.catalogs.soil_classes > 0 &&
            (a.soil_class < 0 || a.soil_class >= g.catalogs.soil_classes))
            add("node " + std::to_string(i) + ": soil_class outside declared catalog");
        if (g.catalogs.landuse_classes > 0 &&
            (a.landuse_class < 0 || a.landuse_class >= g.catalogs.landuse_classes))
            add("node " + std::to_string(i) + ": landuse_class outside declared catalog");
    }

    std::vector<double> weight_sum(static_cast<std::size_t>(std::max(n, 0)), 0.0);
    std::vector<bool> has_out(static_cast<std::size_t>(std::max(n, 0)), false);
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        const Edge& e = g.edges[k];
        if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
            add("edge " + std::to_string(k) + ": endpoint outside [0, " + std::to_string(n) + ")");
            continue;
        }
        if (e.from == e.to) add("edge " + std::to_string(k) + ": self-loop");
        if (!(e.weight >= 0.0 && e.weight <= 1.0))
            add("edge " + std::to_string(k) + ": weight outside [0, 1]");
        weight_sum[static_cast<std::size_t>(e.from)] += e.weight;
        has_out[static_cast<std::size_t>(e.from)] = true;
    }
    for (int i = 0; i < n; ++i) {
        if (has_out[static_cast<std::size_t>(i)] &&
            std::abs(weight_sum[static_cast<std::size_t>(i)] - 1.0) > 1e-12)
            add("node " + std::to_string(i) + ": outgoing weights sum to " +
                std::to_string(weight_sum[static_cast<std::size_t>(i)]) + ", expected 1");
    }

    if (g.kind() == GraphKind::DistributedGrid) {
        const GridMeta& gm = *g.grid_meta;
        if (gm.nrows <= 0 || gm.ncols <= 0 || !(gm.cellsize > 0.0))
            add("grid_meta: nrows/ncols/cellsize must be positive");
        if (gm.cell_to_node.size() !=
            static_cast<std::size_t>(gm.nrows) * static_cast<std::size_t>(gm.ncols))
            add("grid_meta: cell_to_node size does not match nrows*ncols");
    }
    return report;
}

std::vector<NodeId> topological_order(const WatershedGraph& g) {
    const int n = g.node_count();
    std::vector<int> in_degree(static_cast<std::size_t>(n), 0);
    auto outs = g.out_edges();
    for (const Edge& e : g.edges) ++in_degree[static_cast<std::size_t>(e.to)];

    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<NodeId>> ready;
    for (NodeId i = 0; i < n; ++i)
        if (in_degree[static_cast<std::size_t>(i)] == 0) ready.push(i);

    std::vector<NodeId> order;
    order.reserve(static_cast<std::size_t>(n));
    while (!ready.empty()) {
        NodeId u = ready.top();
        ready.pop();
        order.push_back(u);
        for (const Edge& e : outs[static_cast<std::size_t>(u)]) {
            if (--in_degree[static_cast<std::size_t>(e.to)] == 0) ready.push(e.to);
        }
    }

    if (static_cast<int>(order.size()) != n) {
        // Walk successor pointers among the unresolved nodes until one repeats.
        std::vector<bool> stuck(static_cast<std::size_t>(n), false);
        for (NodeId i = 0; i < n; ++i)
            stuck[static_cast<std::size_t>(i)] = in_degree[static_cast<std::size_t>(i)] > 0;
        NodeId start = 0;
        while (!stuck[static_cast<std::size_t>(start)]) ++start;
        std::vector<int> seen_at(static_cast<std::size_t>(n), -1);
        std::vector<NodeId> walk;
        NodeId cur = start;
        while (seen_at[static_cast<std::size_t>(cur)] < 0) {
            seen_at[static_cast<std::size_t>(cur)] = static_cast<int>(walk.size());
            walk.push_back(cur);
            for (const Edge& e : outs[static_cast<std::size_t>(cur)]) {
                if (stuck[static_cast<std::size_t>(e.to)]) {
                    cur = e.to;
                    break;
                }
            }
        }
        std::vector<int> cycle(walk.begin() + seen_at[static_cast<std::size_t>(cur)], walk.end());
        std::sort(cycle.begin(), cycle.end());
        throw CycleDetected("graph contains a directed cycle of " +
                                std::to_string(cycle.size()) + " node(s)",
                            std::move(cycle));
    }
    return order;
}

}  // namespace ecograph
