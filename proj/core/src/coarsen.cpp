#include "ecograph/coarsen.hpp"

#include "ecograph/numerics.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <limits>
#include <map>

namespace ecograph {

int CoarseningMap::coarse_count() const {
    NodeId max_id = -1;
    for (NodeId c : fine_to_coarse) max_id = std::max(max_id, c);
    return max_id + 1;
}

void CoarseningMap::check_against(const WatershedGraph& g) const {
    if (static_cast<int>(fine_to_coarse.size()) != g.node_count())
        throw IncompleteMap("map covers " + std::to_string(fine_to_coarse.size()) +
                            " fine nodes, graph has " + std::to_string(g.node_count()));
    const int n_coarse = coarse_count();
    if (n_coarse <= 0) throw IncompleteMap("map names no coarse nodes");
    std::vector<bool> hit(static_cast<std::size_t>(n_coarse), false);
    for (NodeId c : fine_to_coarse) {
        if (c < 0 || c >= n_coarse) throw IncompleteMap("coarse id out of range");
        hit[static_cast<std::size_t>(c)] = true;
    }
    for (int c = 0; c < n_coarse; ++c)
        if (!hit[static_cast<std::size_t>(c)])
            throw IncompleteMap("coarse node " + std::to_string(c) + " has no members");
}

CoarseningMap CoarseningMap::identity(int n_fine) {
    CoarseningMap m;
    m.method = CoarseningMethod::Selection;
    m.fine_to_coarse.resize(static_cast<std::size_t>(n_fine));
    for (int i = 0; i < n_fine; ++i) m.fine_to_coarse[static_cast<std::size_t>(i)] = i;
    return m;
}

CoarseningMap CoarseningMap::all_to_one(int n_fine) {
    CoarseningMap m;
    m.fine_to_coarse.assign(static_cast<std::size_t>(n_fine), 0);
    return m;
}

namespace {

bool is_identity(const CoarseningMap& map, int n_fine) {
    if (map.coarse_count() != n_fine) return false;
    for (int i = 0; i < n_fine; ++i)
        if (map.fine_to_coarse[static_cast<std::size_t>(i)] != i) return false;
    return true;
}

}  // namespace

WatershedGraph coarsen(const WatershedGraph& g, const CoarseningMap& map) {
    map.check_against(g);
    if (is_identity(map, g.node_count())) return g;

    const int n_coarse = map.coarse_count();
    std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(n_coarse));
    for (NodeId f = 0; f < g.node_count(); ++f)
        members[static_cast<std::size_t>(map.fine_to_coarse[static_cast<std::size_t>(f)])]
            .push_back(f);

    WatershedGraph out;
    out.catalogs = g.catalogs;
    out.nodes.resize(static_cast<std::size_t>(n_coarse));
    for (int c = 0; c < n_coarse; ++c) {
        const auto& mem = members[static_cast<std::size_t>(c)];
        NodeAttributes& attr = out.nodes[static_cast<std::size_t>(c)];
        if (mem.size() == 1) {
            attr = g.nodes[static_cast<std::size_t>(mem[0])];
            continue;
        }
        KahanSum area;
        KahanSum elev_weighted;
        std::map<int, double> soil_votes;
        std::map<int, double> landuse_votes;
        for (NodeId f : mem) {
            const NodeAttributes& a = g.nodes[static_cast<std::size_t>(f)];
            area.add(a.area);
            elev_weighted.add(a.area * a.elevation);
            soil_votes[a.soil_class] += a.area;
            landuse_votes[a.landuse_class] += a.area;
        }
        attr.area = area.value();
        attr.elevation = elev_weighted.value() / area.value();
        auto majority = [](const std::map<int, double>& votes) {
            int best = 0;
            double best_w = -1.0;
            for (const auto& [cls, w] : votes) {
                // strict > keeps the smaller id on ties (map iterates ascending)
                if (w > best_w) {
                    best = cls;
                    best_w = w;
                }
            }
            return best;
        };
        attr.soil_class = majority(soil_votes);
        attr.landuse_class = majority(landuse_votes);
    }

    std::map<std::pair<NodeId, NodeId>, double> agg;
    for (const Edge& e : g.edges) {
        NodeId cu = map.fine_to_coarse[static_cast<std::size_t>(e.from)];
        NodeId cv = map.fine_to_coarse[static_cast<std::size_t>(e.to)];
        if (cu == cv) continue;
        agg[{cu, cv}] += e.weight;
    }
    std::vector<double> out_totals(static_cast<std::size_t>(n_coarse), 0.0);
    for (const auto& [key, w] : agg) out_totals[static_cast<std::size_t>(key.first)] += w;
    for (const auto& [key, w] : agg)
        out.edges.push_back(Edge{key.first, key.second,
                                 w / out_totals[static_cast<std::size_t>(key.first)]});

    ValidationReport report = validate(out);
    if (!report.ok())
        throw InvariantViolation("coarsened graph failed validation: " +
                                 report.issues.front().message);
    topological_order(out);  // throws CycleDetected if clustering induced a cycle
    return out;
}

std::vector<double> uncoarsen_values(const WatershedGraph& fine, const CoarseningMap& map,
                                     const std::vector<double>& coarse_values,
                                     UncoarsenMethod method, double blend) {
    map.check_against(fine);
    if (static_cast<int>(coarse_values.size()) != map.coarse_count())
        throw IncompleteMap("coarse_values does not cover the coarse node set");

    const int n = fine.node_count();
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    auto cluster_value = [&](NodeId f) {
        return coarse_values[static_cast<std::size_t>(
            map.fine_to_coarse[static_cast<std::size_t>(f)])];
    };
    for (NodeId f = 0; f < n; ++f) out[static_cast<std::size_t>(f)] = cluster_value(f);
    if (method == UncoarsenMethod::Replicate) return out;

    std::vector<double> blended(out);
    std::vector<double> num(static_cast<std::size_t>(n), 0.0);
    std::vector<double> den(static_cast<std::size_t>(n), 0.0);
    for (const Edge& e : fine.edges) {
        num[static_cast<std::size_t>(e.from)] += e.weight * cluster_value(e.to);
        den[static_cast<std::size_t>(e.from)] += e.weight;
        num[static_cast<std::size_t>(e.to)] += e.weight * cluster_value(e.from);
        den[static_cast<std::size_t>(e.to)] += e.weight;
    }
    for (NodeId f = 0; f < n; ++f) {
        if (den[static_cast<std::size_t>(f)] <= 0.0) continue;  // isolated: replicate
        double neighbor_mean = num[static_cast<std::size_t>(f)] / den[static_cast<std::size_t>(f)];
        blended[static_cast<std::size_t>(f)] =
            (1.0 - blend) * out[static_cast<std::size_t>(f)] + blend * neighbor_mean;
    }
    return blended;
}

CoarseningMap cluster_by_downstream_distance(const WatershedGraph& g, int k) {
    if (k <= 0) throw IncompleteMap("cluster count must be positive");
    const int n = g.node_count();
    k = std::min(k, n);

    auto outs = g.out_edges();
    auto ins = g.in_edges();
    std::vector<int> dist(static_cast<std::size_t>(n), std::numeric_limits<int>::max());
    std::deque<NodeId> frontier;
    for (NodeId i = 0; i < n; ++i) {
        if (outs[static_cast<std::size_t>(i)].empty()) {
            dist[static_cast<std::size_t>(i)] = 0;
            frontier.push_back(i);
        }
    }
    while (!frontier.empty()) {
        NodeId v = frontier.front();
        frontier.pop_front();
        for (const Edge& e : ins[static_cast<std::size_t>(v)]) {
            if (dist[static_cast<std::size_t>(e.from)] > dist[static_cast<std::size_t>(v)] + 1) {
                dist[static_cast<std::size_t>(e.from)] = dist[static_cast<std::size_t>(v)] + 1;
                frontier.push_back(e.from);
            }
        }
    }

    std::vector<NodeId> order(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        if (dist[static_cast<std::size_t>(a)] != dist[static_cast<std::size_t>(b)])
            return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)];
        return a < b;
    });

    CoarseningMap map;
    map.fine_to_coarse.resize(static_cast<std::size_t>(n));
    for (int rank = 0; rank < n; ++rank) {
        int band = static_cast<int>(static_cast<long long>(rank) * k / n);
        map.fine_to_coarse[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])] = band;
    }
    return map;
}

UncoarsenMethod parse_uncoarsen_method(const std::string& name) {
    std::string k;
    for (char c : name) k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (k == "replicate") return UncoarsenMethod::Replicate;
    if (k == "interpolate") return UncoarsenMethod::Interpolate;
    throw UnknownMethod("unknown uncoarsening method '" + name + "'");
}

}  // namespace ecograph
