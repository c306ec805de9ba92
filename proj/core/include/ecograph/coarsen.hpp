#pragma once

#include "ecograph/graph.hpp"

#include <vector>

namespace ecograph {

enum class CoarseningMethod { Clustering, Selection };
enum class UncoarsenMethod { Replicate, Interpolate };

/// Explicit fine-to-coarse assignment. The engine never invents a map; the
/// construction helpers below build common ones reproducibly.
struct CoarseningMap {
    std::vector<NodeId> fine_to_coarse;
    CoarseningMethod method = CoarseningMethod::Clustering;

    int coarse_count() const;

    /// Throws IncompleteMap unless every fine node of g maps into a coarse id
    /// range [0, C) that is fully covered.
    void check_against(const WatershedGraph& g) const;

    static CoarseningMap identity(int n_fine);
    static CoarseningMap all_to_one(int n_fine);
};

/// Merges clusters into coarse nodes: areas add, numeric attributes are
/// area-weighted means, categorical attributes area-weighted majority (ties
/// broken by the smaller category id). Crossing edges are summed per coarse
/// pair and renormalized per coarse source; intra-cluster edges drop.
/// The identity map is a true no-op (grid provenance preserved).
WatershedGraph coarsen(const WatershedGraph& g, const CoarseningMap& map);

/// Maps coarse per-node values back to fine nodes. Replicate copies the owning
/// cluster's value. Interpolate blends it 50/50 with the edge-weighted mean of
/// the clusters owning the node's graph neighbors (either direction); nodes
/// without neighbors replicate.
std::vector<double> uncoarsen_values(const WatershedGraph& fine, const CoarseningMap& map,
                                     const std::vector<double>& coarse_values,
                                     UncoarsenMethod method, double blend = 0.5);

/// Contiguous k-way clustering by hop distance to the nearest outlet:
/// nodes are ranked by downstream distance and split into k contiguous bands.
CoarseningMap cluster_by_downstream_distance(const WatershedGraph& g, int k);

UncoarsenMethod parse_uncoarsen_method(const std::string& name);

}  // namespace ecograph
