#include "ecograph/state.hpp"

namespace ecograph {

std::vector<double> Trajectory::series(const std::string& variable, NodeId node) const {
    std::vector<double> out;
    out.reserve(snapshots.size());
    int si = initial.states.schema().find(variable);
    if (si >= 0) {
        for (const auto& snap : snapshots)
            out.push_back(snap.states.get(node, static_cast<std::size_t>(si)));
        return out;
    }
    int fi = flux_schema ? flux_schema->find(variable) : -1;
    if (fi < 0) throw SchemaMismatch("variable '" + variable + "' not in trajectory");
    for (std::size_t t = 0; t < fluxes.size(); ++t)
        out.push_back(flux_at(t, node, static_cast<std::size_t>(fi)));
    return out;
}

}  // namespace ecograph
