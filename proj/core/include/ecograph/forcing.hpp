#pragma once

#include "ecograph/coarsen.hpp"
#include "ecograph/date.hpp"
#include "ecograph/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ecograph {

/// One day of meteorological forcing. pet is always populated after load;
/// when the source has no pet column it is derived from temperature with the
/// linear Hamon-type proxy pet = max(0, 0.21 * temp) mm/day.
struct ForcingRecord {
    Date date;
    double precip = 0.0;  // mm/day
    double temp = 0.0;    // degC
    double pet = 0.0;     // mm/day
};

enum class ForcingBinding { Shared, PerNodeColumn };

/// Daily forcing over a simulation window, either one shared sequence or one
/// sequence per node on an identical, gap-free date axis.
class ForcingSeries {
public:
    static ForcingSeries shared(std::vector<ForcingRecord> records);
    static ForcingSeries per_node(std::vector<std::vector<ForcingRecord>> records);

    ForcingBinding binding() const { return binding_; }
    std::size_t length() const { return dates_.size(); }
    int node_count() const { return static_cast<int>(per_node_.size()); }
    const std::vector<Date>& dates() const { return dates_; }

    const ForcingRecord& at(NodeId node, std::size_t t) const {
        return binding_ == ForcingBinding::Shared
                   ? per_node_[0][t]
                   : per_node_[static_cast<std::size_t>(node)][t];
    }

    /// The single sequence of a shared series (or node 0 of a per-node one).
    const std::vector<ForcingRecord>& records(NodeId node = 0) const {
        return binding_ == ForcingBinding::Shared ? per_node_[0]
                                                  : per_node_[static_cast<std::size_t>(node)];
    }

    /// Sub-window [begin, end).
    ForcingSeries slice(std::size_t begin, std::size_t end) const;

private:
    ForcingBinding binding_ = ForcingBinding::Shared;
    std::vector<Date> dates_;
    std::vector<std::vector<ForcingRecord>> per_node_;
};

/// Loads `date,precip_mm,temp_c[,pet_mm][,node_id]` CSV. Shared binding
/// rejects a node_id column; PerNodeColumn requires one.
ForcingSeries load_forcing_csv(const std::string& path, ForcingBinding binding);

void write_forcing_csv(const ForcingSeries& series, const std::string& path);

/// Area-weighted resampling of a per-node series onto the coarse node set.
/// Shared series pass through unchanged; precipitation volume (sum of
/// precip*area) is conserved.
ForcingSeries resample_forcing(const ForcingSeries& series, const WatershedGraph& fine,
                               const CoarseningMap& map);

/// Seeded synthetic daily forcing with winter-wet seasonality: the standing
/// fixture wherever a run needs synthetic weather.
ForcingSeries synthetic_daily_forcing(std::size_t days, std::uint64_t seed,
                                      Date start = Date{2010, 1, 1});

/// `date,value` observation series. Dates must advance daily.
std::vector<std::pair<Date, double>> read_observation_csv(const std::string& path);
void write_observation_csv(const std::vector<std::pair<Date, double>>& series,
                           const std::string& path);

}  // namespace ecograph
