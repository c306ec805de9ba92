#pragma once

#include "ecograph/state.hpp"

#include <string>
#include <vector>

namespace ecograph {

enum class OutputFormat { TidyCsv, GridCsvPerStep };

/// Writes a trajectory. TidyCsv emits one `time,node_id,variable,value` file
/// at `path`; GridCsvPerStep treats `path` as a directory and emits one
/// space-delimited ncols x nrows matrix `var_<name>_t<k>.csv` per step per
/// variable (grid graphs only; nodata cells render as nan). Floats use
/// 17-significant-digit round-trip formatting. `variables` empty means all.
void write_outputs(const Trajectory& traj, const WatershedGraph& graph,
                   const std::string& path, OutputFormat format,
                   const std::vector<std::string>& variables = {});

struct TidyRow {
    std::string time;
    NodeId node_id = 0;
    std::string variable;
    double value = 0.0;
};

std::vector<TidyRow> read_tidy_csv(const std::string& path);

/// Extracts one variable's series for one node from tidy rows.
std::vector<double> tidy_series(const std::vector<TidyRow>& rows, const std::string& variable,
                                NodeId node);

/// Minimal line-plot SVG of one or more named series (decorative output).
void write_svg_lineplot(const std::string& path, const std::string& title,
                        const std::vector<std::pair<std::string, std::vector<double>>>& series);

}  // namespace ecograph
