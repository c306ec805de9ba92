#pragma once

#include "ecograph/graph.hpp"

#include <string>
#include <vector>

namespace ecograph {

/// ESRI ASCII grid: row 0 is the northernmost row, values row-major.
struct AsciiGrid {
    int nrows = 0;
    int ncols = 0;
    double xllcorner = 0.0;
    double yllcorner = 0.0;
    double cellsize = 1.0;
    double nodata_value = -9999.0;
    std::vector<double> values;

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * ncols + c]; }
    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * ncols + c]; }
    bool is_nodata(int r, int c) const { return at(r, c) == nodata_value; }
    bool in_bounds(int r, int c) const { return r >= 0 && r < nrows && c >= 0 && c < ncols; }
};

AsciiGrid read_ascii_grid(const std::string& path);
void write_ascii_grid(const AsciiGrid& grid, const std::string& path);

/// D8 direction codes (bit-exact): 1=E, 2=SE, 4=S, 8=SW, 16=W, 32=NW, 64=N,
/// 128=NE. Any other value is rejected.
struct D8 {
    static constexpr int kCodes[8] = {1, 2, 4, 8, 16, 32, 64, 128};
    // row/col offsets matched index-for-index with kCodes; row grows southward
    static constexpr int kDr[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    static constexpr int kDc[8] = {1, 1, 0, -1, -1, -1, 0, 1};

    /// Returns the direction slot of a code, or -1 if invalid.
    static int slot(int code) {
        for (int i = 0; i < 8; ++i)
            if (kCodes[i] == code) return i;
        return -1;
    }
};

/// Per-cell attribute grids are optional; absent grids leave defaults.
struct CellAttributeGrids {
    const AsciiGrid* elevation = nullptr;
    const AsciiGrid* soil_class = nullptr;
    const AsciiGrid* landuse_class = nullptr;
};

/// Builds a fully distributed graph from a D8 flow-direction grid: one node
/// per non-nodata cell (row-major ids, area = cellsize^2), one unit-weight
/// edge toward each cell's D8 target. Cells pointing off-grid are outlets.
WatershedGraph build_from_flow_direction_grid(const AsciiGrid& d8,
                                              const CellAttributeGrids& attrs = {});

}  // namespace ecograph
