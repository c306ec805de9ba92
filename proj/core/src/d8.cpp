#include "ecograph/d8.hpp"

#include "ecograph/numerics.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

namespace ecograph {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

AsciiGrid read_ascii_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open grid file: " + path);

    AsciiGrid grid;
    bool have_nodata = false;
    // header: ncols, nrows, xllcorner, yllcorner, cellsize, NODATA_value
    for (int i = 0; i < 6; ++i) {
        std::string key;
        double v = 0.0;
        if (!(in >> key >> v)) throw ParseError("incomplete grid header in " + path);
        std::string k = lower(key);
        if (k == "ncols") grid.ncols = static_cast<int>(v);
        else if (k == "nrows") grid.nrows = static_cast<int>(v);
        else if (k == "xllcorner") grid.xllcorner = v;
        else if (k == "yllcorner") grid.yllcorner = v;
        else if (k == "cellsize") grid.cellsize = v;
        else if (k == "nodata_value") { grid.nodata_value = v; have_nodata = true; }
        else throw ParseError("unknown grid header key '" + key + "' in " + path);
    }
    if (!have_nodata) throw ParseError("missing NODATA_value header in " + path);
    if (grid.nrows <= 0 || grid.ncols <= 0)
        throw ParseError("grid header declares empty raster in " + path);

    std::size_t n = static_cast<std::size_t>(grid.nrows) * static_cast<std::size_t>(grid.ncols);
    grid.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> grid.values[i]))
            throw ParseError("grid data truncated at value " + std::to_string(i) + " in " + path);
    }
    return grid;
}

void write_ascii_grid(const AsciiGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write grid file: " + path);
    out << "ncols " << grid.ncols << "\n"
        << "nrows " << grid.nrows << "\n"
        << "xllcorner " << format_g17(grid.xllcorner) << "\n"
        << "yllcorner " << format_g17(grid.yllcorner) << "\n"
        << "cellsize " << format_g17(grid.cellsize) << "\n"
        << "NODATA_value " << format_g17(grid.nodata_value) << "\n";
    for (int r = 0; r < grid.nrows; ++r) {
        for (int c = 0; c < grid.ncols; ++c) {
            if (c) out << ' ';
            out << format_g17(grid.at(r, c));
        }
        out << "\n";
    }
    if (!out) throw IoError("failed writing grid file: " + path);
}

WatershedGraph build_from_flow_direction_grid(const AsciiGrid& d8,
                                              const CellAttributeGrids& attrs) {
    if (d8.nrows <= 0 || d8.ncols <= 0) throw EmptyGrid("flow-direction grid has no cells");

    const int nrows = d8.nrows;
    const int ncols = d8.ncols;
    std::vector<NodeId> cell_to_node(static_cast<std::size_t>(nrows) * ncols, -1);

    WatershedGraph g;
    for (int r = 0; r < nrows; ++r) {
        for (int c = 0; c < ncols; ++c) {
            if (d8.is_nodata(r, c)) continue;
            cell_to_node[static_cast<std::size_t>(r) * ncols + c] = g.node_count();
            NodeAttributes a;
            a.area = d8.cellsize * d8.cellsize;
            if (attrs.elevation && !attrs.elevation->is_nodata(r, c))
                a.elevation = attrs.elevation->at(r, c);
            if (attrs.soil_class && !attrs.soil_class->is_nodata(r, c))
                a.soil_class = static_cast<int>(attrs.soil_class->at(r, c));
            if (attrs.landuse_class && !attrs.landuse_class->is_nodata(r, c))
                a.landuse_class = static_cast<int>(attrs.landuse_class->at(r, c));
            g.nodes.push_back(a);
        }
    }
    if (g.nodes.empty()) throw EmptyGrid("flow-direction grid contains only nodata cells");

    for (int r = 0; r < nrows; ++r) {
        for (int c = 0; c < ncols; ++c) {
            if (d8.is_nodata(r, c)) continue;
            double raw = d8.at(r, c);
            int code = static_cast<int>(raw);
            int s = (raw == static_cast<double>(code)) ? D8::slot(code) : -1;
            if (s < 0)
                throw InvalidDirectionCode("cell (" + std::to_string(r) + "," +
                                           std::to_string(c) + ") has direction code " +
                                           format_g17(raw));
            int tr = r + D8::kDr[s];
            int tc = c + D8::kDc[s];
            if (!d8.in_bounds(tr, tc)) continue;  // drains off-grid: outlet
            if (d8.is_nodata(tr, tc))
                throw DirectionIntoNodata("cell (" + std::to_string(r) + "," +
                                          std::to_string(c) + ") drains into nodata cell (" +
                                          std::to_string(tr) + "," + std::to_string(tc) + ")");
            g.edges.push_back(Edge{cell_to_node[static_cast<std::size_t>(r) * ncols + c],
                                   cell_to_node[static_cast<std::size_t>(tr) * ncols + tc], 1.0});
        }
    }

    GridMeta meta;
    meta.nrows = nrows;
    meta.ncols = ncols;
    meta.cellsize = d8.cellsize;
    meta.xllcorner = d8.xllcorner;
    meta.yllcorner = d8.yllcorner;
    meta.cell_to_node = std::move(cell_to_node);
    g.grid_meta = std::move(meta);
    return g;
}

}  // namespace ecograph
