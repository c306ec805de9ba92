#include "ecograph/output.hpp"

#include "ecograph/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ecograph {

namespace {

std::vector<std::string> all_variable_names(const Trajectory& traj) {
    std::vector<std::string> names;
    for (const auto& v : traj.initial.states.schema().variables()) names.push_back(v.name);
    if (traj.flux_schema)
        for (const auto& v : traj.flux_schema->variables()) names.push_back(v.name);
    return names;
}

}  // namespace

void write_outputs(const Trajectory& traj, const WatershedGraph& graph,
                   const std::string& path, OutputFormat format,
                   const std::vector<std::string>& variables) {
    if (traj.steps() == 0) throw IoError("refusing to write an empty trajectory");
    std::vector<std::string> names = variables.empty() ? all_variable_names(traj) : variables;
    for (const auto& name : names) {
        if (traj.initial.states.schema().find(name) < 0 &&
            (!traj.flux_schema || traj.flux_schema->find(name) < 0))
            throw SchemaMismatch("variable '" + name + "' not in trajectory");
    }

    if (format == OutputFormat::TidyCsv) {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write output file: " + path);
        out << "time,node_id,variable,value\n";
        for (std::size_t t = 0; t < traj.steps(); ++t) {
            std::string time = traj.dates[t].to_string();
            for (NodeId node = 0; node < traj.node_count(); ++node) {
                for (const auto& name : names) {
                    // series() per cell would be quadratic; inline the lookup
                    int si = traj.snapshots[t].states.schema().find(name);
                    double value =
                        si >= 0 ? traj.snapshots[t].states.get(node, static_cast<std::size_t>(si))
                                : traj.flux_at(t, node,
                                               static_cast<std::size_t>(
                                                   traj.flux_schema->find(name)));
                    out << time << ',' << node << ',' << name << ',' << format_g17(value)
                        << "\n";
                }
            }
        }
        if (!out) throw IoError("failed writing output file: " + path);
        return;
    }

    // GridCsvPerStep
    if (!graph.grid_meta.has_value())
        throw IoError("grid output requires a grid-built graph");
    const GridMeta& gm = *graph.grid_meta;
    std::filesystem::create_directories(path);
    for (const auto& name : names) {
        for (std::size_t t = 0; t < traj.steps(); ++t) {
            std::string file =
                path + "/var_" + name + "_t" + std::to_string(t) + ".csv";
            std::ofstream out(file);
            if (!out) throw IoError("cannot write output file: " + file);
            int si = traj.snapshots[t].states.schema().find(name);
            int fi = traj.flux_schema ? traj.flux_schema->find(name) : -1;
            for (int r = 0; r < gm.nrows; ++r) {
                for (int c = 0; c < gm.ncols; ++c) {
                    if (c) out << ' ';
                    NodeId node =
                        gm.cell_to_node[static_cast<std::size_t>(r) * gm.ncols + c];
                    if (node < 0) {
                        out << "nan";
                        continue;
                    }
                    double value =
                        si >= 0
                            ? traj.snapshots[t].states.get(node, static_cast<std::size_t>(si))
                            : traj.flux_at(t, node, static_cast<std::size_t>(fi));
                    out << format_g17(value);
                }
                out << "\n";
            }
            if (!out) throw IoError("failed writing output file: " + file);
        }
    }
}

std::vector<TidyRow> read_tidy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open output file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "time,node_id,variable,value")
        throw ParseError("bad tidy CSV header in " + path, 1);
    std::vector<TidyRow> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        TidyRow row;
        std::string node_str, value_str;
        if (!std::getline(ss, row.time, ',') || !std::getline(ss, node_str, ',') ||
            !std::getline(ss, row.variable, ',') || !std::getline(ss, value_str))
            throw ParseError("bad tidy CSV row", line_no);
        try {
            row.node_id = std::stoi(node_str);
            row.value = std::stod(value_str);
        } catch (const std::exception&) {
            throw ParseError("bad tidy CSV numeric field", line_no);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> tidy_series(const std::vector<TidyRow>& rows, const std::string& variable,
                                NodeId node) {
    std::vector<double> out;
    for (const auto& r : rows)
        if (r.variable == variable && r.node_id == node) out.push_back(r.value);
    return out;
}

void write_svg_lineplot(const std::string& path, const std::string& title,
                        const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    if (series.empty()) throw IoError("nothing to plot");
    const int width = 960, height = 360, margin = 50;
    double lo = series[0].second.empty() ? 0.0 : series[0].second[0];
    double hi = lo;
    std::size_t n = 0;
    for (const auto& [name, values] : series) {
        n = std::max(n, values.size());
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (n < 2) throw IoError("plot needs at least two points");
    if (hi == lo) hi = lo + 1.0;

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write plot: " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << margin << "' y='24' font-family='sans-serif' font-size='14'>" << title
        << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& values = series[s].second;
        out << "<polyline fill='none' stroke='" << kColors[s % 5] << "' stroke-width='1' points='";
        for (std::size_t i = 0; i < values.size(); ++i) {
            double x = margin + (width - 2.0 * margin) * static_cast<double>(i) /
                                    static_cast<double>(n - 1);
            double y = height - margin -
                       (height - 2.0 * margin) * (values[i] - lo) / (hi - lo);
            out << x << ',' << y << ' ';
        }
        out << "'/>\n<text x='" << (margin + 8) << "' y='" << (44 + 16 * s)
            << "' font-family='sans-serif' font-size='12' fill='" << kColors[s % 5] << "'>"
            << series[s].first << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw IoError("failed writing plot: " + path);
}

}  // namespace ecograph
