#include "ecograph/forcing.hpp"

#include "ecograph/numerics.hpp"
#include "ecograph/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace ecograph {

namespace {

constexpr double kHamonSlope = 0.21;  // mm/day per degC, clamped at freezing

double hamon_pet(double temp_c) { return std::max(0.0, kHamonSlope * temp_c); }

void check_axis(const std::vector<ForcingRecord>& records) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].precip < 0.0)
            throw NegativePrecip("precip " + format_g17(records[i].precip) + " at " +
                                 records[i].date.to_string());
        if (records[i].pet < 0.0)
            throw ParseError("pet must be non-negative at " + records[i].date.to_string());
        if (i > 0 && records[i].date != records[i - 1].date.next_day())
            throw NonMonotonicDates("date axis must advance one day per row; got " +
                                    records[i - 1].date.to_string() + " then " +
                                    records[i].date.to_string());
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        fields.push_back(field);
    }
    return fields;
}

}  // namespace

ForcingSeries ForcingSeries::shared(std::vector<ForcingRecord> records) {
    check_axis(records);
    ForcingSeries s;
    s.binding_ = ForcingBinding::Shared;
    s.dates_.reserve(records.size());
    for (const auto& r : records) s.dates_.push_back(r.date);
    s.per_node_.push_back(std::move(records));
    return s;
}

ForcingSeries ForcingSeries::per_node(std::vector<std::vector<ForcingRecord>> records) {
    if (records.empty()) throw ParseError("per-node forcing needs at least one node");
    for (const auto& seq : records) check_axis(seq);
    for (std::size_t n = 1; n < records.size(); ++n) {
        if (records[n].size() != records[0].size())
            throw NonMonotonicDates("per-node series differ in length");
        for (std::size_t t = 0; t < records[n].size(); ++t)
            if (records[n][t].date != records[0][t].date)
                throw NonMonotonicDates("per-node series differ in date axis");
    }
    ForcingSeries s;
    s.binding_ = ForcingBinding::PerNodeColumn;
    s.dates_.reserve(records[0].size());
    for (const auto& r : records[0]) s.dates_.push_back(r.date);
    s.per_node_ = std::move(records);
    return s;
}

ForcingSeries ForcingSeries::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > length()) throw LengthMismatch("slice window out of range");
    std::vector<std::vector<ForcingRecord>> cut;
    cut.reserve(per_node_.size());
    for (const auto& seq : per_node_)
        cut.emplace_back(seq.begin() + static_cast<long>(begin),
                         seq.begin() + static_cast<long>(end));
    return binding_ == ForcingBinding::Shared ? shared(std::move(cut[0]))
                                              : per_node(std::move(cut));
}

ForcingSeries load_forcing_csv(const std::string& path, ForcingBinding binding) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open forcing file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty forcing file " + path, 1);
    auto header = split_csv_line(line);
    auto col = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    int c_date = col("date");
    int c_precip = col("precip_mm");
    int c_temp = col("temp_c");
    int c_pet = col("pet_mm");
    int c_node = col("node_id");
    if (c_date < 0 || c_precip < 0 || c_temp < 0)
        throw ParseError("forcing header must contain date,precip_mm,temp_c", 1);
    if (binding == ForcingBinding::Shared && c_node >= 0)
        throw ParseError("shared forcing must not carry a node_id column", 1);
    if (binding == ForcingBinding::PerNodeColumn && c_node < 0)
        throw ParseError("per-node forcing requires a node_id column", 1);

    std::map<int, std::vector<ForcingRecord>> by_node;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) < (c_node >= 0 ? c_node + 1 : c_temp + 1))
            throw ParseError("too few fields", line_no);
        ForcingRecord rec;
        try {
            rec.date = Date::parse(fields[static_cast<std::size_t>(c_date)]);
            rec.precip = std::stod(fields[static_cast<std::size_t>(c_precip)]);
            rec.temp = std::stod(fields[static_cast<std::size_t>(c_temp)]);
            rec.pet = (c_pet >= 0 && static_cast<int>(fields.size()) > c_pet &&
                       !fields[static_cast<std::size_t>(c_pet)].empty())
                          ? std::stod(fields[static_cast<std::size_t>(c_pet)])
                          : hamon_pet(rec.temp);
        } catch (const ParseError&) {
            throw ParseError("bad row in " + path, line_no);
        } catch (const std::exception&) {
            throw ParseError("bad numeric field in " + path, line_no);
        }
        if (rec.precip < 0.0)
            throw NegativePrecip("precip " + format_g17(rec.precip) + " at line " +
                                 std::to_string(line_no));
        int node = 0;
        if (c_node >= 0) {
            try {
                node = std::stoi(fields[static_cast<std::size_t>(c_node)]);
            } catch (const std::exception&) {
                throw ParseError("bad node_id", line_no);
            }
        }
        by_node[node].push_back(rec);
    }
    if (by_node.empty()) throw ParseError("forcing file has no data rows: " + path);

    if (binding == ForcingBinding::Shared) return ForcingSeries::shared(by_node.begin()->second);

    int expected = 0;
    std::vector<std::vector<ForcingRecord>> seqs;
    for (auto& [node, seq] : by_node) {
        if (node != expected++)
            throw ParseError("node_id values must be dense 0..N-1; missing " +
                             std::to_string(expected - 1));
        seqs.push_back(std::move(seq));
    }
    return ForcingSeries::per_node(std::move(seqs));
}

void write_forcing_csv(const ForcingSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write forcing file: " + path);
    bool per_node = series.binding() == ForcingBinding::PerNodeColumn;
    out << "date,precip_mm,temp_c,pet_mm" << (per_node ? ",node_id" : "") << "\n";
    int nodes = per_node ? series.node_count() : 1;
    for (int n = 0; n < nodes; ++n) {
        for (std::size_t t = 0; t < series.length(); ++t) {
            const ForcingRecord& r = series.at(n, t);
            out << r.date.to_string() << ',' << format_g17(r.precip) << ','
                << format_g17(r.temp) << ',' << format_g17(r.pet);
            if (per_node) out << ',' << n;
            out << "\n";
        }
    }
    if (!out) throw IoError("failed writing forcing file: " + path);
}

ForcingSeries resample_forcing(const ForcingSeries& series, const WatershedGraph& fine,
                               const CoarseningMap& map) {
    if (series.binding() == ForcingBinding::Shared) return series;
    if (series.node_count() != fine.node_count())
        throw GraphMismatch("forcing covers " + std::to_string(series.node_count()) +
                            " nodes, graph has " + std::to_string(fine.node_count()));
    map.check_against(fine);

    const int n_coarse = map.coarse_count();
    std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(n_coarse));
    for (NodeId f = 0; f < fine.node_count(); ++f)
        members[static_cast<std::size_t>(map.fine_to_coarse[static_cast<std::size_t>(f)])]
            .push_back(f);

    std::vector<std::vector<ForcingRecord>> coarse(static_cast<std::size_t>(n_coarse));
    for (int c = 0; c < n_coarse; ++c) {
        const auto& mem = members[static_cast<std::size_t>(c)];
        KahanSum area;
        for (NodeId f : mem) area.add(fine.nodes[static_cast<std::size_t>(f)].area);
        auto& seq = coarse[static_cast<std::size_t>(c)];
        seq.resize(series.length());
        for (std::size_t t = 0; t < series.length(); ++t) {
            KahanSum p, tc, pe;
            for (NodeId f : mem) {
                double a = fine.nodes[static_cast<std::size_t>(f)].area;
                const ForcingRecord& r = series.at(f, t);
                p.add(a * r.precip);
                tc.add(a * r.temp);
                pe.add(a * r.pet);
            }
            seq[t].date = series.dates()[t];
            seq[t].precip = p.value() / area.value();
            seq[t].temp = tc.value() / area.value();
            seq[t].pet = pe.value() / area.value();
        }
    }
    return ForcingSeries::per_node(std::move(coarse));
}

std::vector<std::pair<Date, double>> read_observation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open observation file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty observation file " + path, 1);
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "date" || header[1] != "value")
        throw ParseError("observation header must be date,value", 1);
    std::vector<std::pair<Date, double>> out;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 2) throw ParseError("too few fields", line_no);
        Date d = Date::parse(fields[0]);
        double v = 0.0;
        try {
            v = std::stod(fields[1]);
        } catch (const std::exception&) {
            throw ParseError("bad numeric value", line_no);
        }
        if (!out.empty() && d != out.back().first.next_day())
            throw NonMonotonicDates("observation dates must advance one day per row");
        out.emplace_back(d, v);
    }
    return out;
}

void write_observation_csv(const std::vector<std::pair<Date, double>>& series,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write observation file: " + path);
    out << "date,value\n";
    for (const auto& [date, value] : series)
        out << date.to_string() << ',' << format_g17(value) << "\n";
    if (!out) throw IoError("failed writing observation file: " + path);
}

ForcingSeries synthetic_daily_forcing(std::size_t days, std::uint64_t seed, Date start) {
    Rng rng(seed);
    std::vector<ForcingRecord> records;
    records.reserve(days);
    Date d = start;
    for (std::size_t t = 0; t < days; ++t) {
        double doy = static_cast<double>((d.serial() % 365 + 365) % 365);
        // winter-wet maritime regime: cool wet season, warm dry season
        double wet = 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * (doy - 15.0) / 365.0));
        double temp = 8.0 + 9.0 * std::sin(2.0 * std::numbers::pi * (doy - 100.0) / 365.0) +
                      rng.normal(0.0, 2.5);
        double precip = 0.0;
        if (rng.uniform() < 0.25 + 0.45 * wet) {
            double u = rng.uniform();
            precip = -std::log(1.0 - u) * (3.0 + 8.0 * wet);
        }
        records.push_back(ForcingRecord{d, precip, temp, hamon_pet(temp)});
        d = d.next_day();
    }
    return ForcingSeries::shared(std::move(records));
}

}  // namespace ecograph
