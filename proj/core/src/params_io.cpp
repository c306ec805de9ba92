#include "ecograph/params_io.hpp"

#include "ecograph/numerics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ecograph {

double ParamFile::require(const std::string& name) const {
    auto it = scalars.find(name);
    if (it == scalars.end()) throw ParseError("missing parameter '" + name + "'");
    return it->second;
}

double ParamFile::get(const std::string& name, double fallback) const {
    auto it = scalars.find(name);
    return it == scalars.end() ? fallback : it->second;
}

double ParamFile::require_indexed(const std::string& name, int class_id) const {
    auto it = indexed.find(name);
    if (it != indexed.end()) {
        auto jt = it->second.find(class_id);
        if (jt != it->second.end()) return jt->second;
    }
    auto st = scalars.find(name);
    if (st != scalars.end()) return st->second;
    throw ParseError("missing parameter '" + name + "[" + std::to_string(class_id) + "]'");
}

ParamFile load_param_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open parameter file: " + path);
    ParamFile f;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'name = value'", line_no);
        auto trim = [](std::string s) {
            std::size_t a = s.find_first_not_of(" \t\r");
            std::size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string name = trim(line.substr(0, eq));
        std::string value_str = trim(line.substr(eq + 1));
        double value = 0.0;
        try {
            value = std::stod(value_str);
        } catch (const std::exception&) {
            throw ParseError("bad numeric value '" + value_str + "'", line_no);
        }
        std::size_t lb = name.find('[');
        if (lb != std::string::npos) {
            if (name.back() != ']') throw ParseError("malformed indexed name '" + name + "'", line_no);
            std::string base = name.substr(0, lb);
            int cls = 0;
            try {
                cls = std::stoi(name.substr(lb + 1, name.size() - lb - 2));
            } catch (const std::exception&) {
                throw ParseError("bad class index in '" + name + "'", line_no);
            }
            f.indexed[base][cls] = value;
        } else {
            f.scalars[name] = value;
        }
    }
    return f;
}

void save_param_file(const ParamFile& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write parameter file: " + path);
    for (const auto& [name, value] : params.scalars)
        out << name << " = " << format_g17(value) << "\n";
    for (const auto& [name, by_class] : params.indexed)
        for (const auto& [cls, value] : by_class)
            out << name << "[" << cls << "] = " << format_g17(value) << "\n";
    if (!out) throw IoError("failed writing parameter file: " + path);
}

HbvParams<double> hbv_params_from(const ParamFile& f) {
    HbvParams<double> p;
    p.tt = f.require("tt");
    p.cfmax = f.require("cfmax");
    p.fc = f.require("fc");
    p.beta = f.require("beta");
    p.lp = f.require("lp");
    p.k0 = f.require("k0");
    p.k1 = f.require("k1");
    p.k2 = f.require("k2");
    p.uzl = f.require("uzl");
    p.perc = f.require("perc");
    p.maxbas = static_cast<int>(std::lround(f.get("maxbas", 1.0)));
    validate_hbv_params(p);
    return p;
}

ParamFile to_param_file(const HbvParams<double>& p) {
    ParamFile f;
    f.scalars = {{"tt", p.tt},   {"cfmax", p.cfmax}, {"fc", p.fc},
                 {"beta", p.beta}, {"lp", p.lp},       {"k0", p.k0},
                 {"k1", p.k1},   {"k2", p.k2},       {"uzl", p.uzl},
                 {"perc", p.perc}, {"maxbas", static_cast<double>(p.maxbas)}};
    return f;
}

NitrogenParams<double> nitrogen_params_from(const ParamFile& f) {
    NitrogenParams<double> p;
    p.k_min = f.require("k_min");
    p.k_nit = f.require("k_nit");
    p.k_up = f.require("k_up");
    p.k_den = f.require("k_den");
    p.q10 = f.require("q10");
    p.t_ref = f.require("t_ref");
    p.k_exp = f.require("k_exp");
    p.k_r = f.require("k_r");
    p.input_nh4 = f.get("input_nh4", 0.0);
    p.input_orgn = f.get("input_orgn", 0.0);
    validate_nitrogen_params(p);
    return p;
}

ParamFile to_param_file(const NitrogenParams<double>& p) {
    ParamFile f;
    f.scalars = {{"k_min", p.k_min}, {"k_nit", p.k_nit}, {"k_up", p.k_up},
                 {"k_den", p.k_den}, {"q10", p.q10},     {"t_ref", p.t_ref},
                 {"k_exp", p.k_exp}, {"k_r", p.k_r},     {"input_nh4", p.input_nh4},
                 {"input_orgn", p.input_orgn}};
    return f;
}

NitrifParamsDelGrosso<double> delgrosso_params_from(const ParamFile& f, int soil_class) {
    NitrifParamsDelGrosso<double> p;
    p.k_soil = f.require_indexed("k_soil", soil_class);
    p.f_h = f.get("f_h", 0.0);
    p.w_opt = f.require("w_opt");
    p.t_opt = f.require("t_opt");
    p.ph_half = f.require("ph_half");
    validate_delgrosso_params(p);
    return p;
}

NitrifParamsParton<double> parton_params_from(const ParamFile& f, int soil_class) {
    NitrifParamsParton<double> p;
    p.k1 = f.require_indexed("k1", soil_class);
    p.k2 = f.get("k2", 0.0);
    p.z = f.require_indexed("z", soil_class);
    p.bulk_density = f.require_indexed("bulk_density", soil_class);
    p.porosity = f.get("porosity", 0.45);
    p.w_opt = f.require("w_opt");
    p.t_opt = f.require("t_opt");
    p.ph_half = f.require("ph_half");
    validate_parton_params(p);
    return p;
}

}  // namespace ecograph
