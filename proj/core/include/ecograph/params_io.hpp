#pragma once

#include "ecograph/hbv.hpp"
#include "ecograph/nitrif.hpp"
#include "ecograph/nitrogen.hpp"

#include <map>
#include <string>

namespace ecograph {

/// Flat `name = value` parameter file; soil-class-indexed entries use
/// `name[class_id] = value`. Lines starting with '#' are comments.
struct ParamFile {
    std::map<std::string, double> scalars;
    std::map<std::string, std::map<int, double>> indexed;

    bool has(const std::string& name) const { return scalars.count(name) > 0; }
    double require(const std::string& name) const;
    double get(const std::string& name, double fallback) const;
    /// Indexed lookup with scalar fallback (`k[3]` falls back to `k`).
    double require_indexed(const std::string& name, int class_id) const;
};

ParamFile load_param_file(const std::string& path);
void save_param_file(const ParamFile& params, const std::string& path);

HbvParams<double> hbv_params_from(const ParamFile& f);
ParamFile to_param_file(const HbvParams<double>& p);

NitrogenParams<double> nitrogen_params_from(const ParamFile& f);
ParamFile to_param_file(const NitrogenParams<double>& p);

NitrifParamsDelGrosso<double> delgrosso_params_from(const ParamFile& f, int soil_class);
NitrifParamsParton<double> parton_params_from(const ParamFile& f, int soil_class);

}  // namespace ecograph
