#pragma once

#include "ecograph/autodiff.hpp"
#include "ecograph/errors.hpp"

namespace ecograph {

/// Soil environment driving nitrification: data, never calibrated.
struct SoilEnv {
    double wfps = 0.5;       // -, water-filled pore space in [0, 1]
    double ph = 6.5;         // pH units
    double temp = 15.0;      // degC
    double humus_dec = 0.0;  // g N/m^2/day humus decomposition flux

    void check() const {
        if (!(wfps >= 0.0 && wfps <= 1.0))
            throw InvariantViolation("soil env: wfps outside [0, 1]");
        if (!(ph >= 2.0 && ph <= 11.0)) throw InvariantViolation("soil env: ph outside [2, 11]");
    }
};

// Shared environmental modifiers, each in [0, 1]. The exact shapes are this
// engine's fixed choices; both nitrification formulations use the same three.
template <class T>
T moisture_modifier(double wfps, const T& w_opt) {
    T rel = (wfps - w_opt) / w_opt;
    return clamp01(1.0 - rel * rel);
}

template <class T>
T temperature_modifier(double temp, const T& t_opt) {
    T rel = (temp - t_opt) * (1.0 / 12.0);
    return exp(-(rel * rel));
}

template <class T>
T ph_modifier(double ph, const T& ph_half) {
    return sigmoid((ph - ph_half) * 2.0);
}

/// Area-based formulation: soil-class-specific base rate on the ammonium
/// pool plus a humus-decomposition contribution.
template <class T>
struct NitrifParamsDelGrosso {
    T k_soil{};   // 1/day, per soil class
    T f_h{};      // -, humus fraction routed to nitrification
    T w_opt{};    // -, optimal WFPS
    T t_opt{};    // degC
    T ph_half{};  // pH of half response
};

inline void validate_delgrosso_params(const NitrifParamsDelGrosso<double>& p) {
    if (p.k_soil < 0.0) throw InvariantViolation("delgrosso: k_soil must be >= 0");
    if (!(p.w_opt > 0.0 && p.w_opt < 1.0))
        throw InvariantViolation("delgrosso: w_opt must be in (0, 1)");
}

/// Daily nitrification flux, g N/m^2/day, capped at the available ammonium.
template <class T>
T nitrif_delgrosso(const SoilEnv& env, double nh4, const NitrifParamsDelGrosso<T>& p) {
    env.check();
    T base = p.k_soil * nh4 + p.f_h * env.humus_dec;
    T flux = base * moisture_modifier(env.wfps, p.w_opt) *
             temperature_modifier(env.temp, p.t_opt) * ph_modifier(env.ph, p.ph_half);
    return min(flux, nh4);
}

/// Mass-based formulation on ammonium concentration (g N per Mg soil) over an
/// explicit soil layer; the layer's bulk density and depth convert the
/// mass-based flux to the area-based form.
template <class T>
struct NitrifParamsParton {
    T k1{};            // 1/day
    T k2{};            // -, humus-equivalent weighting
    double z = 0.2;             // m, layer depth
    double bulk_density = 1.3;  // Mg/m^3
    double porosity = 0.45;     // -
    T w_opt{};
    T t_opt{};
    T ph_half{};
};

inline void validate_parton_params(const NitrifParamsParton<double>& p) {
    if (p.k1 < 0.0) throw InvariantViolation("parton: k1 must be >= 0");
    if (!(p.z > 0.0)) throw InvariantViolation("parton: layer depth must be > 0");
    if (!(p.bulk_density >= 0.5 && p.bulk_density <= 2.2))
        throw InvariantViolation("parton: bulk_density outside [0.5, 2.2]");
    if (!(p.porosity > 0.0 && p.porosity < 1.0))
        throw InvariantViolation("parton: porosity must be in (0, 1)");
    if (!(p.w_opt > 0.0 && p.w_opt < 1.0))
        throw InvariantViolation("parton: w_opt must be in (0, 1)");
}

/// Daily nitrification flux, g N/m^2/day. nh4_conc is g N per Mg soil; the
/// humus flux is converted into the same mass basis before weighting, and the
/// result is capped at the layer's available ammonium.
template <class T>
T nitrif_parton(const SoilEnv& env, double nh4_conc, const NitrifParamsParton<T>& p) {
    env.check();
    double soil_mass = p.bulk_density * p.z;  // Mg soil per m^2
    double humus_conc = env.humus_dec / soil_mass;
    T flux_mass = (p.k1 * nh4_conc + p.k2 * humus_conc) * moisture_modifier(env.wfps, p.w_opt) *
                  temperature_modifier(env.temp, p.t_opt) * ph_modifier(env.ph, p.ph_half);
    T flux_area = flux_mass * soil_mass;
    return min(flux_area, nh4_conc * soil_mass);
}

}  // namespace ecograph
