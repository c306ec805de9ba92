#pragma once

#include "ecograph/autodiff.hpp"
#include "ecograph/errors.hpp"

#include <cmath>

namespace ecograph {

/// Lumped daily nitrogen-cycle parameters: first-order rates with a Q10
/// temperature response plus a first-order export reservoir that lags the
/// nitrate signal at the outlet.
template <class T>
struct NitrogenParams {
    T k_min{};      // 1/day, mineralization of OrgN
    T k_nit{};      // 1/day, nitrification NH4 -> NO3
    T k_up{};       // 1/day, plant uptake (applied to NH4 and NO3)
    T k_den{};      // 1/day, denitrification loss of NO3
    T q10{};        // -, temperature sensitivity
    T t_ref{};      // degC, reference temperature
    T k_exp{};      // 1/mm, hydrologic export coefficient
    T k_r{};        // 1/day, reservoir release
    T input_nh4{};  // g N/m^2/day external input
    T input_orgn{}; // g N/m^2/day external input
};

template <class T>
struct NitrogenState {
    T nh4{};        // g N/m^2
    T no3{};        // g N/m^2
    T orgn{};       // g N/m^2
    T reservoir{};  // g N/m^2 routed store

    T total() const { return nh4 + no3 + orgn + reservoir; }
};

template <class T>
struct NitrogenFluxes {
    T mineralization{};  // g N/m^2/day, OrgN -> NH4
    T nitrification{};   // g N/m^2/day, NH4 -> NO3
    T uptake_nh4{};      // g N/m^2/day, system loss
    T uptake_no3{};      // g N/m^2/day, system loss
    T denit{};           // g N/m^2/day, system loss
    T export_load{};     // g N/m^2/day, reservoir release to the outlet
};

inline void validate_nitrogen_params(const NitrogenParams<double>& p) {
    if (p.k_min < 0 || p.k_nit < 0 || p.k_up < 0 || p.k_den < 0 || p.k_exp < 0 || p.k_r < 0 ||
        p.input_nh4 < 0 || p.input_orgn < 0)
        throw InvariantViolation("nitrogen: all rates and inputs must be >= 0");
    if (!(p.q10 > 0.0)) throw InvariantViolation("nitrogen: q10 must be > 0");
}

/// One daily step. temp drives the Q10 factor, q (mm/day) drives hydrologic
/// export into the reservoir. If the combined outflux of any pool would
/// exceed the pool over one day, every outflux from that pool is scaled by
/// pool/total; pools can therefore never go negative.
template <class T>
NitrogenFluxes<T> nitrogen_step(NitrogenState<T>& s, const NitrogenParams<T>& p, double temp,
                                const T& q) {
    T f_t = pow(p.q10, (temp - p.t_ref) * 0.1);

    T mineral = p.k_min * s.orgn * f_t;
    T nitrif = p.k_nit * s.nh4 * f_t;
    T upt_nh4 = p.k_up * s.nh4 * f_t;
    T upt_no3 = p.k_up * s.no3 * f_t;
    T denit = p.k_den * s.no3 * f_t;
    T to_reservoir = p.k_exp * q * s.no3;
    T export_load = p.k_r * s.reservoir;

    auto limit2 = [](const T& pool, T& f1, T& f2) {
        T total = f1 + f2;
        if (value_of(total) > value_of(pool)) {
            T scale = pool / total;
            f1 = f1 * scale;
            f2 = f2 * scale;
        }
    };
    // orgn outflux: mineralization only
    if (value_of(mineral) > value_of(s.orgn)) mineral = s.orgn * 1.0;
    // nh4 outflux: nitrification + uptake
    limit2(s.nh4, nitrif, upt_nh4);
    // no3 outflux: uptake + denitrification + export to reservoir
    {
        T total = upt_no3 + denit + to_reservoir;
        if (value_of(total) > value_of(s.no3)) {
            T scale = s.no3 / total;
            upt_no3 = upt_no3 * scale;
            denit = denit * scale;
            to_reservoir = to_reservoir * scale;
        }
    }
    // reservoir outflux: export load
    if (value_of(export_load) > value_of(s.reservoir)) export_load = s.reservoir * 1.0;

    s.orgn = s.orgn + p.input_orgn - mineral;
    s.nh4 = s.nh4 + p.input_nh4 + mineral - nitrif - upt_nh4;
    s.no3 = s.no3 + nitrif - upt_no3 - denit - to_reservoir;
    s.reservoir = s.reservoir + to_reservoir - export_load;

    if (!std::isfinite(value_of(s.nh4)) || !std::isfinite(value_of(s.no3)) ||
        !std::isfinite(value_of(s.orgn)) || !std::isfinite(value_of(s.reservoir)))
        throw InvariantViolation("nitrogen: non-finite state after step");

    return NitrogenFluxes<T>{mineral, nitrif, upt_nh4, upt_no3, denit, export_load};
}

}  // namespace ecograph
