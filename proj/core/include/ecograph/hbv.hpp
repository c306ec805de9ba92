#pragma once

#include "ecograph/autodiff.hpp"
#include "ecograph/errors.hpp"
#include "ecograph/forcing.hpp"

#include <cmath>
#include <vector>

namespace ecograph {

/// HBV-light parameter set. T is double for plain runs and Var when the
/// parameters are being calibrated.
template <class T>
struct HbvParams {
    T tt{};      // degC, snow/rain threshold
    T cfmax{};   // mm/degC/day, degree-day melt factor
    T fc{};      // mm, soil field capacity
    T beta{};    // -, recharge exponent
    T lp{};      // -, fraction of fc where ET reaches potential
    T k0{};      // 1/day, surface reservoir
    T k1{};      // 1/day, upper zone
    T k2{};      // 1/day, lower zone
    T uzl{};     // mm, upper-zone threshold for k0
    T perc{};    // mm/day, max percolation
    int maxbas = 1;  // days, triangular routing base
};

template <class T>
struct HbvState {
    T snow{};  // mm
    T sm{};    // mm
    T suz{};   // mm
    T slz{};   // mm
    std::vector<T> routing;  // mm scheduled to leave at offsets 0..maxbas-1

    /// Total stored water including the routing buffer (mm).
    T total_storage() const {
        T s = snow + sm + suz + slz;
        for (const T& r : routing) s = s + r;
        return s;
    }
};

template <class T>
struct HbvFluxes {
    T q_out{};     // mm/day leaving the routing buffer
    T et{};        // mm/day
    T melt{};      // mm/day
    T recharge{};  // mm/day into the upper zone (incl. soil overflow)
};

/// Discrete triangular unit hydrograph over maxbas days; weights sum to 1.
inline std::vector<double> triangular_weights(int maxbas) {
    if (maxbas < 1) throw InvariantViolation("maxbas must be >= 1");
    const double m = static_cast<double>(maxbas);
    auto antiderivative = [m](double u) {
        // integral of 2/m - |u - m/2| * 4/m^2
        if (u <= m / 2.0) return 2.0 * u / m - (4.0 / (m * m)) * (m / 2.0 * u - u * u / 2.0);
        double half = 1.0 / 2.0;  // value of the antiderivative at m/2
        double v = u - m / 2.0;
        return half + 2.0 * v / m - (4.0 / (m * m)) * (v * v / 2.0);
    };
    std::vector<double> w(static_cast<std::size_t>(maxbas));
    double total = 0.0;
    for (int i = 0; i < maxbas; ++i) {
        w[static_cast<std::size_t>(i)] =
            antiderivative(static_cast<double>(i + 1)) - antiderivative(static_cast<double>(i));
        total += w[static_cast<std::size_t>(i)];
    }
    for (double& wi : w) wi /= total;
    return w;
}

inline void validate_hbv_params(const HbvParams<double>& p) {
    if (!(p.fc > 0.0)) throw InvariantViolation("hbv: FC must be > 0");
    if (!(p.lp > 0.0 && p.lp <= 1.0)) throw InvariantViolation("hbv: LP must be in (0, 1]");
    if (!(p.k0 >= p.k1 && p.k1 >= p.k2 && p.k2 > 0.0))
        throw InvariantViolation("hbv: need K0 >= K1 >= K2 > 0");
    if (!(p.beta > 0.0)) throw InvariantViolation("hbv: BETA must be > 0");
    if (p.cfmax < 0.0) throw InvariantViolation("hbv: CFMAX must be >= 0");
    if (p.perc < 0.0) throw InvariantViolation("hbv: PERC must be >= 0");
    if (p.maxbas < 1) throw InvariantViolation("hbv: MAXBAS must be >= 1");
}

template <class T>
HbvState<T> make_hbv_state(T snow, T sm, T suz, T slz, int maxbas) {
    HbvState<T> s;
    s.snow = snow;
    s.sm = sm;
    s.suz = suz;
    s.slz = slz;
    // zero derived from an existing value so Var zeros stay on the tape
    s.routing.assign(static_cast<std::size_t>(maxbas), snow * 0.0);
    return s;
}

/// One daily HBV step. Phase order is fixed: (1) rain/snow partition at TT,
/// (2) degree-day melt, (3) soil recharge by (sm/FC)^BETA with overflow above
/// FC spilling to recharge, (4) evapotranspiration limited by LP*FC and by
/// available soil moisture, (5) upper/lower zone outflows with percolation
/// (outflows never exceed their reservoir), (6) triangular MAXBAS routing.
/// Closes water balance: precip - et - q_out - d(storage) = 0.
template <class T>
HbvFluxes<T> hbv_step(HbvState<T>& s, const HbvParams<T>& p, const ForcingRecord& f) {
    // (1) partition precipitation at the TT threshold
    bool snowfall = f.temp < value_of(p.tt);
    double rain = snowfall ? 0.0 : f.precip;
    if (snowfall) s.snow = s.snow + f.precip;

    // (2) degree-day snowmelt, limited by the pack
    T melt = min(s.snow, p.cfmax * max(f.temp - p.tt, 0.0));
    s.snow = s.snow - melt;

    // (3) recharge split and soil-moisture update; overflow above FC spills
    T w = rain + melt;
    T recharge = w * pow(s.sm / p.fc, p.beta);
    s.sm = s.sm + w - recharge;
    T overflow = max(s.sm - p.fc, 0.0);
    s.sm = s.sm - overflow;
    recharge = recharge + overflow;

    // (4) evapotranspiration
    T et = f.pet * min(s.sm / (p.lp * p.fc), 1.0);
    et = min(et, s.sm);
    s.sm = s.sm - et;

    // (5) reservoir cascade
    s.suz = s.suz + recharge;
    T perc = min(p.perc, s.suz);
    s.suz = s.suz - perc;
    s.slz = s.slz + perc;
    T q0 = p.k0 * max(s.suz - p.uzl, 0.0);
    T q1 = p.k1 * s.suz;
    T quz = q0 + q1;
    if (value_of(quz) > value_of(s.suz)) {
        // proportional scaling; the zone drains exactly, never below zero
        quz = s.suz * 1.0;
    }
    s.suz = s.suz - quz;
    T q2 = min(p.k2 * s.slz, s.slz);
    s.slz = s.slz - q2;

    // (6) triangular routing
    if (s.routing.size() != static_cast<std::size_t>(p.maxbas))
        throw InvariantViolation("hbv: routing buffer length does not match MAXBAS");
    T q_gen = quz + q2;
    std::vector<double> weights = triangular_weights(p.maxbas);
    for (int i = 0; i < p.maxbas; ++i)
        s.routing[static_cast<std::size_t>(i)] =
            s.routing[static_cast<std::size_t>(i)] + weights[static_cast<std::size_t>(i)] * q_gen;
    T q_out = s.routing[0];
    for (int i = 0; i + 1 < p.maxbas; ++i)
        s.routing[static_cast<std::size_t>(i)] = s.routing[static_cast<std::size_t>(i + 1)];
    s.routing[static_cast<std::size_t>(p.maxbas - 1)] = q_gen * 0.0;

    if (!std::isfinite(value_of(q_out)) || !std::isfinite(value_of(s.sm)) ||
        !std::isfinite(value_of(s.suz)) || !std::isfinite(value_of(s.slz)) ||
        !std::isfinite(value_of(s.snow)))
        throw InvariantViolation("hbv: non-finite state after step");

    return HbvFluxes<T>{q_out, et, melt, recharge};
}

}  // namespace ecograph
