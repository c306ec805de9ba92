#include "ecograph/metrics.hpp"

#include "ecograph/numerics.hpp"

#include <cmath>

namespace ecograph {

namespace {

void check_lengths(std::span<const double> obs, std::span<const double> sim) {
    if (obs.size() != sim.size())
        throw LengthMismatch("series lengths differ: " + std::to_string(obs.size()) + " vs " +
                             std::to_string(sim.size()));
    if (obs.size() < 2) throw LengthMismatch("metrics need series of length >= 2");
}

double mean_of(std::span<const double> x) {
    KahanSum s;
    for (double v : x) s.add(v);
    return s.value() / static_cast<double>(x.size());
}

}  // namespace

double nse(std::span<const double> obs, std::span<const double> sim) {
    check_lengths(obs, sim);
    double obs_mean = mean_of(obs);
    KahanSum sq_err, sq_dev;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        double e = obs[i] - sim[i];
        double d = obs[i] - obs_mean;
        sq_err.add(e * e);
        sq_dev.add(d * d);
    }
    if (sq_dev.value() == 0.0)
        throw ConstantObservations("nse undefined for constant observations");
    return 1.0 - sq_err.value() / sq_dev.value();
}

double kge(std::span<const double> obs, std::span<const double> sim) {
    check_lengths(obs, sim);
    double mo = mean_of(obs);
    double ms = mean_of(sim);
    KahanSum cov, var_o, var_s;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        double od = obs[i] - mo;
        double sd = sim[i] - ms;
        cov.add(od * sd);
        var_o.add(od * od);
        var_s.add(sd * sd);
    }
    if (var_o.value() == 0.0) throw ConstantSeries("kge undefined for constant observations");
    if (var_s.value() == 0.0) throw ConstantSeries("kge undefined for constant simulation");
    if (mo == 0.0) throw ConstantSeries("kge undefined for zero-mean observations");

    double n = static_cast<double>(obs.size());
    double r = cov.value() / std::sqrt(var_o.value() * var_s.value());
    double alpha = std::sqrt(var_s.value() / n) / std::sqrt(var_o.value() / n);
    double beta = ms / mo;
    return 1.0 - std::sqrt((r - 1.0) * (r - 1.0) + (alpha - 1.0) * (alpha - 1.0) +
                           (beta - 1.0) * (beta - 1.0));
}

SkillMetrics skill(std::span<const double> obs, std::span<const double> sim) {
    check_lengths(obs, sim);
    double mo = mean_of(obs);
    double ms = mean_of(sim);
    KahanSum cov, var_o, var_s, sq_err;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        double od = obs[i] - mo;
        double sd = sim[i] - ms;
        double e = obs[i] - sim[i];
        cov.add(od * sd);
        var_o.add(od * od);
        var_s.add(sd * sd);
        sq_err.add(e * e);
    }
    if (var_o.value() == 0.0)
        throw ConstantObservations("metrics undefined for constant observations");
    if (var_s.value() == 0.0) throw ConstantSeries("kge undefined for constant simulation");
    if (mo == 0.0) throw ConstantSeries("kge undefined for zero-mean observations");

    SkillMetrics m;
    m.nse = 1.0 - sq_err.value() / var_o.value();
    m.r = cov.value() / std::sqrt(var_o.value() * var_s.value());
    m.alpha = std::sqrt(var_s.value() / var_o.value());
    m.beta = ms / mo;
    m.kge = 1.0 - std::sqrt((m.r - 1.0) * (m.r - 1.0) + (m.alpha - 1.0) * (m.alpha - 1.0) +
                            (m.beta - 1.0) * (m.beta - 1.0));
    m.composite = (m.nse + m.kge) / 2.0;
    return m;
}

}  // namespace ecograph
