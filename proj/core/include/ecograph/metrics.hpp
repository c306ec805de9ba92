#pragma once

#include "ecograph/errors.hpp"

#include <span>
#include <string>

namespace ecograph {

/// Skill scores of a simulated series against a reference. kge components:
/// r is Pearson correlation, alpha the std ratio sim/obs, beta the mean ratio.
struct SkillMetrics {
    double nse = 0.0;
    double kge = 0.0;
    double composite = 0.0;  // (nse + kge) / 2
    double r = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

/// Nash-Sutcliffe efficiency: 1 - sum((o-s)^2) / sum((o-mean(o))^2).
double nse(std::span<const double> obs, std::span<const double> sim);

/// Kling-Gupta efficiency, original 2009 form:
/// 1 - sqrt((r-1)^2 + (alpha-1)^2 + (beta-1)^2).
double kge(std::span<const double> obs, std::span<const double> sim);

/// nse, kge and their average in one pass.
SkillMetrics skill(std::span<const double> obs, std::span<const double> sim);

/// Identifier of the KGE variant implemented, recorded in report metadata.
inline const char* kge_variant() { return "kge2009"; }

}  // namespace ecograph
