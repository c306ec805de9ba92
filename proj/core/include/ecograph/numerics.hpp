#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace ecograph {

/// Kahan compensated accumulator for conservation audits and long sums.
class KahanSum {
public:
    KahanSum() = default;
    explicit KahanSum(double init) : sum_(init) {}

    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }

    KahanSum& operator+=(double x) {
        add(x);
        return *this;
    }

    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Renders a double with 17 significant digits, enough to round-trip exactly.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// |a - b| relative to max(1, |b|); the denominator floor keeps near-zero
/// references from exploding the ratio.
inline double rel_error(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

}  // namespace ecograph
