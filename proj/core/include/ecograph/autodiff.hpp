#pragma once

#include "ecograph/errors.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ecograph {

class Tape;

/// Reverse-mode differentiable scalar. A Var is a value plus an index into
/// the tape it was recorded on; copying is cheap and never re-records.
class Var {
public:
    Var() = default;

    double value() const { return value_; }
    std::int32_t index() const { return index_; }
    Tape* tape() const { return tape_; }

private:
    friend class Tape;
    friend class Gradients;
    Var(double v, std::int32_t idx, Tape* t) : value_(v), index_(idx), tape_(t) {}

    double value_ = 0.0;
    std::int32_t index_ = -1;
    Tape* tape_ = nullptr;
};

/// Append-only record of primitive operations. Inputs always precede outputs,
/// so one reverse sweep propagates adjoints. Local partials are computed at
/// record time; backward never re-evaluates forward math.
class Tape {
public:
    struct Node {
        std::int32_t a = -1;
        std::int32_t b = -1;
        double da = 0.0;
        double db = 0.0;
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Registers a leaf (independent variable).
    Var leaf(double value) {
        if (!std::isfinite(value)) throw NonFiniteEvaluation("leaf value is not finite");
        nodes_.push_back(Node{});
        return Var(value, static_cast<std::int32_t>(nodes_.size() - 1), this);
    }

    /// Constant wrapped as a leaf; gradients flow to it but are discarded.
    Var constant(double value) { return leaf(value); }

    std::size_t size() const { return nodes_.size(); }
    void reserve(std::size_t n) { nodes_.reserve(n); }
    void clear() { nodes_.clear(); }

    /// Position marker for rewind(); leaves recorded before the mark survive.
    std::size_t mark() const { return nodes_.size(); }
    void rewind_to(std::size_t mark) { nodes_.resize(mark); }

    Var unary(double value, const Var& a, double da) {
        check(a);
        nodes_.push_back(Node{a.index_, -1, da, 0.0});
        return Var(value, static_cast<std::int32_t>(nodes_.size() - 1), this);
    }

    Var binary(double value, const Var& a, const Var& b, double da, double db) {
        check(a);
        check(b);
        nodes_.push_back(Node{a.index_, b.index_, da, db});
        return Var(value, static_cast<std::int32_t>(nodes_.size() - 1), this);
    }

    const std::vector<Node>& nodes() const { return nodes_; }

private:
    void check(const Var& v) const {
        if (v.tape_ != this || v.index_ < 0)
            throw DetachedVariable("operand does not belong to this tape");
    }

    std::vector<Node> nodes_;
};

/// Result of a reverse sweep: the adjoint of every tape position.
class Gradients {
public:
    Gradients(Tape* tape, std::vector<double> adjoints)
        : tape_(tape), adjoints_(std::move(adjoints)) {}

    /// d(loss)/d(v) for any variable recorded at or before the loss.
    double wrt(const Var& v) const {
        if (v.tape() != tape_ || v.index() < 0)
            throw DetachedVariable("gradient requested for a variable from another tape");
        if (static_cast<std::size_t>(v.index()) >= adjoints_.size()) return 0.0;
        return adjoints_[static_cast<std::size_t>(v.index())];
    }

    double operator[](const Var& v) const { return wrt(v); }

private:
    Tape* tape_;
    std::vector<double> adjoints_;
};

/// Single reverse sweep from `loss` over its tape. Accumulation order is the
/// fixed reverse tape order, so repeated sweeps are bit-identical.
inline Gradients backward(const Var& loss) {
    Tape* tape = loss.tape();
    if (tape == nullptr || loss.index() < 0)
        throw DetachedVariable("backward on a variable without a tape");
    if (!std::isfinite(loss.value()))
        throw NonFiniteEvaluation("backward on a non-finite loss");

    const auto& nodes = tape->nodes();
    std::vector<double> adj(static_cast<std::size_t>(loss.index()) + 1, 0.0);
    adj[static_cast<std::size_t>(loss.index())] = 1.0;
    for (std::int32_t i = loss.index(); i >= 0; --i) {
        double a = adj[static_cast<std::size_t>(i)];
        if (a == 0.0) continue;
        const Tape::Node& n = nodes[static_cast<std::size_t>(i)];
        if (n.a >= 0) adj[static_cast<std::size_t>(n.a)] += n.da * a;
        if (n.b >= 0) adj[static_cast<std::size_t>(n.b)] += n.db * a;
    }
    return Gradients(tape, std::move(adj));
}

// ---------------------------------------------------------------------------
// Primitive operations
// ---------------------------------------------------------------------------

inline Var operator+(const Var& a, const Var& b) {
    return a.tape()->binary(a.value() + b.value(), a, b, 1.0, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
    return a.tape()->binary(a.value() - b.value(), a, b, 1.0, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
    return a.tape()->binary(a.value() * b.value(), a, b, b.value(), a.value());
}
inline Var operator/(const Var& a, const Var& b) {
    if (b.value() == 0.0) throw DomainError("division by zero");
    double inv = 1.0 / b.value();
    return a.tape()->binary(a.value() * inv, a, b, inv, -a.value() * inv * inv);
}
inline Var operator-(const Var& a) { return a.tape()->unary(-a.value(), a, -1.0); }

inline Var operator+(const Var& a, double c) { return a.tape()->unary(a.value() + c, a, 1.0); }
inline Var operator+(double c, const Var& a) { return a + c; }
inline Var operator-(const Var& a, double c) { return a.tape()->unary(a.value() - c, a, 1.0); }
inline Var operator-(double c, const Var& a) { return a.tape()->unary(c - a.value(), a, -1.0); }
inline Var operator*(const Var& a, double c) { return a.tape()->unary(a.value() * c, a, c); }
inline Var operator*(double c, const Var& a) { return a * c; }
inline Var operator/(const Var& a, double c) {
    if (c == 0.0) throw DomainError("division by zero");
    return a * (1.0 / c);
}
inline Var operator/(double c, const Var& a) {
    if (a.value() == 0.0) throw DomainError("division by zero");
    double inv = 1.0 / a.value();
    return a.tape()->unary(c * inv, a, -c * inv * inv);
}

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator+=(Var& a, double c) { return a = a + c; }
inline Var& operator-=(Var& a, double c) { return a = a - c; }
inline Var& operator*=(Var& a, double c) { return a = a * c; }

inline Var exp(const Var& a) {
    double e = std::exp(a.value());
    return a.tape()->unary(e, a, e);
}

/// Natural logarithm; the argument must be strictly positive.
inline Var log(const Var& a) {
    if (a.value() <= 0.0) throw DomainError("log of non-positive value");
    return a.tape()->unary(std::log(a.value()), a, 1.0 / a.value());
}

inline Var sqrt(const Var& a) {
    if (a.value() < 0.0) throw DomainError("sqrt of negative value");
    double r = std::sqrt(a.value());
    // one-sided derivative pinned to 0 at the origin
    double d = (a.value() > 0.0) ? 0.5 / r : 0.0;
    return a.tape()->unary(r, a, d);
}

/// x^y for x >= 0. At x == 0 the partials use the y > 0 limits, which keeps
/// recharge-style terms (x in [0,1], y calibrated) finite.
inline Var pow(const Var& x, const Var& y) {
    if (x.value() < 0.0) throw DomainError("pow of negative base");
    if (x.value() == 0.0) {
        if (y.value() <= 0.0) throw DomainError("pow(0, y) with y <= 0");
        double dx = (y.value() == 1.0) ? 1.0 : 0.0;
        return x.tape()->binary(0.0, x, y, dx, 0.0);
    }
    double v = std::pow(x.value(), y.value());
    return x.tape()->binary(v, x, y, y.value() * v / x.value(), v * std::log(x.value()));
}

inline Var pow(const Var& x, double c) {
    if (x.value() < 0.0) throw DomainError("pow of negative base");
    if (x.value() == 0.0) {
        if (c <= 0.0) throw DomainError("pow(0, c) with c <= 0");
        return x.tape()->unary(0.0, x, c == 1.0 ? 1.0 : 0.0);
    }
    double v = std::pow(x.value(), c);
    return x.tape()->unary(v, x, c * v / x.value());
}

/// Ties follow the first argument: d max/d a = 1 when a == b.
inline Var max(const Var& a, const Var& b) {
    bool first = a.value() >= b.value();
    return a.tape()->binary(first ? a.value() : b.value(), a, b, first ? 1.0 : 0.0,
                            first ? 0.0 : 1.0);
}
inline Var max(const Var& a, double c) {
    bool first = a.value() >= c;
    return a.tape()->unary(first ? a.value() : c, a, first ? 1.0 : 0.0);
}
inline Var max(double c, const Var& b) {
    bool first = c >= b.value();
    return b.tape()->unary(first ? c : b.value(), b, first ? 0.0 : 1.0);
}

/// Ties follow the first argument: d min/d a = 1 when a == b.
inline Var min(const Var& a, const Var& b) {
    bool first = a.value() <= b.value();
    return a.tape()->binary(first ? a.value() : b.value(), a, b, first ? 1.0 : 0.0,
                            first ? 0.0 : 1.0);
}
inline Var min(const Var& a, double c) {
    bool first = a.value() <= c;
    return a.tape()->unary(first ? a.value() : c, a, first ? 1.0 : 0.0);
}
inline Var min(double c, const Var& b) {
    bool first = c <= b.value();
    return b.tape()->unary(first ? c : b.value(), b, first ? 0.0 : 1.0);
}

/// relu(0) takes the positive branch: gradient 1.
inline Var relu(const Var& a) {
    bool pos = a.value() >= 0.0;
    return a.tape()->unary(pos ? a.value() : 0.0, a, pos ? 1.0 : 0.0);
}

inline Var tanh(const Var& a) {
    double t = std::tanh(a.value());
    return a.tape()->unary(t, a, 1.0 - t * t);
}

inline double sigmoid_value(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

inline Var sigmoid(const Var& a) {
    double s = sigmoid_value(a.value());
    return a.tape()->unary(s, a, s * (1.0 - s));
}

/// Clamp to [0, 1]; pass-through gradient at both boundary ties.
inline Var clamp01(const Var& a) {
    if (a.value() < 0.0) return a.tape()->unary(0.0, a, 0.0);
    if (a.value() > 1.0) return a.tape()->unary(1.0, a, 0.0);
    return a.tape()->unary(a.value(), a, 1.0);
}

// double overloads so templated process code works with T = double or T = Var
inline double relu(double x) { return x >= 0.0 ? x : 0.0; }
inline double sigmoid(double x) { return sigmoid_value(x); }
inline double tanh(double x) { return std::tanh(x); }
inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) {
    if (x <= 0.0) throw DomainError("log of non-positive value");
    return std::log(x);
}
inline double sqrt(double x) {
    if (x < 0.0) throw DomainError("sqrt of negative value");
    return std::sqrt(x);
}
inline double pow(double x, double y) {
    if (x < 0.0) throw DomainError("pow of negative base");
    if (x == 0.0 && y <= 0.0) throw DomainError("pow(0, y) with y <= 0");
    return std::pow(x, y);
}
inline double max(double a, double b) { return a >= b ? a : b; }
inline double min(double a, double b) { return a <= b ? a : b; }
inline double value_of(double x) { return x; }
inline double value_of(const Var& v) { return v.value(); }

// ---------------------------------------------------------------------------
// Bounded parameters
// ---------------------------------------------------------------------------

/// Physical parameter reparameterized through a sigmoid so unconstrained
/// optimization can never leave (lo, hi).
class BoundedParam {
public:
    BoundedParam(const Var& raw, double lo, double hi) : raw_(raw), lo_(lo), hi_(hi) {
        if (!(lo < hi)) throw InvalidBounds("bounds must satisfy lo < hi");
    }

    /// Leaf initialized so that value() == v (v strictly inside the bounds).
    static BoundedParam from_value(Tape& tape, double v, double lo, double hi) {
        if (!(lo < hi)) throw InvalidBounds("bounds must satisfy lo < hi");
        if (!(v > lo && v < hi))
            throw InvalidBounds("initial value must lie strictly inside (lo, hi)");
        double frac = (v - lo) / (hi - lo);
        return BoundedParam(tape.leaf(std::log(frac / (1.0 - frac))), lo, hi);
    }

    Var value() const { return lo_ + (hi_ - lo_) * sigmoid(raw_); }
    double value_double() const { return lo_ + (hi_ - lo_) * sigmoid_value(raw_.value()); }

    const Var& raw() const { return raw_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    Var raw_;
    double lo_;
    double hi_;
};

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

/// Scalar function of n inputs, evaluated on a caller-provided tape.
using DiffFunction = std::function<Var(Tape&, std::span<const Var>)>;

/// Max over coordinates of |AD - central difference| / max(1, |central
/// difference|). The default eps matches the engine-wide verification setup.
double gradient_check(const DiffFunction& f, std::span<const double> x, double eps = 1e-6);

}  // namespace ecograph
