#pragma once

#include "ecograph/autodiff.hpp"
#include "ecograph/errors.hpp"

#include <cstddef>
#include <vector>

namespace ecograph {

/// Dense row-major tensor of rank <= 2. T is double for inference and Var
/// for recorded (trainable) evaluation; the same kernels serve both.
template <class T>
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    static Tensor vector(std::size_t n) { return Tensor(1, n); }

    std::size_t size() const { return data.size(); }
    T& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const T& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

template <class T>
std::vector<T> matvec(const Tensor<T>& w, const std::vector<T>& x) {
    if (w.cols != x.size()) throw ShapeMismatch("matvec: inner dimensions differ");
    std::vector<T> out;
    out.reserve(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
        T acc = w.at(r, 0) * x[0];
        for (std::size_t c = 1; c < w.cols; ++c) acc = acc + w.at(r, c) * x[c];
        out.push_back(acc);
    }
    return out;
}

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.cols != b.rows) throw ShapeMismatch("matmul: inner dimensions differ");
    Tensor<T> out(a.rows, b.cols);
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t c = 0; c < b.cols; ++c) {
            T acc = a.at(r, 0) * b.at(0, c);
            for (std::size_t k = 1; k < a.cols; ++k) acc = acc + a.at(r, k) * b.at(k, c);
            out.at(r, c) = acc;
        }
    }
    return out;
}

template <class T, class F>
std::vector<T> map(const std::vector<T>& x, F&& f) {
    std::vector<T> out;
    out.reserve(x.size());
    for (const T& v : x) out.push_back(f(v));
    return out;
}

template <class T>
T sum(const std::vector<T>& x) {
    if (x.empty()) throw ShapeMismatch("sum of empty vector");
    T acc = x[0];
    for (std::size_t i = 1; i < x.size(); ++i) acc = acc + x[i];
    return acc;
}

template <class T>
T mean(const std::vector<T>& x) {
    return sum(x) * (1.0 / static_cast<double>(x.size()));
}

/// Per-vector normalization: (x - mean) / sqrt(var + eps). No learnable
/// affine by default.
template <class T>
std::vector<T> layer_norm(const std::vector<T>& x, double eps = 1e-5) {
    using std::sqrt;
    if (x.empty()) throw ShapeMismatch("layer_norm of empty vector");
    T mu = mean(x);
    T var = (x[0] - mu) * (x[0] - mu);
    for (std::size_t i = 1; i < x.size(); ++i) var = var + (x[i] - mu) * (x[i] - mu);
    var = var * (1.0 / static_cast<double>(x.size()));
    T denom = sqrt(var + eps);
    std::vector<T> out;
    out.reserve(x.size());
    for (const T& v : x) out.push_back((v - mu) / denom);
    return out;
}

}  // namespace ecograph
