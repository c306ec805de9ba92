#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ecograph {

struct OptimizerSpec {
    enum class Kind { Adam, Sgd };
    Kind kind = Kind::Adam;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static OptimizerSpec adam(double lr) { return {Kind::Adam, lr, 0.9, 0.999, 1e-8}; }
    static OptimizerSpec sgd(double lr) { return {Kind::Sgd, lr, 0.0, 0.0, 0.0}; }
};

/// In-place first-order update over a flat parameter vector. Entries with a
/// nonzero frozen flag are never touched.
class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual void step(std::vector<double>& theta, const std::vector<double>& grad,
                      const std::vector<std::uint8_t>& frozen) = 0;
    virtual void reset(std::size_t n) = 0;
};

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, std::size_t n_params);

}  // namespace ecograph
