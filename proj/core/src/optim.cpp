#include "ecograph/optim.hpp"

#include "ecograph/errors.hpp"

#include <cmath>

namespace ecograph {

namespace {

class AdamOptimizer final : public Optimizer {
public:
    explicit AdamOptimizer(const OptimizerSpec& spec, std::size_t n) : spec_(spec) { reset(n); }

    void reset(std::size_t n) override {
        m_.assign(n, 0.0);
        v_.assign(n, 0.0);
        t_ = 0;
    }

    void step(std::vector<double>& theta, const std::vector<double>& grad,
              const std::vector<std::uint8_t>& frozen) override {
        if (theta.size() != m_.size() || grad.size() != m_.size())
            throw LengthMismatch("optimizer state does not match parameter vector");
        ++t_;
        double bc1 = 1.0 - std::pow(spec_.beta1, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(spec_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (!frozen.empty() && frozen[i]) continue;
            m_[i] = spec_.beta1 * m_[i] + (1.0 - spec_.beta1) * grad[i];
            v_[i] = spec_.beta2 * v_[i] + (1.0 - spec_.beta2) * grad[i] * grad[i];
            double m_hat = m_[i] / bc1;
            double v_hat = v_[i] / bc2;
            theta[i] -= spec_.lr * m_hat / (std::sqrt(v_hat) + spec_.eps);
        }
    }

private:
    OptimizerSpec spec_;
    std::vector<double> m_;
    std::vector<double> v_;
    long t_ = 0;
};

class SgdOptimizer final : public Optimizer {
public:
    explicit SgdOptimizer(const OptimizerSpec& spec, std::size_t n) : spec_(spec) { reset(n); }

    void reset(std::size_t n) override { n_ = n; }

    void step(std::vector<double>& theta, const std::vector<double>& grad,
              const std::vector<std::uint8_t>& frozen) override {
        if (theta.size() != n_ || grad.size() != n_)
            throw LengthMismatch("optimizer state does not match parameter vector");
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (!frozen.empty() && frozen[i]) continue;
            theta[i] -= spec_.lr * grad[i];
        }
    }

private:
    OptimizerSpec spec_;
    std::size_t n_ = 0;
};

}  // namespace

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, std::size_t n_params) {
    if (spec.kind == OptimizerSpec::Kind::Adam)
        return std::make_unique<AdamOptimizer>(spec, n_params);
    return std::make_unique<SgdOptimizer>(spec, n_params);
}

}  // namespace ecograph
