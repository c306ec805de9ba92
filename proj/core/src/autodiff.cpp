#include "ecograph/autodiff.hpp"

#include <cmath>

namespace ecograph {

namespace {

double evaluate_plain(const DiffFunction& f, std::span<const double> x) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(x.size());
    for (double v : x) leaves.push_back(tape.leaf(v));
    double out = f(tape, leaves).value();
    if (!std::isfinite(out)) throw NonFiniteEvaluation("function evaluation is not finite");
    return out;
}

}  // namespace

double gradient_check(const DiffFunction& f, std::span<const double> x, double eps) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(x.size());
    for (double v : x) leaves.push_back(tape.leaf(v));
    Var loss = f(tape, leaves);
    if (!std::isfinite(loss.value()))
        throw NonFiniteEvaluation("function evaluation is not finite");
    Gradients grads = backward(loss);

    std::vector<double> probe(x.begin(), x.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        double saved = probe[i];
        probe[i] = saved + eps;
        double fp = evaluate_plain(f, probe);
        probe[i] = saved - eps;
        double fm = evaluate_plain(f, probe);
        probe[i] = saved;
        double fd = (fp - fm) / (2.0 * eps);
        double err = std::abs(grads.wrt(leaves[i]) - fd) / std::max(1.0, std::abs(fd));
        if (err > worst) worst = err;
    }
    return worst;
}

}  // namespace ecograph
