#include <benchmark/benchmark.h>

#include <ecograph/autodiff.hpp>
#include <ecograph/distill.hpp>
#include <ecograph/hbv.hpp>

using namespace ecograph;

// Tape record + reverse sweep through one simulated HBV year per iteration:
// the inner loop of differentiable calibration.
static void BM_HbvYearBackward(benchmark::State& state) {
    ForcingSeries forcing = synthetic_daily_forcing(365, 1);
    Tape tape;
    for (auto _ : state) {
        tape.clear();
        HbvParams<Var> p{tape.leaf(0.0),  tape.leaf(3.0),  tape.leaf(200.0), tape.leaf(2.0),
                         tape.leaf(0.7),  tape.leaf(0.3),  tape.leaf(0.1),   tape.leaf(0.01),
                         tape.leaf(20.0), tape.leaf(1.5),  1};
        HbvState<Var> s = make_hbv_state(p.fc * 0.0, p.fc * 0.5, p.fc * 0.0,
                                         p.fc * 0.0 + 10.0, 1);
        Var loss = tape.constant(0.0);
        for (std::size_t t = 0; t < forcing.length(); ++t) {
            Var q = hbv_step(s, p, forcing.at(0, t)).q_out;
            loss = loss + q * q;
        }
        Gradients g = backward(loss);
        benchmark::DoNotOptimize(g.wrt(p.fc));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 365);
}
BENCHMARK(BM_HbvYearBackward);

// Raw scalar-node throughput: chained smooth primitives.
static void BM_TapePrimitives(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    Tape tape;
    for (auto _ : state) {
        tape.clear();
        Var x = tape.leaf(0.7);
        Var acc = tape.constant(0.0);
        for (std::int64_t i = 0; i < n; ++i)
            acc = acc + sigmoid(x * 1.01) * tanh(acc * 0.001);
        Gradients g = backward(acc);
        benchmark::DoNotOptimize(g.wrt(x));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TapePrimitives)->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
