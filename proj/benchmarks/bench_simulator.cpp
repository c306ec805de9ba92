#include <benchmark/benchmark.h>

#include <ecograph/d8.hpp>
#include <ecograph/simulator.hpp>

using namespace ecograph;

namespace {

Engine make_grid_engine(int n) {
    AsciiGrid d8;
    d8.nrows = n;
    d8.ncols = n;
    d8.cellsize = 30.0;
    d8.values.assign(static_cast<std::size_t>(n) * n, 1.0);  // all east
    WatershedGraph grid = build_from_flow_direction_grid(d8);
    std::map<int, NitrifParamsDelGrosso<double>> params = {{0, {0.1, 0.4, 0.55, 24.0, 5.5}}};
    UpdaterBinding binding;
    binding.selector = NodeSelector::all();
    binding.updater = std::make_shared<NitrifCellUpdater>(
        std::make_shared<DelGrossoFlux>(params), NitrifCellDynamics{});
    return Engine(grid, {binding}, Schedule::synchronous());
}

}  // namespace

// One synchronous step over an n x n nitrification grid.
static void BM_GridStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Engine engine = make_grid_engine(n);
    ForcingSeries forcing = synthetic_daily_forcing(2, 3);
    NodeStates states = engine.initial_states();
    std::vector<double> prev;
    for (auto _ : state) {
        auto r = engine.step(states, prev, forcing, 0);
        benchmark::DoNotOptimize(r.fluxes.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n * n);
}
BENCHMARK(BM_GridStep)->Arg(10)->Arg(20)->Arg(50)->Arg(100);

// Full-year run on a 20x20 grid, trajectory recording included.
static void BM_GridYearRun(benchmark::State& state) {
    Engine engine = make_grid_engine(20);
    ForcingSeries forcing = synthetic_daily_forcing(365, 4);
    NodeStates initial = engine.initial_states();
    for (auto _ : state) {
        Trajectory traj = engine.run(initial, forcing);
        benchmark::DoNotOptimize(traj.fluxes.size());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 365 * 400);
}
BENCHMARK(BM_GridYearRun);

// Impulse routing down a long chain under both deterministic schedules.
static void BM_ChainSchedules(benchmark::State& state) {
    const int length = static_cast<int>(state.range(0));
    WatershedGraph g;
    for (int i = 0; i < length; ++i) g.nodes.push_back({100.0, 0.0, 0, 0});
    for (int i = 0; i + 1 < length; ++i) g.edges.push_back({i, i + 1, 1.0});
    UpdaterBinding binding;
    binding.selector = NodeSelector::all();
    binding.updater = std::make_shared<PassThroughUpdater>();
    binding.messages = {{"inflow", "outflow", AggregateOp::weighted_sum()}};
    Engine sync(g, {binding}, Schedule::synchronous());
    Engine async(g, {binding}, Schedule::topological_async());
    ForcingSeries forcing = synthetic_daily_forcing(32, 5);
    NodeStates initial = sync.initial_states();
    for (auto _ : state) {
        benchmark::DoNotOptimize(sync.run(initial, forcing).fluxes.size());
        benchmark::DoNotOptimize(async.run(initial, forcing).fluxes.size());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 2 * 32 * length);
}
BENCHMARK(BM_ChainSchedules)->Arg(50)->Arg(500);

BENCHMARK_MAIN();
