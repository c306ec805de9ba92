#include <benchmark/benchmark.h>

#include <ecograph/distill.hpp>
#include <ecograph/train.hpp>

using namespace ecograph;

// One epoch of minibatch MLP training (bind + forward + backward + Adam).
static void BM_MlpEpoch(benchmark::State& state) {
    Rng rng(6);
    TabularDataset data;
    for (int i = 0; i < 512; ++i) {
        data.features.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0),
                                 rng.uniform(0.0, 1.0)});
        data.targets.push_back({rng.uniform(0.0, 1.0)});
        data.soil_classes.push_back(static_cast<int>(rng.below(3)));
    }
    MlpConfig cfg;
    cfg.n_soil_classes = 3;
    cfg.embed_dim = 4;
    cfg.feature_names = {"a", "b", "c"};
    cfg.hidden = {64, 64};
    cfg.output_names = {"y"};
    TrainOptions opt;
    opt.epochs = 1;
    opt.batch_size = 64;
    opt.seed = 7;
    for (auto _ : state) {
        MlpRegressor model = MlpRegressor::create(cfg, 7);
        TrainResult r = train_epochs(model, data, opt);
        benchmark::DoNotOptimize(r.loss_trace[0]);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 512);
}
BENCHMARK(BM_MlpEpoch);

// One epoch of truncated-BPTT training on a five-year daily series.
static void BM_GatedRecurrentEpoch(benchmark::State& state) {
    ForcingSeries forcing = synthetic_daily_forcing(5 * 365, 8);
    SequenceDataset data;
    data.features = forcing_features(forcing.records());
    for (std::size_t t = 0; t < forcing.length(); ++t)
        data.targets["streamflow"].push_back(forcing.at(0, t).precip * 0.4);
    SeqConfig cfg;
    cfg.mode = SeqMode::GatedRecurrent;
    cfg.hidden_state = 32;
    cfg.feature_names = forcing_feature_names();
    TrainOptions opt;
    opt.epochs = 1;
    opt.bptt_window = 30;
    opt.seed = 9;
    for (auto _ : state) {
        SequenceRegressor model = SequenceRegressor::create(cfg, 9);
        TrainResult r = train_epochs(model, data, opt);
        benchmark::DoNotOptimize(r.loss_trace[0]);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 5 * 365);
}
BENCHMARK(BM_GatedRecurrentEpoch);

BENCHMARK_MAIN();
