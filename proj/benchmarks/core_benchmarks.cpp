#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <vector>

#include "aml/classifiers.hpp"
#include "aml/harness.hpp"
#include "aml/stats.hpp"
#include "aml/trainer.hpp"

namespace {

using namespace aml;

struct Fixture {
    EncodedDataset train_set;
    Atomization model;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        const auto [schema, rows] = make_threshold_dataset(200, 7);
        TabularEncoder enc(schema, rows);
        EncodedDataset ds = enc.encode(rows, {});
        TrainConfig cfg;
        cfg.seed = 7;
        cfg.patience = 10;
        Atomization model = train(ds, cfg).union_model;
        return Fixture{std::move(ds), std::move(model)};
    }();
    return f;
}

void BM_Discrimination(benchmark::State& state) {
    const Fixture& f = fixture();
    std::size_t i = 0;
    for (auto _ : state) {
        const Duple& d = f.train_set.duples[i++ % f.train_set.duples.size()];
        benchmark::DoNotOptimize(duple_holds(f.model, d));
    }
}
BENCHMARK(BM_Discrimination);

void BM_FewestMisses(benchmark::State& state) {
    const Fixture& f = fixture();
    std::size_t i = 0;
    for (auto _ : state) {
        const Term& t = f.train_set.terms[i++ % f.train_set.terms.size()];
        benchmark::DoNotOptimize(
            fewest_misses(f.model, t, f.train_set.label_constants));
    }
}
BENCHMARK(BM_FewestMisses);

void BM_TrainSmall(benchmark::State& state) {
    const auto [schema, rows] = make_threshold_dataset(60, 11);
    TabularEncoder enc(schema, rows);
    const EncodedDataset ds = enc.encode(rows, {});
    for (auto _ : state) {
        TrainConfig cfg;
        cfg.seed = 11;
        cfg.patience = 5;
        benchmark::DoNotOptimize(train(ds, cfg));
    }
}
BENCHMARK(BM_TrainSmall);

void BM_WilcoxonExact(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.1, 1.0);
    std::vector<double> a(40), b(40);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = gauss(rng);
        b[i] = gauss(rng) - 0.2;
    }
    for (auto _ : state) benchmark::DoNotOptimize(wilcoxon_signed_rank(a, b));
}
BENCHMARK(BM_WilcoxonExact);

void BM_HodgesLehmann(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> a(150), b(150);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = gauss(rng) + 0.05;
        b[i] = gauss(rng);
    }
    for (auto _ : state) benchmark::DoNotOptimize(hodges_lehmann(a, b));
}
BENCHMARK(BM_HodgesLehmann);

}  // namespace

BENCHMARK_MAIN();
