#include "tiger/benchmark.hpp"
#include "tiger/pipeline.hpp"

#include <map>

#include <benchmark/benchmark.h>

using namespace tiger;

namespace {

struct Fixture {
    SyntheticData data;
    NoisyBenchmark noisy;
};

// Planted-partition benchmark with n nodes and roughly constant mean degree.
const Fixture& fixture(std::size_t n) {
    static std::map<std::size_t, Fixture> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    SyntheticSpec spec;
    spec.community_sizes = {n / 2, n / 2};
    spec.p_in = 0.05 * 200.0 / static_cast<double>(n);
    spec.p_out = 0.002 * 200.0 / static_cast<double>(n);
    spec.steps = 4;
    spec.seed = 11;
    Fixture f;
    f.data = generate_synthetic(spec);
    f.noisy = inject_noise(f.data.stream, f.data.labels, 0.3, 12);
    return cache.emplace(n, std::move(f)).first->second;
}

TemporalGraph grown_graph(const Fixture& f) {
    TemporalGraph g(f.data.features, f.data.labels);
    for (const Delta& d : to_deltas(f.noisy.noisy)) g.apply_delta(d);
    return g;
}

void BM_Matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Tensor a(n, 64, 0.5);
    Tensor b(64, 64, 0.25);
    for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Matmul)->Arg(1000)->Arg(10000);

void BM_GcnForwardBackward(benchmark::State& state) {
    const TemporalGraph g = grown_graph(fixture(static_cast<std::size_t>(state.range(0))));
    Rng rng(1);
    const GcnParams params = GcnParams::init(g.features().cols(), 64, 64, rng);
    const AdjacencyPtr adj = share_adjacency(g, View::purified);
    for (auto _ : state) {
        ad::Var h = gcn_forward(params, adj, ad::Var::constant(g.features()));
        ad::backward(ad::mean(h));
    }
}
BENCHMARK(BM_GcnForwardBackward)->Arg(200)->Arg(400);

void BM_AdamicAdar(benchmark::State& state) {
    const TemporalGraph g = grown_graph(fixture(static_cast<std::size_t>(state.range(0))));
    const auto edges = g.edges(View::purified);
    for (auto _ : state)
        for (const Edge& e : edges) benchmark::DoNotOptimize(adamic_adar(g, e, View::purified));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(edges.size()));
}
BENCHMARK(BM_AdamicAdar)->Arg(200)->Arg(400);

void BM_ConsistencyScore(benchmark::State& state) {
    const TemporalGraph g = grown_graph(fixture(static_cast<std::size_t>(state.range(0))));
    Tensor probs(g.capacity(), 2, 0.5);
    for (std::size_t v = 0; v < g.capacity(); ++v) probs(v, g.labels()[v]) = 0.8, probs(v, 1 - g.labels()[v]) = 0.2;
    const LatentMatrix latent = LatentMatrix::from_probabilities(probs);
    const auto edges = g.edges(View::purified);
    for (auto _ : state) benchmark::DoNotOptimize(score_short_batch(edges, latent, g));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(edges.size()));
}
BENCHMARK(BM_ConsistencyScore)->Arg(200)->Arg(400);

void BM_PipelineStep(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
    const auto deltas = to_deltas(f.noisy.noisy);
    PipelineConfig cfg;
    cfg.purifier.epochs = 5;
    cfg.record_timings = false;
    for (auto _ : state) {
        Pipeline p(f.data.features, f.data.labels, cfg, f.noisy.noise);
        for (const Delta& d : deltas) benchmark::DoNotOptimize(p.run_step(d));
    }
}
BENCHMARK(BM_PipelineStep)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
