#include <benchmark/benchmark.h>

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "simchan/config.hpp"
#include "simchan/rng.hpp"
#include "simchan/simnet.hpp"

using namespace simchan;
using num::CVec;
using num::RVec;
using num::cplx;

namespace {

constexpr std::size_t kInputDim = 64;  // N * S of the mapping preset

scene::LabeledDataset random_dataset(std::size_t l, std::uint64_t seed) {
    rng::Prng prng(seed);
    scene::LabeledDataset ds;
    ds.task = scene::Task::positioning;
    ds.n_train = l;
    for (std::size_t i = 0; i < l; ++i) {
        scene::ChannelVector ch;
        ch.n_antennas = kInputDim;
        ch.n_subcarriers = 1;
        for (std::size_t j = 0; j < kInputDim; ++j) {
            ch.values.push_back(cplx(prng.next_gaussian(), prng.next_gaussian()));
        }
        ds.inputs.push_back(std::move(ch));
        ds.targets.push_back({prng.uniform(-2.0, 2.0), prng.uniform(-2.0, 2.0),
                              prng.uniform(-2.0, 2.0)});
    }
    return ds;
}

CVec random_query(std::uint64_t seed) {
    rng::Prng prng(seed);
    CVec h(kInputDim);
    for (auto& v : h) {
        v = cplx(prng.next_gaussian(), prng.next_gaussian());
    }
    return h;
}

}  // namespace

// Single-query forward pass across dictionary sizes; the cost should grow
// linearly with L.
static void forward_pass(benchmark::State& state) {
    const auto l = static_cast<std::size_t>(state.range(0));
    const auto m = net::init_from_dataset(random_dataset(l, 17), 5);
    const CVec h = random_query(18);
    net::ForwardTrace trace;
    for (auto _ : state) {
        net::forward_into(m, h, std::nullopt, trace);
        benchmark::DoNotOptimize(trace.t_hat.data());
    }
    state.SetComplexityN(static_cast<std::int64_t>(l));
}
BENCHMARK(forward_pass)->RangeMultiplier(4)->Range(1024, 16384)->Complexity(benchmark::oN);

// The chunked batch path amortizes dictionary streaming over many queries;
// items/s here divided by forward_pass throughput is the win.
static void forward_batch(benchmark::State& state) {
    const std::size_t batch = 64;
    const auto m = net::init_from_dataset(random_dataset(4096, 19), 5);
    std::vector<CVec> queries;
    for (std::size_t i = 0; i < batch; ++i) {
        queries.push_back(random_query(20 + i));
    }
    std::vector<const CVec*> ptrs;
    for (const auto& q : queries) {
        ptrs.push_back(&q);
    }
    std::vector<net::ForwardTrace> traces;
    for (auto _ : state) {
        net::forward_batch_into(m, ptrs, {}, traces);
        benchmark::DoNotOptimize(traces.front().t_hat.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(forward_batch);

static void backward_pass(benchmark::State& state) {
    const auto m = net::init_from_dataset(random_dataset(4096, 21), 5);
    const CVec h = random_query(22);
    const auto trace = net::forward(m, h);
    const RVec g{0.3, -0.7, 1.1};
    net::SimGradients grads;
    for (auto _ : state) {
        net::backward_into(m, trace, h, g, grads);
        benchmark::DoNotOptimize(grads.d_cols.front().data());
    }
}
BENCHMARK(backward_pass);

// One image-source channel synthesis in the default mapping room (walls,
// second-order reflections, 16 antennas x 16 subcarriers).
static void channel_synthesis(benchmark::State& state) {
    const scene::Scene sc = config::default_mapping_config().scene.build();
    const scene::UserPosition pos{{5.2, 4.8, 1.5}};
    for (auto _ : state) {
        const auto ch = scene::synth_channel(sc, pos, sc.carrier_uplink_hz);
        benchmark::DoNotOptimize(ch.values.data());
    }
}
BENCHMARK(channel_synthesis);

BENCHMARK_MAIN();
