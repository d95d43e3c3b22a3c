// Wall-clock microbenchmarks. The complexity claims are made with operation
// counters (see `netcode-mp bench`); these exist to catch gross regressions.

#include <benchmark/benchmark.h>

#include <random>

#include "netcode/decode.hpp"

using namespace netcode;

namespace {

void BM_field_mul(benchmark::State& state) {
    Field f = FieldSpec::make_order(static_cast<std::uint64_t>(state.range(0)));
    std::mt19937_64 rng(1);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(1024);
    for (auto& [a, b] : pairs) {
        a = static_cast<std::uint32_t>(rng() % f->q());
        b = static_cast<std::uint32_t>(rng() % f->q());
    }
    for (auto _ : state) {
        std::uint32_t acc = 0;
        for (const auto& [a, b] : pairs) acc ^= f->mul(a, b);
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs.size()));
}
BENCHMARK(BM_field_mul)->Arg(2)->Arg(16)->Arg(251);

void BM_rref(benchmark::State& state) {
    Field f = FieldSpec::make_order(16);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(2);
    FMatrix A(f, n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) A.at(r, c) = static_cast<std::uint32_t>(rng() % 16);
    for (auto _ : state) {
        auto res = rref(A);
        benchmark::DoNotOptimize(res.rank);
    }
}
BENCHMARK(BM_rref)->Arg(8)->Arg(16)->Arg(32);

struct ChainCase {
    Network net;
    Observation obs;
};

ChainCase invertible_chain(std::size_t K) {
    Field f = FieldSpec::make_order(16);
    Network topo = make_chain_network(K, f);
    for (std::uint64_t seed = 1;; ++seed) {
        Network net = random_code(topo, f, seed);
        if (rref(net.global_transfer_matrix(net.sinks()[0].observed)).rank < K) continue;
        SymbolAssignment src;
        std::mt19937_64 rng(3);
        for (const auto& s : net.sources()) src.emplace(s.id, vec_from_index(f, 1, rng() % 16));
        Observation obs = net.make_observation(net.sinks()[0].id, net.encode(src));
        return {std::move(net), std::move(obs)};
    }
}

void BM_chain_decode_mp(benchmark::State& state) {
    ChainCase c = invertible_chain(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        DecodeResult r = decode_mp(c.net, c.obs, {});
        benchmark::DoNotOptimize(r.counters.mul);
    }
}
BENCHMARK(BM_chain_decode_mp)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_chain_decode_ge(benchmark::State& state) {
    ChainCase c = invertible_chain(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        DecodeResult r = decode_gaussian(c.net, c.obs, {});
        benchmark::DoNotOptimize(r.counters.mul);
    }
}
BENCHMARK(BM_chain_decode_ge)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

} // namespace

BENCHMARK_MAIN();
