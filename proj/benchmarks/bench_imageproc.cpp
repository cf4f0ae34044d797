#include <benchmark/benchmark.h>

#include <random>

#include "flickermine/imageproc.hpp"

using namespace flickermine;

namespace {

GrayImage noise(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> data(static_cast<std::size_t>(w) * h);
    for (auto& v : data) v = u(rng);
    return GrayImage(w, h, std::move(data));
}

void BM_Ncc(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const auto a = noise(side, side, 1);
    const auto b = noise(side, side, 2);
    for (auto _ : state) benchmark::DoNotOptimize(ncc(a, b));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Ncc)->Arg(16)->Arg(32)->Arg(64);

// Template side, search margin on each side.
void BM_MatchTemplate(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const int margin = static_cast<int>(state.range(1));
    const auto templ = noise(side, side, 3);
    const auto region = noise(side + 2 * margin, side + 2 * margin, 4);
    for (auto _ : state) benchmark::DoNotOptimize(match_template(templ, region));
}
BENCHMARK(BM_MatchTemplate)->Args({24, 16})->Args({24, 100})->Args({48, 100})->Unit(benchmark::kMicrosecond);

}  // namespace
