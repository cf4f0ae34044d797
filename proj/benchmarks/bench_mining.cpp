#include <benchmark/benchmark.h>

#include "flickermine/hn_miner.hpp"
#include "flickermine/hp_miner.hpp"
#include "flickermine/synth.hpp"

using namespace flickermine;

namespace {

synth::SyntheticVideo scene() { return synth::generate(synth::make_scenario(synth::random_params(11))); }

void BM_MineHardNegatives(benchmark::State& state) {
    const auto video = scene();
    const auto frames = video.frame_store();
    MiningConfig cfg;
    cfg.enlargement_px = static_cast<double>(state.range(0));
    const auto stream = filter_by_score(video.stream, cfg.score_threshold);
    for (auto _ : state) benchmark::DoNotOptimize(mine_stream(stream, frames, cfg));
    state.counters["detections"] = static_cast<double>(stream.detection_count());
}
BENCHMARK(BM_MineHardNegatives)->Arg(16)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_MineHardPositives(benchmark::State& state) {
    const auto video = scene();
    const auto frames = video.frame_store();
    const MiningConfig cfg;
    const auto stream = filter_by_score(video.stream, cfg.score_threshold);
    for (auto _ : state) benchmark::DoNotOptimize(mine_hard_positives(stream, frames, cfg));
}
BENCHMARK(BM_MineHardPositives)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
