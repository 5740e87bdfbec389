#include <benchmark/benchmark.h>

#include "semfuse/episode.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/runner.hpp"

using namespace semfuse;

namespace {

Scene bench_scene() {
    SceneSpec spec;
    spec.width = 32;
    spec.height = 32;
    return generate_scene(spec, 77);
}

static void BM_Softmax(benchmark::State& state) {
    Rng rng(1);
    Logits l(6);
    for (double& v : l) v = rng.uniform(-8.0, 8.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(softmax(l));
    }
}
BENCHMARK(BM_Softmax);

static void BM_NormalizedEntropy(benchmark::State& state) {
    ProbVector p{0.4, 0.3, 0.1, 0.1, 0.05, 0.05};
    for (auto _ : state) {
        benchmark::DoNotOptimize(normalized_entropy(p));
    }
}
BENCHMARK(BM_NormalizedEntropy);

static void BM_RaycastFov(benchmark::State& state) {
    Scene scene = bench_scene();
    AgentPose pose = scene.start_poses.front();
    for (auto _ : state) {
        benchmark::DoNotOptimize(raycast_fov(scene, pose, M_PI / 2, 61, 5.0));
    }
}
BENCHMARK(BM_RaycastFov);

static void BM_ObservationStep(benchmark::State& state) {
    Scene scene = bench_scene();
    AgentPose pose = scene.start_poses.front();
    SensorParams sensor;
    NoiseModel noise;
    std::uint64_t step = 0;
    for (auto _ : state) {
        Rng rng(mix_seed(11, step++));
        benchmark::DoNotOptimize(make_observation(scene, pose, sensor, noise, rng));
    }
}
BENCHMARK(BM_ObservationStep);

static void BM_IntegrateWeightedAveraging(benchmark::State& state) {
    Scene scene = bench_scene();
    AgentPose pose = scene.start_poses.front();
    SensorParams sensor;
    NoiseModel noise;
    Rng rng(3);
    Observation obs = make_observation(scene, pose, sensor, noise, rng);
    auto hits = project_observation(obs, 3.0);
    GridMap map(scene.width, scene.height, scene.resolution, scene.num_classes);
    auto strategy = make_strategy(
        default_strategy_config(StrategyKind::WeightedAveraging), 2, 1.0);
    for (auto _ : state) {
        strategy->integrate(map, hits, pose);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(hits.size()));
}
BENCHMARK(BM_IntegrateWeightedAveraging);

static void BM_ShortestPath32(benchmark::State& state) {
    Scene scene = bench_scene();
    auto trav = [&scene](int x, int y) { return !scene.occupied(x, y); };
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            try_shortest_path(trav, scene.width, scene.height, scene.resolution,
                              {1, 1}, {30, 30}));
    }
}
BENCHMARK(BM_ShortestPath32);

static void BM_FullEpisode(benchmark::State& state) {
    RunConfig cfg = default_run_config();
    cfg.episode_count = 1;
    cfg.scene_count = 1;
    EpisodeSet set = build_episode_set(cfg);
    EpisodeConfig ecfg;
    ecfg.temperature = 3.0;
    ecfg.strategy = default_strategy_config(
        static_cast<StrategyKind>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_episode(set.episodes.front(), ecfg));
    }
}
BENCHMARK(BM_FullEpisode)
    ->Arg(static_cast<int>(StrategyKind::Latest))
    ->Arg(static_cast<int>(StrategyKind::LogOdds))
    ->Arg(static_cast<int>(StrategyKind::WeightedAveraging));

}  // namespace

BENCHMARK_MAIN();
