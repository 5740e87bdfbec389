#include "semfuse/runner.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <thread>

#include "semfuse/logit_file.hpp"
#include "semfuse/rng.hpp"

namespace semfuse {

namespace {

std::vector<std::string> list_scene_files(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".scene")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw std::runtime_error("no .scene files in " + dir);
    return files;
}

EpisodeSet build_set(const RunConfig& cfg, int episode_count, std::uint64_t scene_seed,
                     std::uint64_t episode_seed) {
    EpisodeSet set;
    std::vector<std::string> files;
    if (!cfg.scene_dir.empty()) files = list_scene_files(cfg.scene_dir);

    const int max_attempts = episode_count * 4 + 16;
    int attempt = 0;
    while (static_cast<int>(set.episodes.size()) < episode_count &&
           attempt < max_attempts) {
        const int i = attempt++;
        Scene scene;
        if (!files.empty()) {
            scene = load_scene(files[i % files.size()]);
        } else {
            scene = generate_scene(cfg.scene_spec,
                                   scene_seed + static_cast<std::uint64_t>(i % cfg.scene_count));
        }

        Rng rng(mix_seed(episode_seed, static_cast<std::uint64_t>(i)));
        auto classes = scene.object_classes_present();
        if (classes.empty() || scene.start_poses.empty()) {
            set.excluded_episodes++;
            continue;
        }
        EpisodeSpec spec;
        spec.target_class = classes[rng.uniform_index(classes.size())];
        spec.start = scene.start_poses[rng.uniform_index(scene.start_poses.size())];
        spec.seed = mix_seed(episode_seed, 0xe9150de5ULL + i);
        spec.episode_id = static_cast<int>(set.episodes.size());
        spec.scene = std::move(scene);

        if (!plan_ground_truth_path(spec.scene, spec.target_class, spec.start,
                                    cfg.success_radius_m)) {
            set.excluded_episodes++;
            continue;
        }
        set.episodes.push_back(std::move(spec));
    }
    return set;
}

}  // namespace

EpisodeSet build_episode_set(const RunConfig& cfg) {
    return build_set(cfg, cfg.episode_count, cfg.scene_seed, cfg.episode_seed);
}

EpisodeSet build_episode_set(const RunConfig& cfg, int episode_count,
                             std::uint64_t scene_seed, std::uint64_t episode_seed) {
    return build_set(cfg, episode_count, scene_seed, episode_seed);
}

std::vector<EpisodeResult> run_episode_set(const std::vector<EpisodeSpec>& episodes,
                                           const EpisodeConfig& cfg, int workers) {
    if (workers <= 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<int>(workers, static_cast<int>(episodes.size()));
    std::vector<EpisodeResult> results(episodes.size());
    if (episodes.empty()) return results;

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= episodes.size()) return;
            results[i] = run_episode(episodes[i], cfg);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    // Results are slot-addressed, so completion order cannot reorder them.
    return results;
}

GaussianNB train_stubborn_classifier(const std::vector<EpisodeSpec>& train_episodes,
                                     EpisodeConfig cfg) {
    cfg.strategy = default_strategy_config(StrategyKind::Stubborn);
    cfg.stubborn_nb = nullptr;  // collection mode: never raises found
    cfg.policy = PolicyKind::ShortestPath;

    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    for (const auto& spec : train_episodes) {
        std::vector<char> inside_box(
            static_cast<std::size_t>(spec.scene.width) * spec.scene.height, 0);
        for (const auto& t : spec.scene.targets) {
            if (t.class_id != spec.target_class) continue;
            for (int y = t.box.y0; y <= t.box.y1; ++y)
                for (int x = t.box.x0; x <= t.box.x1; ++x)
                    inside_box[spec.scene.index(x, y)] = 1;
        }
        auto collect = [&](int, GridMap& map, AggregationStrategy& strategy,
                           const AgentPose& pose) {
            FoundDecision cand = strategy.candidate(map, pose);
            if (cand.cx < 0) return;
            auto f = strategy.decision_features(map, cand.cx, cand.cy);
            bool real = false;
            for (auto [x, y] : strategy.rendered_component(map, cand.cx, cand.cy)) {
                if (inside_box[map.index(x, y)]) {
                    real = true;
                    break;
                }
            }
            features.push_back(std::move(f));
            labels.push_back(real ? 1 : 0);
        };
        run_episode(spec, cfg, collect);
    }

    GaussianNB nb;
    nb.fit(features, labels);
    return nb;
}

double fit_run_temperature(const NoiseModel& noise, int num_classes, int n_samples,
                           std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0xca11b7a7e0ULL));
    std::vector<Logits> logits;
    std::vector<int> labels;
    make_calibration_stream(num_classes, n_samples, noise, rng, logits, labels);
    return fit_temperature(logits, labels);
}

double evaluate_mean_success(const std::vector<EpisodeSpec>& episodes,
                             const EpisodeConfig& cfg, int workers) {
    auto results = run_episode_set(episodes, cfg, workers);
    int valid = 0, success = 0;
    for (const auto& r : results) {
        if (!r.valid) continue;
        valid++;
        success += r.success;
    }
    return valid > 0 ? static_cast<double>(success) / valid : 0.0;
}

BenchmarkOutput run_benchmark(const RunConfig& cfg) {
    EpisodeSet set = build_episode_set(cfg);
    if (set.episodes.empty()) throw std::runtime_error("run_benchmark: no valid episodes");

    double temperature;
    if (cfg.temperature) {
        temperature = *cfg.temperature;
    } else if (!cfg.temperature_logit_file.empty()) {
        LogitDataset ds = read_logit_file(cfg.temperature_logit_file);
        temperature = fit_temperature(ds.logits, ds.labels);
    } else {
        temperature = fit_run_temperature(cfg.noise, cfg.scene_spec.num_classes,
                                          cfg.fit_samples, cfg.episode_seed);
    }

    EpisodeConfig ecfg;
    ecfg.sensor = cfg.sensor;
    ecfg.noise = cfg.noise;
    ecfg.temperature = temperature;
    ecfg.max_steps = cfg.max_steps;
    ecfg.success_radius_m = cfg.success_radius_m;
    ecfg.fp_dilation_cells = cfg.fp_dilation_cells;

    BenchmarkOutput out;
    out.excluded_episodes = set.excluded_episodes;
    out.temperature = temperature;
    for (const auto& s : cfg.strategies)
        if (s.kind == StrategyKind::Stubborn) out.stubborn_trained = true;
    if (out.stubborn_trained) {
        EpisodeSet train = build_episode_set(cfg, cfg.stubborn_train_episodes,
                                             cfg.train_seed, cfg.train_seed + 1);
        out.stubborn_nb = train_stubborn_classifier(train.episodes, ecfg);
    }
    for (PolicyKind policy : cfg.policies) {
        for (const auto& strategy : cfg.strategies) {
            EpisodeConfig run_cfg = ecfg;
            run_cfg.strategy = strategy;
            run_cfg.policy = policy;
            run_cfg.stubborn_nb =
                strategy.kind == StrategyKind::Stubborn ? &out.stubborn_nb : nullptr;
            auto results = run_episode_set(set.episodes, run_cfg, cfg.workers);
            out.rows.push_back(aggregate_metrics(
                strategy.label(), policy_kind_name(policy), strategy.use_calibration,
                strategy.use_uncertainty_found, results, set.excluded_episodes));
            out.per_row_results.push_back(std::move(results));
        }
    }
    return out;
}

}  // namespace semfuse
