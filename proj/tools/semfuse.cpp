// semfuse: scene generation, calibration, benchmark runs, hyperparameter
// search, reporting and map export for the semantic-fusion testbed.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"

#include "semfuse/calibration.hpp"
#include "semfuse/logit_file.hpp"
#include "semfuse/map_export.hpp"
#include "semfuse/metrics.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/run_config.hpp"
#include "semfuse/runner.hpp"

namespace fs = std::filesystem;
using namespace semfuse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

std::uint64_t env_seed_fallback(std::uint64_t fallback) {
    if (const char* env = std::getenv("SEMFUSE_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw ConfigError("SEMFUSE_SEED is not a valid integer");
        }
    }
    return fallback;
}

struct GenScenesArgs {
    int count = 5;
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string out_dir = "scenes";
    SceneSpec spec;
};

int cmd_gen_scenes(const GenScenesArgs& args) {
    std::uint64_t seed = args.seed_given ? args.seed : env_seed_fallback(args.seed);
    fs::create_directories(args.out_dir);
    for (int i = 0; i < args.count; ++i) {
        Scene scene = generate_scene(args.spec, seed + static_cast<std::uint64_t>(i));
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%04d.scene", i);
        save_scene(scene, (fs::path(args.out_dir) / name).string());
    }
    std::cout << "wrote " << args.count << " scenes to " << args.out_dir << "\n";
    return kExitOk;
}

struct CalibrateArgs {
    std::string logits_file;
    int simulate = 0;
    double overconfidence = 3.0;
    int classes = 6;
    int bins = 10;
    std::uint64_t seed = 7;
    bool seed_given = false;
};

void print_reliability(const CalibrationReport& report) {
    std::cout << "bin  prob_conf  prob_acc  prob_n   unc_conf  unc_acc   unc_n\n";
    for (int b = 0; b < report.n_bins; ++b) {
        const auto& p = report.prob_bins[b];
        const auto& u = report.unc_bins[b];
        std::printf("%3d  %9.4f  %8.4f  %6zu  %9.4f  %8.4f  %6zu\n", b,
                    p.confidence_mean, p.accuracy, p.count, u.confidence_mean,
                    u.accuracy, u.count);
    }
}

int cmd_calibrate(const CalibrateArgs& args) {
    std::vector<Logits> logits;
    std::vector<int> labels;
    if (!args.logits_file.empty()) {
        LogitDataset ds = read_logit_file(args.logits_file);
        logits = std::move(ds.logits);
        labels = std::move(ds.labels);
    } else {
        int n = args.simulate > 0 ? args.simulate : 5000;
        NoiseModel noise;
        noise.overconfidence_factor = args.overconfidence;
        std::uint64_t seed = args.seed_given ? args.seed : env_seed_fallback(args.seed);
        Rng rng(mix_seed(seed, 0xca1ULL));
        make_calibration_stream(args.classes, n, noise, rng, logits, labels);
    }

    double t = fit_temperature(logits, labels);
    std::vector<ProbVector> before(logits.size()), after(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        before[i] = softmax(logits[i]);
        after[i] = softmax(scale_logits(logits[i], t));
    }
    CalibrationReport pre = reliability_diagram(before, labels, args.bins);
    CalibrationReport post = reliability_diagram(after, labels, args.bins);

    std::printf("fitted temperature: %.4f\n", t);
    std::printf("ECE  before: %.4f  after: %.4f\n", pre.ece, post.ece);
    std::printf("uECE before: %.4f  after: %.4f\n", pre.uece, post.uece);
    std::cout << "reliability (after scaling):\n";
    print_reliability(post);
    return kExitOk;
}

struct RunArgs {
    std::string config_file;
    std::string out_dir;
    int workers = -1;
    std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& args) {
    RunConfig cfg = args.config_file.empty() ? default_run_config()
                                             : load_run_config(args.config_file);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.workers >= 0) cfg.workers = args.workers;
    if (args.seed) {
        cfg.scene_seed = *args.seed;
        cfg.episode_seed = mix_seed(*args.seed, 1);
    }

    fs::create_directories(cfg.output_dir);
    BenchmarkOutput out = run_benchmark(cfg);

    fs::path results_path = fs::path(cfg.output_dir) / "results.jsonl";
    std::ofstream(results_path.string(), std::ios::trunc).close();
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        append_results_jsonl(results_path.string(), out.per_row_results[i],
                             out.rows[i].strategy, out.rows[i].policy);
    }
    std::string table = format_metrics_table(out.rows);
    std::string csv = format_metrics_csv(out.rows);
    std::ofstream((fs::path(cfg.output_dir) / "metrics.txt").string()) << table;
    std::ofstream((fs::path(cfg.output_dir) / "metrics.csv").string()) << csv;
    save_run_config(cfg, (fs::path(cfg.output_dir) / "run_config.json").string());
    if (out.stubborn_trained)
        out.stubborn_nb.save((fs::path(cfg.output_dir) / "stubborn_nb.txt").string());
    if (out.excluded_episodes > 0)
        std::cerr << "warning: excluded " << out.excluded_episodes
                  << " episodes with unreachable targets\n";

    std::cout << table;
    std::cout << "results: " << results_path.string() << "\n";
    return kExitOk;
}

struct HyperoptArgs {
    std::string strategy = "weighted_averaging";
    int budget = 20;
    int episodes = 30;
    std::uint64_t seed = 11;
    bool seed_given = false;
    std::string config_file;
    std::string out_file;
    int workers = -1;
};

int cmd_hyperopt(const HyperoptArgs& args) {
    RunConfig cfg = args.config_file.empty() ? default_run_config()
                                             : load_run_config(args.config_file);
    if (args.workers >= 0) cfg.workers = args.workers;
    StrategyKind kind;
    try {
        kind = strategy_kind_from_name(args.strategy);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    ParamSpace space = default_param_space(kind);
    if (space.params.empty())
        throw ConfigError("strategy '" + args.strategy + "' has no tunable parameters");

    std::uint64_t seed = args.seed_given ? args.seed : env_seed_fallback(args.seed);

    // Training scenes come from a seed range disjoint from evaluation.
    EpisodeSet train = build_episode_set(cfg, args.episodes, cfg.train_seed + 100,
                                         cfg.train_seed + 200);
    if (train.episodes.empty()) throw std::runtime_error("no valid training episodes");

    EpisodeConfig ecfg;
    ecfg.sensor = cfg.sensor;
    ecfg.noise = cfg.noise;
    ecfg.temperature = fit_run_temperature(cfg.noise, cfg.scene_spec.num_classes,
                                           cfg.fit_samples, seed);
    ecfg.max_steps = cfg.max_steps;
    ecfg.success_radius_m = cfg.success_radius_m;
    ecfg.policy = PolicyKind::ShortestPath;

    GaussianNB stubborn_nb;
    if (kind == StrategyKind::Stubborn) {
        EpisodeSet nb_train = build_episode_set(cfg, cfg.stubborn_train_episodes,
                                                cfg.train_seed, cfg.train_seed + 1);
        stubborn_nb = train_stubborn_classifier(nb_train.episodes, ecfg);
    }

    auto objective = [&](const std::map<std::string, double>& params) {
        EpisodeConfig trial_cfg = ecfg;
        trial_cfg.strategy = default_strategy_config(kind);
        apply_params(trial_cfg.strategy, params);
        trial_cfg.stubborn_nb = kind == StrategyKind::Stubborn ? &stubborn_nb : nullptr;
        return evaluate_mean_success(train.episodes, trial_cfg, cfg.workers);
    };

    std::vector<std::uint64_t> episode_seeds;
    for (const auto& spec : train.episodes) episode_seeds.push_back(spec.seed);
    SearchResult result = random_search(space, args.budget, objective, seed, episode_seeds);
    std::cout << format_trial_log(result);
    for (const auto& [name, value] : result.best_params)
        std::printf("best %s = %.6g\n", name.c_str(), value);

    if (!args.out_file.empty()) {
        StrategyConfig best = default_strategy_config(kind);
        apply_params(best, result.best_params);
        RunConfig out_cfg = cfg;
        out_cfg.strategies = {best};
        save_run_config(out_cfg, args.out_file);
        std::cout << "best params written to " << args.out_file << "\n";
    }
    return kExitOk;
}

struct ReportArgs {
    std::vector<std::string> results_files;
    std::string csv_out;
};

int cmd_report(const ReportArgs& args) {
    std::vector<MetricsRow> rows;
    for (const auto& path : args.results_files) {
        auto records = read_results_jsonl(path);
        if (records.empty()) throw std::runtime_error("no records in " + path);
        // Group by (strategy, policy).
        std::map<std::pair<std::string, std::string>, std::vector<EpisodeResult>> groups;
        for (const auto& rec : records)
            groups[{rec.strategy, rec.policy}].push_back(rec.result);
        for (const auto& [key, results] : groups) {
            rows.push_back(
                aggregate_metrics(key.first, key.second, false, false, results));
        }
    }
    if (rows.empty()) throw std::runtime_error("report: no rows");

    std::cout << format_metrics_table(rows);

    // Ablation deltas: rows sharing a kind but differing in flags.
    std::cout << "\ndeltas vs first row:\n";
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::printf("%-28s dSR %+6.1f  dFPR %+6.1f  dFNR %+6.1f\n",
                    rows[i].strategy.c_str(), rows[i].sr - rows[0].sr,
                    rows[i].fpr - rows[0].fpr, rows[i].fnr - rows[0].fnr);
    }
    if (!args.csv_out.empty()) {
        std::ofstream out(args.csv_out);
        if (!out) throw std::runtime_error("cannot open " + args.csv_out);
        out << format_metrics_csv(rows);
    }
    return kExitOk;
}

struct ExportMapArgs {
    std::string config_file;
    int episode_id = 0;
    std::string strategy;
    std::string out_prefix = "map";
};

int cmd_export_map(const ExportMapArgs& args) {
    RunConfig cfg = args.config_file.empty() ? default_run_config()
                                             : load_run_config(args.config_file);
    EpisodeSet set = build_episode_set(cfg);
    const EpisodeSpec* spec = nullptr;
    for (const auto& e : set.episodes)
        if (e.episode_id == args.episode_id) spec = &e;
    if (!spec)
        throw std::runtime_error("episode id " + std::to_string(args.episode_id) +
                                 " not in the configured set");

    EpisodeConfig ecfg;
    ecfg.sensor = cfg.sensor;
    ecfg.noise = cfg.noise;
    ecfg.max_steps = cfg.max_steps;
    ecfg.success_radius_m = cfg.success_radius_m;
    if (!args.strategy.empty()) {
        try {
            ecfg.strategy = default_strategy_config(strategy_kind_from_name(args.strategy));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else if (!cfg.strategies.empty()) {
        ecfg.strategy = cfg.strategies.front();
    }
    if (ecfg.strategy.kind == StrategyKind::Stubborn)
        throw ConfigError("export-map: stubborn needs a trained classifier; use run");
    ecfg.temperature = cfg.temperature
                           ? *cfg.temperature
                           : fit_run_temperature(cfg.noise, cfg.scene_spec.num_classes,
                                                 cfg.fit_samples, cfg.episode_seed);

    GridMap map(1, 1, 1.0, 2);
    run_episode(*spec, ecfg, nullptr, &map);
    export_map(map, spec->target_class, args.out_prefix);
    std::cout << "wrote " << args.out_prefix << "_{class,uncertainty,target}.pgm\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uncertainty-aware semantic fusion benchmark for object search"};
    app.require_subcommand(1);

    GenScenesArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-scenes", "generate synthetic scenes");
    gen_cmd->add_option("--count", gen.count, "number of scenes")->check(CLI::PositiveNumber);
    auto* gen_seed = gen_cmd->add_option("--seed", gen.seed, "base seed");
    gen_cmd->add_option("--out", gen.out_dir, "output directory");
    gen_cmd->add_option("--width", gen.spec.width, "grid width in cells");
    gen_cmd->add_option("--height", gen.spec.height, "grid height in cells");
    gen_cmd->add_option("--classes", gen.spec.num_classes, "semantic class count");
    gen_cmd->add_option("--resolution", gen.spec.resolution, "meters per cell");
    gen_cmd->add_option("--density", gen.spec.object_density, "object density");

    CalibrateArgs cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "fit a temperature and report ECE/uECE");
    cal_cmd->add_option("--logits", cal.logits_file, "SFLG logit dataset file");
    cal_cmd->add_option("--simulate", cal.simulate, "simulate N labeled samples");
    cal_cmd->add_option("--k", cal.overconfidence, "overconfidence factor for simulation");
    cal_cmd->add_option("--classes", cal.classes, "class count for simulation");
    cal_cmd->add_option("--bins", cal.bins, "reliability bins")->check(CLI::PositiveNumber);
    auto* cal_seed = cal_cmd->add_option("--seed", cal.seed, "seed");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run the benchmark matrix");
    run_cmd->add_option("--config", run.config_file, "run configuration JSON");
    run_cmd->add_option("--out", run.out_dir, "output directory override");
    run_cmd->add_option("--workers", run.workers, "parallel episode workers");
    std::uint64_t run_seed_value = 0;
    auto* run_seed = run_cmd->add_option("--seed", run_seed_value, "seed override");

    HyperoptArgs hyper;
    auto* hyper_cmd = app.add_subcommand("hyperopt", "random search over strategy parameters");
    hyper_cmd->add_option("--strategy", hyper.strategy, "strategy kind")->required();
    hyper_cmd->add_option("--budget", hyper.budget, "number of trials")->check(CLI::PositiveNumber);
    hyper_cmd->add_option("--episodes", hyper.episodes, "training episodes per trial");
    auto* hyper_seed = hyper_cmd->add_option("--seed", hyper.seed, "seed");
    hyper_cmd->add_option("--config", hyper.config_file, "run configuration JSON");
    hyper_cmd->add_option("--out", hyper.out_file, "write best params as a config file");
    hyper_cmd->add_option("--workers", hyper.workers, "parallel episode workers");

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "aggregate result files into tables");
    report_cmd->add_option("--results", report.results_files, "results.jsonl files")
        ->required()
        ->expected(-1);
    report_cmd->add_option("--csv", report.csv_out, "also write CSV here");

    ExportMapArgs exp;
    auto* exp_cmd = app.add_subcommand("export-map", "re-run one episode and export its maps");
    exp_cmd->add_option("--config", exp.config_file, "run configuration JSON");
    exp_cmd->add_option("--episode", exp.episode_id, "episode id");
    exp_cmd->add_option("--strategy", exp.strategy, "strategy kind override");
    exp_cmd->add_option("--out", exp.out_prefix, "output file prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        gen.seed_given = gen_seed->count() > 0;
        cal.seed_given = cal_seed->count() > 0;
        hyper.seed_given = hyper_seed->count() > 0;
        if (run_seed->count() > 0) run.seed = run_seed_value;

        if (gen_cmd->parsed()) return cmd_gen_scenes(gen);
        if (cal_cmd->parsed()) return cmd_calibrate(cal);
        if (run_cmd->parsed()) return cmd_run(run);
        if (hyper_cmd->parsed()) return cmd_hyperopt(hyper);
        if (report_cmd->parsed()) return cmd_report(report);
        if (exp_cmd->parsed()) return cmd_export_map(exp);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
