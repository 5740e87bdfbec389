#include "semfuse/run_config.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace semfuse {

using nlohmann::json;

namespace {

StrategyConfig strategy_from_json(const json& j) {
    StrategyConfig cfg;
    try {
        cfg = default_strategy_config(strategy_kind_from_name(j.at("kind")));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    cfg.use_calibration = j.value("use_calibration", cfg.use_calibration);
    cfg.use_uncertainty_found = j.value("use_uncertainty_found", cfg.use_uncertainty_found);
    if (j.contains("params")) {
        const json& p = j["params"];
        cfg.params.theta = p.value("theta", cfg.params.theta);
        cfg.params.min_views = p.value("min_views", cfg.params.min_views);
        cfg.params.view_distance_m = p.value("view_distance_m", cfg.params.view_distance_m);
        cfg.params.decay = p.value("decay", cfg.params.decay);
        cfg.params.score_threshold = p.value("score_threshold", cfg.params.score_threshold);
        cfg.params.erosion_m = p.value("erosion_m", cfg.params.erosion_m);
        cfg.params.rho = p.value("rho", cfg.params.rho);
        cfg.params.xi = p.value("xi", cfg.params.xi);
        cfg.params.uncertainty_clamp =
            p.value("uncertainty_clamp", cfg.params.uncertainty_clamp);
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

json strategy_to_json(const StrategyConfig& cfg) {
    return json{{"kind", strategy_kind_name(cfg.kind)},
                {"use_calibration", cfg.use_calibration},
                {"use_uncertainty_found", cfg.use_uncertainty_found},
                {"params",
                 {{"theta", cfg.params.theta},
                  {"min_views", cfg.params.min_views},
                  {"view_distance_m", cfg.params.view_distance_m},
                  {"decay", cfg.params.decay},
                  {"score_threshold", cfg.params.score_threshold},
                  {"erosion_m", cfg.params.erosion_m},
                  {"rho", cfg.params.rho},
                  {"xi", cfg.params.xi},
                  {"uncertainty_clamp", cfg.params.uncertainty_clamp}}}};
}

}  // namespace

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.strategies = {default_strategy_config(StrategyKind::GroundTruth),
                      default_strategy_config(StrategyKind::Latest),
                      default_strategy_config(StrategyKind::WeightedAveraging)};
    cfg.policies = {PolicyKind::ShortestPath};
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    try {
        if (!j.contains("version"))
            throw ConfigError("config " + path + " is missing the version field");
        if (j["version"].get<int>() != kRunConfigVersion)
            throw ConfigError("config " + path + " has unsupported version");

        RunConfig cfg;
        if (j.contains("scenes")) {
            const json& s = j["scenes"];
            cfg.scene_dir = s.value("dir", cfg.scene_dir);
            cfg.scene_count = s.value("count", cfg.scene_count);
            cfg.scene_seed = s.value("seed", cfg.scene_seed);
            cfg.scene_spec.width = s.value("width", cfg.scene_spec.width);
            cfg.scene_spec.height = s.value("height", cfg.scene_spec.height);
            cfg.scene_spec.resolution = s.value("resolution", cfg.scene_spec.resolution);
            cfg.scene_spec.num_classes = s.value("classes", cfg.scene_spec.num_classes);
            cfg.scene_spec.object_density =
                s.value("object_density", cfg.scene_spec.object_density);
        }
        if (j.contains("episodes")) {
            const json& e = j["episodes"];
            cfg.episode_count = e.value("count", cfg.episode_count);
            cfg.episode_seed = e.value("seed", cfg.episode_seed);
            cfg.max_steps = e.value("max_steps", cfg.max_steps);
            cfg.success_radius_m = e.value("success_radius_m", cfg.success_radius_m);
            cfg.fp_dilation_cells = e.value("fp_dilation_cells", cfg.fp_dilation_cells);
        }
        if (j.contains("noise")) {
            const json& n = j["noise"];
            cfg.noise.base_error = n.value("base_error", cfg.noise.base_error);
            cfg.noise.distance_error_slope =
                n.value("distance_error_slope", cfg.noise.distance_error_slope);
            cfg.noise.true_confidence =
                n.value("true_confidence", cfg.noise.true_confidence);
            cfg.noise.overconfidence_factor =
                n.value("overconfidence_factor", cfg.noise.overconfidence_factor);
            cfg.noise.max_range_m = n.value("max_range_m", cfg.noise.max_range_m);
        }
        if (j.contains("sensor")) {
            const json& s = j["sensor"];
            cfg.sensor.fov_rad = s.value("fov_deg", 90.0) * M_PI / 180.0;
            cfg.sensor.n_rays = s.value("rays", cfg.sensor.n_rays);
            cfg.sensor.max_range_m = s.value("max_range_m", cfg.sensor.max_range_m);
        }
        if (j.contains("temperature")) {
            const json& t = j["temperature"];
            if (t.contains("value") && !t["value"].is_null())
                cfg.temperature = t["value"].get<double>();
            cfg.temperature_logit_file = t.value("logit_file", cfg.temperature_logit_file);
            cfg.fit_samples = t.value("fit_samples", cfg.fit_samples);
        }
        if (j.contains("strategies")) {
            cfg.strategies.clear();
            for (const json& s : j["strategies"]) cfg.strategies.push_back(strategy_from_json(s));
        } else {
            cfg.strategies = default_run_config().strategies;
        }
        if (j.contains("policies")) {
            cfg.policies.clear();
            for (const json& p : j["policies"])
                cfg.policies.push_back(policy_kind_from_name(p.get<std::string>()));
        } else {
            cfg.policies = {PolicyKind::ShortestPath};
        }
        if (j.contains("stubborn")) {
            cfg.stubborn_train_episodes =
                j["stubborn"].value("train_episodes", cfg.stubborn_train_episodes);
            cfg.train_seed = j["stubborn"].value("train_seed", cfg.train_seed);
        }
        cfg.workers = j.value("workers", cfg.workers);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);

        if (cfg.episode_count < 1) throw ConfigError("episodes.count must be >= 1");
        if (cfg.noise.base_error + cfg.noise.distance_error_slope > 1.0)
            throw ConfigError("noise: base_error + distance_error_slope must be <= 1");
        if (cfg.strategies.empty()) throw ConfigError("no strategies configured");
        if (cfg.policies.empty()) throw ConfigError("no policies configured");
        // Referenced files must exist at load time, not at first use.
        if (!cfg.scene_dir.empty() && !std::filesystem::is_directory(cfg.scene_dir))
            throw ConfigError("scenes.dir does not exist: " + cfg.scene_dir);
        if (!cfg.temperature_logit_file.empty() &&
            !std::filesystem::is_regular_file(cfg.temperature_logit_file))
            throw ConfigError("temperature.logit_file does not exist: " +
                              cfg.temperature_logit_file);
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError("config error in " + path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
    json j;
    j["version"] = kRunConfigVersion;
    j["scenes"] = {{"dir", cfg.scene_dir},
                   {"count", cfg.scene_count},
                   {"seed", cfg.scene_seed},
                   {"width", cfg.scene_spec.width},
                   {"height", cfg.scene_spec.height},
                   {"resolution", cfg.scene_spec.resolution},
                   {"classes", cfg.scene_spec.num_classes},
                   {"object_density", cfg.scene_spec.object_density}};
    j["episodes"] = {{"count", cfg.episode_count},
                     {"seed", cfg.episode_seed},
                     {"max_steps", cfg.max_steps},
                     {"success_radius_m", cfg.success_radius_m},
                     {"fp_dilation_cells", cfg.fp_dilation_cells}};
    j["noise"] = {{"base_error", cfg.noise.base_error},
                  {"distance_error_slope", cfg.noise.distance_error_slope},
                  {"true_confidence", cfg.noise.true_confidence},
                  {"overconfidence_factor", cfg.noise.overconfidence_factor},
                  {"max_range_m", cfg.noise.max_range_m}};
    j["sensor"] = {{"fov_deg", cfg.sensor.fov_rad * 180.0 / M_PI},
                   {"rays", cfg.sensor.n_rays},
                   {"max_range_m", cfg.sensor.max_range_m}};
    j["temperature"] = {{"value", cfg.temperature ? json(*cfg.temperature) : json(nullptr)},
                        {"logit_file", cfg.temperature_logit_file},
                        {"fit_samples", cfg.fit_samples}};
    j["strategies"] = json::array();
    for (const auto& s : cfg.strategies) j["strategies"].push_back(strategy_to_json(s));
    j["policies"] = json::array();
    for (PolicyKind p : cfg.policies) j["policies"].push_back(policy_kind_name(p));
    j["stubborn"] = {{"train_episodes", cfg.stubborn_train_episodes},
                     {"train_seed", cfg.train_seed}};
    j["workers"] = cfg.workers;
    j["output_dir"] = cfg.output_dir;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_run_config: cannot open " + path);
    out << j.dump(2) << "\n";
}

std::string episode_result_to_json(const EpisodeResult& r, const std::string& strategy,
                                   const std::string& policy) {
    json j{{"episode_id", r.episode_id},
           {"strategy", strategy},
           {"policy", policy},
           {"valid", r.valid},
           {"success", r.success},
           {"found_fp", r.found_fp},
           {"found_fn", r.found_fn},
           {"det_fp_count", r.det_fp_count},
           {"det_fn_count", r.det_fn_count},
           {"steps_used", r.steps_used},
           {"path_length_m", r.path_length_m},
           {"shortest_length_m", r.shortest_length_m},
           {"found_step", r.found_step},
           {"found_cx", r.found_cx},
           {"found_cy", r.found_cy},
           {"obs_stream_hash", r.obs_stream_hash}};
    return j.dump();
}

void append_results_jsonl(const std::string& path,
                          const std::vector<EpisodeResult>& results,
                          const std::string& strategy, const std::string& policy) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("append_results_jsonl: cannot open " + path);
    for (const auto& r : results)
        out << episode_result_to_json(r, strategy, policy) << "\n";
}

std::vector<ResultRecord> read_results_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_results_jsonl: cannot open " + path);
    std::vector<ResultRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("read_results_jsonl: bad record in " + path + ": " +
                                     e.what());
        }
        ResultRecord rec;
        rec.strategy = j.value("strategy", "");
        rec.policy = j.value("policy", "");
        rec.result.episode_id = j.value("episode_id", 0);
        rec.result.valid = j.value("valid", false);
        rec.result.success = j.value("success", false);
        rec.result.found_fp = j.value("found_fp", false);
        rec.result.found_fn = j.value("found_fn", false);
        rec.result.det_fp_count = j.value("det_fp_count", 0);
        rec.result.det_fn_count = j.value("det_fn_count", 0);
        rec.result.steps_used = j.value("steps_used", 0);
        rec.result.path_length_m = j.value("path_length_m", 0.0);
        rec.result.shortest_length_m = j.value("shortest_length_m", 0.0);
        rec.result.found_step = j.value("found_step", -1);
        rec.result.found_cx = j.value("found_cx", -1);
        rec.result.found_cy = j.value("found_cy", -1);
        rec.result.obs_stream_hash = j.value("obs_stream_hash", 0ULL);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace semfuse
