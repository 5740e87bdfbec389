#include <cmath>

#include "doctest.h"
#include "semfuse/hyperopt.hpp"

using namespace semfuse;

TEST_CASE("random search basics") {
    ParamSpace space;
    space.params.push_back({"xi", ParamDef::Kind::Real, 0.05, 0.95, false});

    SUBCASE("budget of one returns that single sample") {
        auto result = random_search(space, 1, [](const auto&) { return 0.5; }, 3);
        CHECK(result.trials.size() == 1);
        CHECK(result.best_trial == 0);
        CHECK(result.best_params.count("xi") == 1);
        CHECK(result.best_params.at("xi") == result.trials[0].params.at("xi"));
    }

    SUBCASE("a synthetic objective peaks near its optimum") {
        auto objective = [](const std::map<std::string, double>& p) {
            return 1.0 - std::abs(p.at("xi") - 0.4);
        };
        auto result = random_search(space, 200, objective, 17);
        CHECK(std::abs(result.best_params.at("xi") - 0.4) < 0.05);
        // The winner is one of the sampled trials, not an extrapolation.
        bool member = false;
        for (const auto& t : result.trials)
            member |= (t.params.at("xi") == result.best_params.at("xi"));
        CHECK(member);
    }

    SUBCASE("identical seeds give identical trial logs") {
        auto objective = [](const std::map<std::string, double>& p) {
            return p.at("xi");
        };
        auto a = random_search(space, 20, objective, 5);
        auto b = random_search(space, 20, objective, 5);
        REQUIRE(a.trials.size() == b.trials.size());
        for (std::size_t i = 0; i < a.trials.size(); ++i) {
            CHECK(a.trials[i].params.at("xi") == b.trials[i].params.at("xi"));
            CHECK(a.trials[i].objective == b.trials[i].objective);
        }
        CHECK(format_trial_log(a) == format_trial_log(b));
    }

    SUBCASE("ties keep the earliest trial") {
        auto result = random_search(space, 10, [](const auto&) { return 1.0; }, 3);
        CHECK(result.best_trial == 0);
    }

    SUBCASE("every trial carries the shared evaluation seeds") {
        std::vector<std::uint64_t> seeds{11, 22, 33};
        auto result =
            random_search(space, 5, [](const auto&) { return 0.0; }, 3, seeds);
        for (const auto& t : result.trials) CHECK(t.episode_seeds == seeds);
    }

    SUBCASE("empty space and bad budget are rejected") {
        CHECK_THROWS_AS(random_search({}, 5, [](const auto&) { return 0.0; }, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(random_search(space, 0, [](const auto&) { return 0.0; }, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("integer and log-scaled parameters") {
    ParamSpace space;
    space.params.push_back({"min_views", ParamDef::Kind::Int, 1, 8, false});
    space.params.push_back({"scale", ParamDef::Kind::Real, 1e-3, 1.0, true});
    auto result = random_search(space, 50, [](const auto&) { return 0.0; }, 9);
    for (const auto& t : result.trials) {
        double v = t.params.at("min_views");
        CHECK(v == std::floor(v));
        CHECK(v >= 1.0);
        CHECK(v <= 8.0);
        CHECK(t.params.at("scale") >= 1e-3);
        CHECK(t.params.at("scale") <= 1.0);
    }
}

TEST_CASE("parameter spaces per strategy kind") {
    CHECK(default_param_space(StrategyKind::Latest).params.empty());
    CHECK(default_param_space(StrategyKind::GroundTruth).params.empty());
    CHECK(default_param_space(StrategyKind::Stubborn).params.empty());
    CHECK(default_param_space(StrategyKind::HitsViews).params.size() == 3);
    CHECK(default_param_space(StrategyKind::WeightedAveraging).params.size() == 1);

    // Unit-interval parameters stay inside (0, 1).
    for (StrategyKind kind : {StrategyKind::LatestFiltered, StrategyKind::LogOdds,
                              StrategyKind::Averaging, StrategyKind::WeightedAveraging}) {
        for (const auto& p : default_param_space(kind).params) {
            CHECK(p.lo > 0.0);
            CHECK(p.hi < 1.0);
        }
    }
}

TEST_CASE("apply_params writes into the config") {
    StrategyConfig cfg = default_strategy_config(StrategyKind::HitsViews);
    apply_params(cfg, {{"theta", 0.75}, {"min_views", 4.0}, {"view_distance_m", 1.5}});
    CHECK(cfg.params.theta == 0.75);
    CHECK(cfg.params.min_views == 4);
    CHECK(cfg.params.view_distance_m == 1.5);
    CHECK_THROWS_AS(apply_params(cfg, {{"nope", 1.0}}), std::invalid_argument);
}
