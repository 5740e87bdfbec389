#include <cmath>

#include "doctest.h"
#include "semfuse/strategies.hpp"

using namespace semfuse;

namespace {

// Map layout used throughout: 12x12 cells at 0.25 m, 4 classes
// (floor, wall, chair=2, table=3).
constexpr int kChair = 2;
constexpr int kTable = 3;

GridMap make_map() { return GridMap(12, 12, 0.25, 4); }

ProjectedHit hit(int cx, int cy, ProbVector p, double height = 0.5,
                 double distance = 0.5) {
    ProjectedHit h;
    h.cx = cx;
    h.cy = cy;
    h.u = normalized_entropy(p);
    h.p_pred = std::move(p);
    h.height_m = height;
    h.distance_m = distance;
    return h;
}

ProjectedHit hit_u(int cx, int cy, ProbVector p, double u) {
    ProjectedHit h = hit(cx, cy, std::move(p));
    h.u = u;
    return h;
}

AgentPose near_cell(const GridMap& map, int cx, int cy, double offset = 0.5) {
    return {map.cell_center_x(cx) - offset, map.cell_center_y(cy), 0.0};
}

ProbVector confident(int cls, double conf = 0.9, int c = 4) {
    ProbVector p(c, (1.0 - conf) / (c - 1));
    p[cls] = conf;
    return p;
}

}  // namespace

TEST_CASE("strategy config validation") {
    StrategyConfig cfg = default_strategy_config(StrategyKind::WeightedAveraging);
    cfg.params.xi = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.params.xi = 0.4;
    CHECK_NOTHROW(cfg.validate());

    StrategyConfig hv = default_strategy_config(StrategyKind::HitsViews);
    hv.params.min_views = 0;
    CHECK_THROWS_AS(hv.validate(), std::invalid_argument);

    CHECK_THROWS_AS(strategy_kind_from_name("bogus"), std::invalid_argument);
    CHECK(strategy_kind_from_name("logodds") == StrategyKind::LogOdds);
}

TEST_CASE("latest overwrites previous values") {
    GridMap map = make_map();
    auto s = make_strategy(default_strategy_config(StrategyKind::Latest), kChair, 1.0);
    s->integrate(map, {hit(5, 5, confident(kChair))}, {});
    CHECK(map.rendered_class(5, 5) == kChair);
    s->integrate(map, {hit(5, 5, confident(kTable))}, {});
    CHECK(map.rendered_class(5, 5) == kTable);
    CHECK(argmax(map.cell(5, 5).p) == kTable);
}

TEST_CASE("latest fires on a single confident false positive") {
    GridMap map = make_map();
    auto s = make_strategy(default_strategy_config(StrategyKind::Latest), kChair, 1.0);
    s->integrate(map, {hit(5, 5, confident(kChair))}, {});
    FoundDecision d = s->decide_found(map, near_cell(map, 5, 5));
    CHECK(d.found);
    CHECK(d.reason == FoundReason::distance_only);
    CHECK(d.cx == 5);

    // Out of the 1 m gate: no decision.
    FoundDecision far = s->decide_found(map, near_cell(map, 5, 5, 2.0));
    CHECK(!far.found);
}

TEST_CASE("latest with nothing mapped reports none") {
    GridMap map = make_map();
    auto s = make_strategy(default_strategy_config(StrategyKind::Latest), kChair, 1.0);
    FoundDecision d = s->decide_found(map, near_cell(map, 5, 5));
    CHECK(!d.found);
    CHECK(d.reason == FoundReason::none);
    CHECK(d.cx == -1);
}

TEST_CASE("hits/views ratio rule") {
    StrategyConfig cfg = default_strategy_config(StrategyKind::HitsViews);
    cfg.params.theta = 0.9;
    cfg.params.min_views = 3;
    cfg.params.view_distance_m = 2.0;

    SUBCASE("three hits in three views raises found") {
        GridMap map = make_map();
        auto s = make_strategy(cfg, kChair, 1.0);
        for (int i = 0; i < 3; ++i)
            s->integrate(map, {hit(5, 5, confident(kChair))}, {});
        FoundDecision d = s->decide_found(map, near_cell(map, 5, 5));
        CHECK(d.found);
    }

    SUBCASE("one hit in three views rejects the cell for good") {
        GridMap map = make_map();
        auto s = make_strategy(cfg, kChair, 1.0);
        s->integrate(map, {hit(5, 5, confident(kTable))}, {});
        s->integrate(map, {hit(5, 5, confident(kTable))}, {});
        s->integrate(map, {hit(5, 5, confident(kChair))}, {});  // now shown as target
        FoundDecision d = s->decide_found(map, near_cell(map, 5, 5));
        CHECK(!d.found);
        CHECK(map.rendered_class(5, 5) == kWallClass);  // stop mapping the target

        // The cell never shows the target again, however confident.
        for (int i = 0; i < 5; ++i)
            s->integrate(map, {hit(5, 5, confident(kChair, 0.99))}, {});
        CHECK(map.rendered_class(5, 5) != kChair);
        CHECK(!s->decide_found(map, near_cell(map, 5, 5)).found);
    }

    SUBCASE("two views stay undecided") {
        GridMap map = make_map();
        auto s = make_strategy(cfg, kChair, 1.0);
        s->integrate(map, {hit(5, 5, confident(kChair))}, {});
        s->integrate(map, {hit(5, 5, confident(kChair))}, {});
        FoundDecision d = s->decide_found(map, near_cell(map, 5, 5));
        CHECK(!d.found);
        CHECK(map.rendered_class(5, 5) == kChair);  // keeps mapping
    }
}

TEST_CASE("skillfusion erosion and decay") {
    StrategyConfig cfg = default_strategy_config(StrategyKind::SkillFusion);
    cfg.params.decay = 0.5;
    cfg.params.score_threshold = 2.0;
    cfg.params.erosion_m = 0.5;  // 2 cells at 0.25 m

    SUBCASE("isolated single-cell detection is erased by erosion") {
        GridMap map = make_map();
        auto s = make_strategy(cfg, kChair, 1.0);
        s->integrate(map, {hit(5, 5, confident(kChair))}, {});
        CHECK(map.rendered_class(5, 5) == kWallClass);  // outlier removed
        CHECK(!s->decide_found(map, near_cell(map, 5, 5)).found);
    }

    SUBCASE("a 2x2 block accumulates score and fires once above threshold") {
        GridMap map = make_map();
        auto s = make_strategy(cfg, kChair, 1.0);
        auto block = [&]() {
            return std::vector<ProjectedHit>{
                hit(5, 5, confident(kChair)), hit(6, 5, confident(kChair)),
                hit(5, 6, confident(kChair)), hit(6, 6, confident(kChair))};
        };
        s->integrate(map, block(), {});
        CHECK(!s->decide_found(map, near_cell(map, 5, 5)).found);  // score 1
        s->integrate(map, block(), {});
        CHECK(!s->decide_found(map, near_cell(map, 5, 5)).found);  // score 2, not > T
        s->integrate(map, block(), {});
        CHECK(s->decide_found(map, near_cell(map, 5, 5)).found);  // score 3 > 2
    }

    SUBCASE("misses decay the score geometrically") {
        StrategyConfig slow = cfg;
        slow.params.decay = 0.9;
        GridMap map = make_map();
        auto s = make_strategy(slow, kChair, 1.0);
        auto block = [&]() {
            return std::vector<ProjectedHit>{
                hit(5, 5, confident(kChair)), hit(6, 5, confident(kChair)),
                hit(5, 6, confident(kChair)), hit(6, 6, confident(kChair))};
        };
        for (int i = 0; i < 4; ++i) s->integrate(map, block(), {});
        CHECK(map.rendered_class(5, 5) == kChair);  // score 4 > 2
        // Misses: the frame shows floor, the score decays as 4 * 0.9^m and
        // the goal stays mapped exactly while 4 * 0.9^m > 2 (m <= 6).
        auto miss = [&]() {
            return std::vector<ProjectedHit>{
                hit(5, 5, confident(0)), hit(6, 5, confident(0)),
                hit(5, 6, confident(0)), hit(6, 6, confident(0))};
        };
        for (int m = 1; m <= 6; ++m) {
            s->integrate(map, miss(), {});
            CHECK(map.rendered_class(5, 5) == kChair);
        }
        s->integrate(map, miss(), {});  // m = 7: 4 * 0.9^7 = 1.91 <= 2
        CHECK(map.rendered_class(5, 5) != kChair);
    }
}

TEST_CASE("skillfusion integrate overload ignores pose") {
    // integrate() takes the pose for interface uniformity only.
    GridMap map = make_map();
    StrategyConfig cfg = default_strategy_config(StrategyKind::SkillFusion);
    auto s = make_strategy(cfg, kChair, 1.0);
    s->integrate(map, {hit(3, 3, confident(0))}, AgentPose{1.0, 1.0, 0.5});
    CHECK(map.observed(3, 3));
}

TEST_CASE("stubborn naive Bayes decision") {
    SUBCASE("separable features train to perfect accuracy") {
        std::vector<std::vector<double>> x;
        std::vector<int> y;
        for (int i = 0; i < 20; ++i) {
            x.push_back({10.0 + i, 5.0, 0.9, 0.3});
            y.push_back(1);
            x.push_back({1.0 + i % 3, 0.5, 0.4, 0.8});
            y.push_back(0);
        }
        GaussianNB nb;
        nb.fit(x, y);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(static_cast<int>(nb.predict(x[i])) == y[i]);
    }

    SUBCASE("posterior matches the hand-computed Bayes rule") {
        // Two one-feature points: class 0 at 0, class 1 at 2, shared
        // variance floor.
        GaussianNB nb;
        nb.fit({{0.0}, {2.0}}, {0, 1});
        const double var = kNbVarianceFloor;
        const double x = 1.2;
        auto log_gauss = [&](double mean) {
            return -0.5 * (std::log(2.0 * M_PI * var) + (x - mean) * (x - mean) / var);
        };
        double expected = (std::log(0.5) + log_gauss(2.0)) - (std::log(0.5) + log_gauss(0.0));
        CHECK(nb.log_posterior_ratio({x}) == doctest::Approx(expected).epsilon(1e-9));
        CHECK(nb.predict({x}));
        CHECK(!nb.predict({0.4}));
    }

    SUBCASE("empty training set throws") {
        GaussianNB nb;
        CHECK_THROWS_AS(nb.fit({}, {}), std::invalid_argument);
    }

    SUBCASE("strategy consults the classifier within the gate") {
        GridMap map = make_map();
        GaussianNB nb;
        // Features: views, cumulative conf, max conf, max other conf.
        nb.fit({{5.0, 4.0, 0.9, 0.2}, {1.0, 0.5, 0.5, 0.9}}, {1, 0});
        StrategyConfig cfg = default_strategy_config(StrategyKind::Stubborn);
        auto s = make_strategy(cfg, kChair, 1.0, &nb);
        for (int i = 0; i < 5; ++i)
            s->integrate(map, {hit(5, 5, confident(kChair))}, {});
        FoundDecision d = s->decide_found(map, near_cell(map, 5, 5));
        CHECK(d.found);
        CHECK(d.reason == FoundReason::classifier);

        // Without a classifier the strategy only collects.
        auto collector = make_strategy(cfg, kChair, 1.0, nullptr);
        collector->integrate(map, {hit(5, 5, confident(kChair))}, {});
        CHECK(!collector->decide_found(map, near_cell(map, 5, 5)).found);
        CHECK(collector->candidate(map, near_cell(map, 5, 5)).cx == 5);
        auto f = collector->decision_features(map, 5, 5);
        REQUIRE(f.size() == 4);
        CHECK(f[0] >= 1.0);
    }
}

TEST_CASE("latest filtered suppresses uncertain targets") {
    StrategyConfig cfg = default_strategy_config(StrategyKind::LatestFiltered);
    cfg.params.rho = 0.4;

    SUBCASE("low-uncertainty target is rendered") {
        GridMap map = make_map();
        auto s = make_strategy(cfg, kChair, 1.0);
        s->integrate(map, {hit(5, 5, confident(kChair, 0.95))}, {});
        CHECK(map.cell(5, 5).u_map < 0.4);
        CHECK(map.rendered_class(5, 5) == kChair);
        CHECK(s->decide_found(map, near_cell(map, 5, 5)).found);
    }

    SUBCASE("high-uncertainty target maps as occupied") {
        GridMap map = make_map();
        auto s = make_strategy(cfg, kChair, 1.0);
        s->integrate(map, {hit(5, 5, {0.2, 0.1, 0.4, 0.3})}, {});
        CHECK(map.cell(5, 5).u_map >= 0.4);
        CHECK(map.rendered_class(5, 5) == kWallClass);
        CHECK(!s->decide_found(map, near_cell(map, 5, 5)).found);
    }

    SUBCASE("oscillating predictions push map uncertainty over rho") {
        GridMap map = make_map();
        auto s = make_strategy(cfg, kChair, 1.0);
        s->integrate(map, {hit(5, 5, confident(kChair, 0.95))}, {});
        CHECK(map.rendered_class(5, 5) == kChair);
        // Conflicting frame: the running mean becomes ambiguous...
        s->integrate(map, {hit(5, 5, confident(0, 0.95))}, {});
        CHECK(map.cell(5, 5).u_map >= 0.4);
        // ...so a later target-looking frame is filtered to occupied.
        s->integrate(map, {hit(5, 5, confident(kChair, 0.95))}, {});
        CHECK(map.rendered_class(5, 5) == kWallClass);
    }
}

TEST_CASE("log odds posterior") {
    StrategyConfig cfg = default_strategy_config(StrategyKind::LogOdds);
    cfg.params.xi = 0.4;

    SUBCASE("order invariance") {
        ProbVector a{0.7, 0.2, 0.05, 0.05};
        ProbVector b{0.1, 0.6, 0.2, 0.1};
        GridMap m1 = make_map(), m2 = make_map();
        auto s1 = make_strategy(cfg, kChair, 1.0);
        auto s2 = make_strategy(cfg, kChair, 1.0);
        s1->integrate(m1, {hit(5, 5, a)}, {});
        s1->integrate(m1, {hit(5, 5, b)}, {});
        s2->integrate(m2, {hit(5, 5, b)}, {});
        s2->integrate(m2, {hit(5, 5, a)}, {});
        for (int c = 0; c < 4; ++c)
            CHECK(m1.cell(5, 5).p[c] == doctest::Approx(m2.cell(5, 5).p[c]).epsilon(1e-12));
    }

    SUBCASE("N identical observations match brute-force Bayes") {
        ProbVector p{0.5, 0.3, 0.2};
        GridMap map(12, 12, 0.25, 3);
        auto s = make_strategy(cfg, 2, 1.0);
        for (int n = 1; n <= 5; ++n) {
            s->integrate(map, {hit(5, 5, p)}, {});
            // Uniform-prior Bayes: posterior proportional to the product of
            // per-observation probabilities.
            ProbVector expect(3);
            double z = 0.0;
            for (int c = 0; c < 3; ++c) z += std::pow(p[c], n);
            for (int c = 0; c < 3; ++c) expect[c] = std::pow(p[c], n) / z;
            for (int c = 0; c < 3; ++c)
                CHECK(map.cell(5, 5).p[c] == doctest::Approx(expect[c]).epsilon(1e-9));
        }
    }

    SUBCASE("uniform posterior blocks the found decision") {
        GridMap map = make_map();
        auto s = make_strategy(cfg, 0, 1.0);  // target = argmax of uniform tie
        s->integrate(map, {hit(5, 5, {0.25, 0.25, 0.25, 0.25})}, {});
        CHECK(map.cell(5, 5).u_map == doctest::Approx(1.0));
        CHECK(map.rendered_class(5, 5) == 0);
        FoundDecision d = s->decide_found(map, near_cell(map, 5, 5));
        CHECK(!d.found);

        // Enough consistent evidence sharpens the posterior past xi.
        for (int i = 0; i < 12; ++i) s->integrate(map, {hit(5, 5, {0.7, 0.1, 0.1, 0.1})}, {});
        FoundDecision d2 = s->decide_found(map, near_cell(map, 5, 5));
        CHECK(d2.found);
        CHECK(d2.reason == FoundReason::uncertainty_gated);
    }
}

TEST_CASE("averaging and weighted averaging") {
    SUBCASE("equal uncertainties reduce the weighted mean to the plain mean") {
        StrategyConfig wcfg = default_strategy_config(StrategyKind::WeightedAveraging);
        GridMap map = make_map();
        auto s = make_strategy(wcfg, kChair, 1.0);
        ProbVector a{0.6, 0.2, 0.1, 0.1}, b{0.2, 0.4, 0.2, 0.2};
        s->integrate(map, {hit_u(5, 5, a, 0.5)}, {});
        s->integrate(map, {hit_u(5, 5, b, 0.5)}, {});
        for (int c = 0; c < 4; ++c)
            CHECK(map.cell(5, 5).p[c] == doctest::Approx((a[c] + b[c]) / 2).epsilon(1e-12));
    }

    SUBCASE("hand-computed inverse-uncertainty weights") {
        // (5 * p1 + 1.25 * p2) / 6.25 = [0.78, 0.22]
        StrategyConfig wcfg = default_strategy_config(StrategyKind::WeightedAveraging);
        GridMap map(12, 12, 0.25, 2);
        auto s = make_strategy(wcfg, 0, 1.0);
        s->integrate(map, {hit_u(5, 5, {0.9, 0.1}, 0.2)}, {});
        s->integrate(map, {hit_u(5, 5, {0.3, 0.7}, 0.8)}, {});
        CHECK(map.cell(5, 5).p[0] == doctest::Approx(0.78).epsilon(1e-12));
        CHECK(map.cell(5, 5).p[1] == doctest::Approx(0.22).epsilon(1e-12));
        CHECK(map.cell(5, 5).u_map ==
              doctest::Approx(normalized_entropy({0.78, 0.22})).epsilon(1e-12));
    }

    SUBCASE("ground-truth stream converges immediately and fires at distance") {
        StrategyConfig wcfg = default_strategy_config(StrategyKind::WeightedAveraging);
        GridMap map = make_map();
        auto s = make_strategy(wcfg, kChair, 1.0);
        ProbVector onehot{0.0, 0.0, 1.0, 0.0};
        s->integrate(map, {hit_u(5, 5, onehot, 0.0)}, {});  // clamp handles u = 0
        CHECK(map.cell(5, 5).u_map == doctest::Approx(0.0));
        FoundDecision d = s->decide_found(map, near_cell(map, 5, 5));
        CHECK(d.found);
        CHECK(d.reason == FoundReason::uncertainty_gated);
    }

    SUBCASE("distance-only ablation skips the entropy gate") {
        StrategyConfig cfg = default_strategy_config(StrategyKind::Averaging);
        cfg.use_uncertainty_found = false;
        GridMap map = make_map();
        auto s = make_strategy(cfg, kChair, 1.0);
        s->integrate(map, {hit(5, 5, {0.2, 0.2, 0.4, 0.2})}, {});  // high entropy
        FoundDecision d = s->decide_found(map, near_cell(map, 5, 5));
        CHECK(d.found);
        CHECK(d.reason == FoundReason::distance_only);
    }

    SUBCASE("uncertainty gate blocks a high-entropy cell") {
        StrategyConfig cfg = default_strategy_config(StrategyKind::Averaging);
        GridMap map = make_map();
        auto s = make_strategy(cfg, kChair, 1.0);
        s->integrate(map, {hit(5, 5, {0.2, 0.2, 0.4, 0.2})}, {});
        CHECK(!s->decide_found(map, near_cell(map, 5, 5)).found);
    }
}

TEST_CASE("found decisions respect the universal distance gate") {
    for (StrategyKind kind :
         {StrategyKind::Latest, StrategyKind::LatestFiltered, StrategyKind::LogOdds,
          StrategyKind::Averaging, StrategyKind::WeightedAveraging}) {
        GridMap map = make_map();
        auto s = make_strategy(default_strategy_config(kind), kChair, 1.0);
        for (int i = 0; i < 10; ++i)
            s->integrate(map, {hit(10, 10, confident(kChair, 0.97))}, {});
        AgentPose far{map.cell_center_x(1), map.cell_center_y(1), 0.0};
        FoundDecision d = s->decide_found(map, far);
        CHECK(!d.found);
    }
}
