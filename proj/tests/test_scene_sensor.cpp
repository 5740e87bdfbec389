#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "doctest.h"
#include "semfuse/episode.hpp"
#include "semfuse/policy.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/scene.hpp"
#include "semfuse/sensor.hpp"

using namespace semfuse;

namespace {

Scene empty_room(int w, int h, double res = 0.25) {
    Scene s;
    s.width = w;
    s.height = h;
    s.resolution = res;
    s.num_classes = 6;
    s.classes.assign(static_cast<std::size_t>(w) * h, kFloorClass);
    s.heights.assign(static_cast<std::size_t>(w) * h, 0.0);
    for (int x = 0; x < w; ++x) {
        s.classes[s.index(x, 0)] = kWallClass;
        s.heights[s.index(x, 0)] = kWallHeight;
        s.classes[s.index(x, h - 1)] = kWallClass;
        s.heights[s.index(x, h - 1)] = kWallHeight;
    }
    for (int y = 0; y < h; ++y) {
        s.classes[s.index(0, y)] = kWallClass;
        s.heights[s.index(0, y)] = kWallHeight;
        s.classes[s.index(w - 1, y)] = kWallClass;
        s.heights[s.index(w - 1, y)] = kWallHeight;
    }
    return s;
}

// Independent per-ray marcher used as the raycast oracle: no shared
// dedup structure, straight re-derivation of the contract.
std::vector<RayHit> naive_raycast(const Scene& scene, const AgentPose& pose,
                                  double fov, int n_rays, double max_range) {
    std::map<int, double> best;
    for (int r = 0; r < n_rays; ++r) {
        double angle = pose.theta;
        if (n_rays > 1) angle += -fov / 2.0 + fov * r / (n_rays - 1);
        for (double d = 0.0; d <= max_range; d += scene.resolution / 2.0) {
            int cx = static_cast<int>(std::floor((pose.x + d * std::cos(angle)) / scene.resolution));
            int cy = static_cast<int>(std::floor((pose.y + d * std::sin(angle)) / scene.resolution));
            if (!scene.in_bounds(cx, cy)) break;
            auto it = best.find(scene.index(cx, cy));
            if (it == best.end())
                best[scene.index(cx, cy)] = d;
            else
                it->second = std::min(it->second, d);
            if (scene.occupied(cx, cy)) break;
        }
    }
    std::vector<RayHit> hits;
    for (auto [idx, d] : best)
        hits.push_back({idx % scene.width, idx / scene.width, d});
    return hits;
}

}  // namespace

TEST_CASE("scene generation is deterministic") {
    SceneSpec spec;
    spec.width = 8;
    spec.height = 8;
    spec.object_density = 0.05;
    Scene a = generate_scene(spec, 7);
    Scene b = generate_scene(spec, 7);
    CHECK(a.classes == b.classes);
    CHECK(a.heights == b.heights);
    CHECK(a.targets.size() == b.targets.size());
    REQUIRE(a.start_poses.size() == b.start_poses.size());
    for (std::size_t i = 0; i < a.start_poses.size(); ++i) {
        CHECK(a.start_poses[i].x == b.start_poses[i].x);
        CHECK(a.start_poses[i].theta == b.start_poses[i].theta);
    }
}

TEST_CASE("zero density cannot place a target") {
    SceneSpec spec;
    spec.width = 8;
    spec.height = 8;
    spec.object_density = 0.0;
    CHECK_THROWS_AS(generate_scene(spec, 3), std::runtime_error);
}

TEST_CASE("generated scene has a reachable target") {
    SceneSpec spec;
    spec.width = 32;
    spec.height = 32;
    spec.num_classes = 6;
    Scene scene = generate_scene(spec, 1);
    REQUIRE(!scene.targets.empty());
    REQUIRE(!scene.start_poses.empty());

    // Shortest-path oracle: some start reaches some instance of some class.
    bool reachable = false;
    for (const auto& start : scene.start_poses) {
        for (int cls : scene.object_classes_present()) {
            if (plan_ground_truth_path(scene, cls, start, 1.0)) reachable = true;
        }
    }
    CHECK(reachable);

    // Invariants on the target boxes.
    for (const auto& t : scene.targets) {
        REQUIRE(scene.in_bounds(t.box.x0, t.box.y0));
        REQUIRE(scene.in_bounds(t.box.x1, t.box.y1));
        int own = 0;
        for (int y = t.box.y0; y <= t.box.y1; ++y)
            for (int x = t.box.x0; x <= t.box.x1; ++x)
                own += (scene.class_at(x, y) == t.class_id);
        CHECK(own >= 1);
    }
}

TEST_CASE("raycast hand trace: wall ahead") {
    Scene s = empty_room(5, 5);
    // Agent in cell (1,2) looking straight at the right wall.
    AgentPose pose{s.cell_cx(1), s.cell_cy(2), 0.0};
    auto hits = raycast_fov(s, pose, 0.0, 1, 5.0);

    std::set<std::pair<int, int>> cells;
    for (const auto& h : hits) cells.insert({h.cx, h.cy});
    CHECK(cells == std::set<std::pair<int, int>>{{1, 2}, {2, 2}, {3, 2}, {4, 2}});
    for (const auto& h : hits) {
        if (h.cx == 4) CHECK(s.occupied(h.cx, h.cy));
    }
}

TEST_CASE("raycast fov=0 equals a single forward ray") {
    Scene s = empty_room(9, 9);
    AgentPose pose{s.cell_cx(2), s.cell_cy(4), 0.0};
    auto one = raycast_fov(s, pose, 0.0, 1, 5.0);
    auto fan = raycast_fov(s, pose, 0.0, 7, 5.0);
    REQUIRE(one.size() == fan.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].cx == fan[i].cx);
        CHECK(one[i].distance_m == fan[i].distance_m);
    }
}

TEST_CASE("raycast stops at max range in an open corridor") {
    Scene s = empty_room(40, 5);
    AgentPose pose{s.cell_cx(1), s.cell_cy(2), 0.0};
    auto hits = raycast_fov(s, pose, 0.0, 1, 2.0);
    for (const auto& h : hits) {
        CHECK(h.distance_m <= 2.0);
        CHECK(!s.occupied(h.cx, h.cy));
    }
    // 2 m at 0.25 m cells, starting mid-cell: 9 traversed cells.
    CHECK(hits.size() == 9);
}

TEST_CASE("raycast matches the independent marcher") {
    SceneSpec spec;
    spec.width = 24;
    spec.height = 24;
    Scene scene = generate_scene(spec, 5);
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        int cx = rng.uniform_int(1, scene.width - 2);
        int cy = rng.uniform_int(1, scene.height - 2);
        if (scene.occupied(cx, cy)) continue;
        AgentPose pose{scene.cell_cx(cx), scene.cell_cy(cy), rng.uniform(0, 2 * M_PI)};
        auto got = raycast_fov(scene, pose, M_PI / 2, 61, 5.0);
        auto expected = naive_raycast(scene, pose, M_PI / 2, 61, 5.0);
        REQUIRE(got.size() == expected.size());
        std::map<int, double> exp_dist;
        for (const auto& h : expected) exp_dist[scene.index(h.cx, h.cy)] = h.distance_m;
        for (const auto& h : got) {
            REQUIRE(exp_dist.count(scene.index(h.cx, h.cy)) == 1);
            CHECK(h.distance_m == exp_dist[scene.index(h.cx, h.cy)]);
        }
    }
}

TEST_CASE("raycast occlusion: nothing behind a blocking wall") {
    // A full-height wall column right in front of the agent: every cell
    // strictly behind it must stay unobserved no matter the ray fan.
    Scene s = empty_room(20, 9);
    for (int y = 1; y <= 7; ++y) {
        s.classes[s.index(6, y)] = kWallClass;
        s.heights[s.index(6, y)] = kWallHeight;
    }
    AgentPose pose{s.cell_cx(2), s.cell_cy(4), 0.0};
    auto hits = raycast_fov(s, pose, M_PI / 2, 61, 5.0);
    bool saw_wall = false;
    for (const auto& h : hits) {
        CHECK(h.cx <= 6);  // nothing beyond the wall column
        saw_wall |= (h.cx == 6);
    }
    CHECK(saw_wall);
}

TEST_CASE("generate_logits: calibrated construction") {
    NoiseModel noise;
    noise.base_error = 0.3;
    noise.distance_error_slope = 0.0;
    noise.true_confidence = 0.7;
    noise.confidence_spread = 0.0;
    noise.overconfidence_factor = 3.0;

    // Hand oracle: softmax(3 ln q)[obs] = 0.7^3 / (0.7^3 + 3 * 0.1^3).
    Rng rng(1);
    Logits l = generate_logits(2, 0.0, 4, noise, rng);
    ProbVector p = softmax(l);
    double expected = std::pow(0.7, 3) / (std::pow(0.7, 3) + 3.0 * std::pow(0.1, 3));
    CHECK(*std::max_element(p.begin(), p.end()) == doctest::Approx(expected).epsilon(1e-12));

    // k=1, d=0, no error: the emitted distribution is q itself with the
    // true class on top.
    NoiseModel clean;
    clean.base_error = 0.0;
    clean.distance_error_slope = 0.0;
    clean.true_confidence = 0.7;
    clean.confidence_spread = 0.0;
    clean.overconfidence_factor = 1.0;
    Rng rng2(2);
    ProbVector q = softmax(generate_logits(1, 0.0, 4, clean, rng2));
    CHECK(argmax(q) == 1);
    CHECK(q[1] == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(q[0] == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("generate_logits: empirical accuracy tracks 1 - eps(d)") {
    NoiseModel noise;  // defaults: eps(d) = 0.1 + 0.3 d / 5
    const double d = 2.5;
    const double expect_acc = 1.0 - noise.error_probability(d);

    for (double spread : {0.0, 1.0}) {
        noise.confidence_spread = spread;
        Rng rng(555);
        int correct = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            Logits l = generate_logits(3, d, 6, noise, rng);
            correct += (argmax(softmax(l)) == 3);
        }
        CHECK(std::abs(static_cast<double>(correct) / n - expect_acc) < 0.01);
    }
}

TEST_CASE("ground truth logits are near one-hot") {
    Logits l = ground_truth_logits(2, 4);
    ProbVector p = softmax(l);
    CHECK(argmax(p) == 2);
    CHECK(p[2] == doctest::Approx(1.0));
    CHECK(normalized_entropy(p) < 1e-6);
}

TEST_CASE("observation streams are deterministic per seed") {
    SceneSpec spec;
    spec.width = 16;
    spec.height = 16;
    Scene scene = generate_scene(spec, 4);
    AgentPose pose = scene.start_poses.front();
    SensorParams sensor;
    NoiseModel noise;

    Rng a(42), b(42), c(43);
    auto o1 = make_observation(scene, pose, sensor, noise, a);
    auto o2 = make_observation(scene, pose, sensor, noise, b);
    auto o3 = make_observation(scene, pose, sensor, noise, c);
    CHECK(hash_observation(o1) == hash_observation(o2));
    CHECK(hash_observation(o1) != hash_observation(o3));
}

TEST_CASE("scene text round trip") {
    SceneSpec spec;
    spec.width = 16;
    spec.height = 12;
    Scene scene = generate_scene(spec, 11);
    const std::string path = "test_scene_roundtrip.scene";
    save_scene(scene, path);
    Scene loaded = load_scene(path);
    CHECK(loaded.classes == scene.classes);
    CHECK(loaded.heights == scene.heights);
    CHECK(loaded.targets.size() == scene.targets.size());
    CHECK(loaded.start_poses.size() == scene.start_poses.size());
    CHECK(loaded.resolution == scene.resolution);
    std::remove(path.c_str());
}
