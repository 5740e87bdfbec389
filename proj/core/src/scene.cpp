#include "semfuse/scene.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "semfuse/rng.hpp"

namespace semfuse {

std::vector<int> Scene::object_classes_present() const {
    std::set<int> seen;
    for (const auto& t : targets) seen.insert(t.class_id);
    return {seen.begin(), seen.end()};
}

namespace {

void set_cell(Scene& s, int cx, int cy, int cls, double h) {
    s.classes[s.index(cx, cy)] = cls;
    s.heights[s.index(cx, cy)] = h;
}

bool area_free(const Scene& s, int x0, int y0, int x1, int y1, int margin) {
    for (int y = y0 - margin; y <= y1 + margin; ++y) {
        for (int x = x0 - margin; x <= x1 + margin; ++x) {
            if (!s.in_bounds(x, y)) return false;
            if (s.class_at(x, y) != kFloorClass) return false;
        }
    }
    return true;
}

// Flood fill over free cells. Diagonal steps require both adjacent
// cardinal cells free (no squeezing through wall corners).
std::vector<char> free_reachability(const Scene& s, int sx, int sy) {
    std::vector<char> seen(static_cast<std::size_t>(s.width) * s.height, 0);
    if (!s.in_bounds(sx, sy) || s.occupied(sx, sy)) return seen;
    std::deque<std::pair<int, int>> queue{{sx, sy}};
    seen[s.index(sx, sy)] = 1;
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                int nx = x + dx, ny = y + dy;
                if (!s.in_bounds(nx, ny) || s.occupied(nx, ny)) continue;
                if (dx != 0 && dy != 0 && (s.occupied(x + dx, y) || s.occupied(x, y + dy)))
                    continue;
                if (!seen[s.index(nx, ny)]) {
                    seen[s.index(nx, ny)] = 1;
                    queue.emplace_back(nx, ny);
                }
            }
        }
    }
    return seen;
}

bool box_adjacent_reachable(const Scene& s, const CellBox& box,
                            const std::vector<char>& reach) {
    for (int y = box.y0 - 1; y <= box.y1 + 1; ++y) {
        for (int x = box.x0 - 1; x <= box.x1 + 1; ++x) {
            if (!s.in_bounds(x, y) || box.contains(x, y)) continue;
            if (reach[s.index(x, y)]) return true;
        }
    }
    return false;
}

Scene attempt_layout(const SceneSpec& spec, Rng& rng) {
    Scene s;
    s.width = spec.width;
    s.height = spec.height;
    s.resolution = spec.resolution;
    s.num_classes = spec.num_classes;
    s.classes.assign(static_cast<std::size_t>(s.width) * s.height, kFloorClass);
    s.heights.assign(static_cast<std::size_t>(s.width) * s.height, 0.0);

    // Border walls.
    for (int x = 0; x < s.width; ++x) {
        set_cell(s, x, 0, kWallClass, kWallHeight);
        set_cell(s, x, s.height - 1, kWallClass, kWallHeight);
    }
    for (int y = 0; y < s.height; ++y) {
        set_cell(s, 0, y, kWallClass, kWallHeight);
        set_cell(s, s.width - 1, y, kWallClass, kWallHeight);
    }

    // One interior partition with a door when the room is big enough.
    if (s.width >= 16 && s.height >= 16) {
        bool vertical = rng.bernoulli(0.5);
        if (vertical) {
            int wx = rng.uniform_int(s.width / 3, 2 * s.width / 3);
            int door = rng.uniform_int(2, s.height - 4);
            for (int y = 1; y < s.height - 1; ++y) {
                if (y >= door && y < door + 3) continue;
                set_cell(s, wx, y, kWallClass, kWallHeight);
            }
        } else {
            int wy = rng.uniform_int(s.height / 3, 2 * s.height / 3);
            int door = rng.uniform_int(2, s.width - 4);
            for (int x = 1; x < s.width - 1; ++x) {
                if (x >= door && x < door + 3) continue;
                set_cell(s, x, wy, kWallClass, kWallHeight);
            }
        }
    }

    // Furniture-like objects of the C-2 object classes.
    int floor_cells = 0;
    for (int c : s.classes) floor_cells += (c == kFloorClass);
    int budget = static_cast<int>(std::lround(spec.object_density * floor_cells));
    int placed_cells = 0;
    int attempts = 0;
    const int max_attempts = 40 * std::max(budget, 1);
    while (placed_cells < budget && attempts < max_attempts) {
        ++attempts;
        int w = rng.uniform_int(1, 2);
        int h = rng.uniform_int(1, 2);
        int x0 = rng.uniform_int(1, s.width - 1 - w);
        int y0 = rng.uniform_int(1, s.height - 1 - h);
        // Keep a one-cell free margin so objects never seal a corridor.
        if (!area_free(s, x0, y0, x0 + w - 1, y0 + h - 1, 1)) continue;
        int cls = rng.uniform_int(kFirstObjectClass, spec.num_classes - 1);
        for (int y = y0; y < y0 + h; ++y)
            for (int x = x0; x < x0 + w; ++x) set_cell(s, x, y, cls, kObjectHeight);
        s.targets.push_back({cls, {x0, y0, x0 + w - 1, y0 + h - 1}});
        placed_cells += w * h;
    }

    // Start poses on free cells.
    int want = std::max(1, spec.num_start_poses);
    int tries = 0;
    while (static_cast<int>(s.start_poses.size()) < want && tries < 1000) {
        ++tries;
        int x = rng.uniform_int(1, s.width - 2);
        int y = rng.uniform_int(1, s.height - 2);
        if (s.class_at(x, y) != kFloorClass) continue;
        double theta = rng.uniform(0.0, 2.0 * M_PI);
        s.start_poses.push_back({s.cell_cx(x), s.cell_cy(y), theta});
    }
    return s;
}

}  // namespace

bool start_reaches_target(const Scene& scene, int start_cx, int start_cy) {
    auto reach = free_reachability(scene, start_cx, start_cy);
    for (const auto& t : scene.targets) {
        if (box_adjacent_reachable(scene, t.box, reach)) return true;
    }
    return false;
}

Scene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
    if (spec.width < 5 || spec.height < 5)
        throw std::invalid_argument("generate_scene: grid must be at least 5x5");
    if (spec.num_classes < 3)
        throw std::invalid_argument("generate_scene: need >= 3 classes");
    if (!(spec.resolution > 0.0))
        throw std::invalid_argument("generate_scene: resolution must be > 0");

    Rng rng(mix_seed(seed, 0x5ce9e5ULL));
    for (int attempt = 0; attempt < 16; ++attempt) {
        Scene s = attempt_layout(spec, rng);
        if (s.targets.empty() || s.start_poses.empty()) continue;
        bool ok = false;
        for (const auto& pose : s.start_poses) {
            int cx = static_cast<int>(pose.x / s.resolution);
            int cy = static_cast<int>(pose.y / s.resolution);
            if (start_reaches_target(s, cx, cy)) {
                ok = true;
                break;
            }
        }
        if (ok) return s;
    }
    throw std::runtime_error("generate_scene: no layout with a reachable target");
}

void save_scene(const Scene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_scene: cannot open " + path);
    out.precision(17);
    out << "semfuse-scene 1\n";
    out << "width " << scene.width << "\n";
    out << "height " << scene.height << "\n";
    out << "resolution " << scene.resolution << "\n";
    out << "classes " << scene.num_classes << "\n";
    out << "cell_classes\n";
    for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
            out << scene.class_at(x, y) << (x + 1 == scene.width ? "" : " ");
        }
        out << "\n";
    }
    out << "cell_heights\n";
    for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
            out << scene.height_at(x, y) << (x + 1 == scene.width ? "" : " ");
        }
        out << "\n";
    }
    out << "targets " << scene.targets.size() << "\n";
    for (const auto& t : scene.targets) {
        out << t.class_id << " " << t.box.x0 << " " << t.box.y0 << " " << t.box.x1 << " "
            << t.box.y1 << "\n";
    }
    out << "start_poses " << scene.start_poses.size() << "\n";
    for (const auto& p : scene.start_poses) {
        out << p.x << " " << p.y << " " << p.theta << "\n";
    }
    if (!out) throw std::runtime_error("save_scene: write failed for " + path);
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_scene: cannot open " + path);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "semfuse-scene" || version != 1)
        throw std::runtime_error("load_scene: bad header in " + path);

    Scene s;
    auto expect = [&](const char* name) {
        in >> tag;
        if (tag != name)
            throw std::runtime_error(std::string("load_scene: expected '") + name +
                                     "', got '" + tag + "' in " + path);
    };
    expect("width");
    in >> s.width;
    expect("height");
    in >> s.height;
    expect("resolution");
    in >> s.resolution;
    expect("classes");
    in >> s.num_classes;
    if (s.width < 1 || s.height < 1 || s.num_classes < 3 || !(s.resolution > 0))
        throw std::runtime_error("load_scene: invalid dimensions in " + path);

    std::size_t n = static_cast<std::size_t>(s.width) * s.height;
    s.classes.resize(n);
    s.heights.resize(n);
    expect("cell_classes");
    for (auto& c : s.classes) in >> c;
    expect("cell_heights");
    for (auto& h : s.heights) in >> h;

    std::size_t count = 0;
    expect("targets");
    in >> count;
    s.targets.resize(count);
    for (auto& t : s.targets)
        in >> t.class_id >> t.box.x0 >> t.box.y0 >> t.box.x1 >> t.box.y1;
    expect("start_poses");
    in >> count;
    s.start_poses.resize(count);
    for (auto& p : s.start_poses) in >> p.x >> p.y >> p.theta;
    if (!in) throw std::runtime_error("load_scene: truncated file " + path);

    for (const auto& t : s.targets) {
        if (!s.in_bounds(t.box.x0, t.box.y0) || !s.in_bounds(t.box.x1, t.box.y1) ||
            t.box.x1 < t.box.x0 || t.box.y1 < t.box.y0)
            throw std::runtime_error("load_scene: target box out of bounds in " + path);
    }
    return s;
}

}  // namespace semfuse
