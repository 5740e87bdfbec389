#include "semfuse/grid_map.hpp"

#include <cmath>
#include <unordered_map>

#include "semfuse/scene.hpp"

namespace semfuse {

GridMap::GridMap(int width, int height, double resolution, int num_classes,
                 double origin_x, double origin_y)
    : width_(width),
      height_(height),
      resolution_(resolution),
      num_classes_(num_classes),
      origin_x_(origin_x),
      origin_y_(origin_y) {
    if (width < 1 || height < 1) throw std::invalid_argument("GridMap: empty grid");
    if (!(resolution > 0.0)) throw std::invalid_argument("GridMap: resolution must be > 0");
    cells_.resize(static_cast<std::size_t>(width) * height);
}

std::pair<int, int> GridMap::world_to_cell(double x_m, double y_m) const {
    // The nudge keeps exact boundary points in the upper cell despite the
    // inexact division (0.09 / 0.03 lands just below 3).
    int cx = static_cast<int>(std::floor((x_m - origin_x_) / resolution_ + 1e-9));
    int cy = static_cast<int>(std::floor((y_m - origin_y_) / resolution_ + 1e-9));
    if (!in_bounds(cx, cy))
        throw std::out_of_range("world_to_cell: point outside map bounds");
    return {cx, cy};
}

void GridMap::set_probs(int cx, int cy, ProbVector p) {
    MapCell& c = cell(cx, cy);
    c.u_map = normalized_entropy(p);
    c.p = std::move(p);
}

void GridMap::update_height_occupancy(int cx, int cy, double height_m) {
    MapCell& c = cell(cx, cy);
    if (height_m > c.height) c.height = height_m;
    c.occupancy = c.height > kOccupancyHeight;
}

double GridMap::cell_uncertainty(int cx, int cy) const {
    const MapCell& c = cell(cx, cy);
    if (c.p.empty()) return 1.0;
    return c.u_map;
}

std::vector<char> GridMap::rendered_mask(int cls) const {
    std::vector<char> mask(cells_.size(), 0);
    for (std::size_t i = 0; i < cells_.size(); ++i)
        mask[i] = (cells_[i].rendered_class == cls) ? 1 : 0;
    return mask;
}

std::vector<ProjectedHit> project_observation(const Observation& obs, double t) {
    std::unordered_map<long long, std::size_t> slot;
    std::vector<ProjectedHit> hits;
    hits.reserve(obs.hits.size());
    for (const auto& h : obs.hits) {
        long long key = (static_cast<long long>(h.cy) << 32) | static_cast<unsigned>(h.cx);
        auto it = slot.find(key);
        if (it != slot.end()) {
            ProjectedHit& existing = hits[it->second];
            // Top-most voxel wins; ties go to the closer sample.
            bool replace = h.height_m > existing.height_m ||
                           (h.height_m == existing.height_m &&
                            h.distance_m < existing.distance_m);
            if (!replace) continue;
            existing.p_pred = softmax(scale_logits(h.logits, t));
            existing.u = normalized_entropy(existing.p_pred);
            existing.height_m = h.height_m;
            existing.distance_m = h.distance_m;
            continue;
        }
        ProjectedHit ph;
        ph.cx = h.cx;
        ph.cy = h.cy;
        ph.p_pred = softmax(scale_logits(h.logits, t));
        ph.u = normalized_entropy(ph.p_pred);
        ph.height_m = h.height_m;
        ph.distance_m = h.distance_m;
        slot.emplace(key, hits.size());
        hits.push_back(std::move(ph));
    }
    return hits;
}

}  // namespace semfuse
