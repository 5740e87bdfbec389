#pragma once

#include <stdexcept>
#include <vector>

#include "semfuse/calibration.hpp"
#include "semfuse/sensor.hpp"

namespace semfuse {

// Per-cell aggregated state [p_k, height, occupancy, u_map] plus the class
// rendered to the agent. Strategy-specific accumulators live in the
// strategy objects, not here.
struct MapCell {
    ProbVector p;                // empty until first probabilistic update
    double height = 0.0;         // maximum encountered height
    bool occupancy = false;      // height > 0.1 m
    double u_map = 1.0;          // normalized entropy of p; unknown cells read 1
    int rendered_class = -1;     // -1 = nothing shown yet
    int observed_count = 0;
};

class GridMap {
public:
    GridMap(int width, int height, double resolution, int num_classes,
            double origin_x = 0.0, double origin_y = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    int num_classes() const { return num_classes_; }
    double origin_x() const { return origin_x_; }
    double origin_y() const { return origin_y_; }

    int index(int cx, int cy) const { return cy * width_ + cx; }
    bool in_bounds(int cx, int cy) const {
        return cx >= 0 && cx < width_ && cy >= 0 && cy < height_;
    }
    const MapCell& cell(int cx, int cy) const { return cells_[index(cx, cy)]; }
    MapCell& cell(int cx, int cy) { return cells_[index(cx, cy)]; }

    // Floor convention; points exactly on a boundary belong to the upper
    // cell. Throws std::out_of_range outside the map.
    std::pair<int, int> world_to_cell(double x_m, double y_m) const;

    double cell_center_x(int cx) const { return origin_x_ + (cx + 0.5) * resolution_; }
    double cell_center_y(int cy) const { return origin_y_ + (cy + 0.5) * resolution_; }

    // Stores p and recomputes u_map, keeping the entropy channel in sync.
    void set_probs(int cx, int cy, ProbVector p);

    // height := max(height, h); occupancy follows the strict 0.1 m rule.
    void update_height_occupancy(int cx, int cy, double height_m);

    void mark_observed(int cx, int cy) { cell(cx, cy).observed_count++; }
    bool observed(int cx, int cy) const { return cell(cx, cy).observed_count > 0; }

    // Entropy of the stored p_k; 1.0 for cells never updated.
    double cell_uncertainty(int cx, int cy) const;

    void set_rendered_class(int cx, int cy, int cls) { cell(cx, cy).rendered_class = cls; }
    int rendered_class(int cx, int cy) const { return cell(cx, cy).rendered_class; }

    std::vector<char> rendered_mask(int cls) const;

private:
    int width_;
    int height_;
    double resolution_;
    int num_classes_;
    double origin_x_;
    double origin_y_;
    std::vector<MapCell> cells_;
};

struct ProjectedHit {
    int cx = 0;
    int cy = 0;
    ProbVector p_pred;      // calibrated probabilities
    double u = 0.0;         // normalized entropy of p_pred
    double height_m = 0.0;
    double distance_m = 0.0;
};

// Scales each hit's logits by t, softmaxes and attaches the perception
// entropy. Hits falling into the same cell keep the top-most one (greater
// height, then smaller distance).
std::vector<ProjectedHit> project_observation(const Observation& obs, double t);

}  // namespace semfuse
