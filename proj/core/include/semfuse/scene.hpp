#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace semfuse {

// Class layout of the grid world: 0 = free floor, 1 = wall, 2.. = object
// classes. Walls are 2.0 m tall, objects 0.5 m, floor 0 m.
inline constexpr int kFloorClass = 0;
inline constexpr int kWallClass = 1;
inline constexpr int kFirstObjectClass = 2;

inline constexpr double kWallHeight = 2.0;
inline constexpr double kObjectHeight = 0.5;
inline constexpr double kOccupancyHeight = 0.1;  // occupied iff height > this

struct AgentPose {
    double x = 0.0;      // meters
    double y = 0.0;      // meters
    double theta = 0.0;  // radians
};

struct CellBox {  // inclusive cell-coordinate rectangle
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    bool contains(int cx, int cy) const {
        return cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1;
    }
    int cell_count() const { return (x1 - x0 + 1) * (y1 - y0 + 1); }
};

struct TargetInstance {
    int class_id = 0;
    CellBox box;
};

struct Scene {
    int width = 0;   // cells
    int height = 0;  // cells
    double resolution = 0.25;  // meters per cell
    int num_classes = 0;
    std::vector<int> classes;     // row-major, height rows of width
    std::vector<double> heights;  // meters
    std::vector<TargetInstance> targets;
    std::vector<AgentPose> start_poses;

    int index(int cx, int cy) const { return cy * width + cx; }
    bool in_bounds(int cx, int cy) const {
        return cx >= 0 && cx < width && cy >= 0 && cy < height;
    }
    int class_at(int cx, int cy) const { return classes[index(cx, cy)]; }
    double height_at(int cx, int cy) const { return heights[index(cx, cy)]; }
    bool occupied(int cx, int cy) const { return height_at(cx, cy) > kOccupancyHeight; }

    // Center of a cell in world coordinates.
    double cell_cx(int cx) const { return (cx + 0.5) * resolution; }
    double cell_cy(int cy) const { return (cy + 0.5) * resolution; }

    std::vector<int> object_classes_present() const;
};

struct SceneSpec {
    int width = 32;
    int height = 32;
    double resolution = 0.25;
    int num_classes = 6;         // floor, wall, >= 1 object class
    double object_density = 0.04;  // share of floor cells covered by objects
    int num_start_poses = 4;
};

// Deterministic scene generation. Retries internal layouts a bounded
// number of times; throws std::runtime_error when no start pose can reach
// any target (e.g. zero density leaves nothing to place).
Scene generate_scene(const SceneSpec& spec, std::uint64_t seed);

// Structured text round trip (schema documented in the writer).
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

// True when a path over free cells (8-connected, no corner cutting)
// connects the start cell to a free cell adjacent to any target box.
bool start_reaches_target(const Scene& scene, int start_cx, int start_cy);

}  // namespace semfuse
