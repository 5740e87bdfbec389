#pragma once

#include <string>
#include <vector>

#include "semfuse/grid_map.hpp"

namespace semfuse {

// Writes <prefix>_class.pgm, <prefix>_uncertainty.pgm, <prefix>_target.pgm
// (binary P5) and <prefix>_palette.txt describing the class -> gray level
// mapping. Unknown cells are gray level 0 in the class grid.
void export_map(const GridMap& map, int target_class, const std::string& prefix);

int class_gray_level(int cls, int num_classes);

struct Pgm {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> pixels;  // row-major
};

Pgm read_pgm(const std::string& path);

}  // namespace semfuse
