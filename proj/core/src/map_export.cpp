#include "semfuse/map_export.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace semfuse {

namespace {

void write_pgm(const std::string& path, int w, int h,
               const std::vector<unsigned char>& px) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("export_map: cannot open " + path);
    out << "P5\n" << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(px.data()),
              static_cast<std::streamsize>(px.size()));
    if (!out) throw std::runtime_error("export_map: write failed for " + path);
}

}  // namespace

int class_gray_level(int cls, int num_classes) {
    // Level 0 is reserved for unknown. Classes spread over the rest.
    return ((cls + 1) * 255) / num_classes;
}

void export_map(const GridMap& map, int target_class, const std::string& prefix) {
    const int w = map.width(), h = map.height();
    std::vector<unsigned char> cls_px(static_cast<std::size_t>(w) * h, 0);
    std::vector<unsigned char> unc_px(cls_px.size(), 255);
    std::vector<unsigned char> tgt_px(cls_px.size(), 0);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(map.index(x, y));
            const MapCell& c = map.cell(x, y);
            if (!c.p.empty()) {
                int best = static_cast<int>(argmax(c.p));
                cls_px[i] = static_cast<unsigned char>(class_gray_level(best, map.num_classes()));
            }
            unc_px[i] = static_cast<unsigned char>(
                std::lround(map.cell_uncertainty(x, y) * 255.0));
            if (c.rendered_class == target_class) tgt_px[i] = 255;
        }
    }

    write_pgm(prefix + "_class.pgm", w, h, cls_px);
    write_pgm(prefix + "_uncertainty.pgm", w, h, unc_px);
    write_pgm(prefix + "_target.pgm", w, h, tgt_px);

    std::ofstream legend(prefix + "_palette.txt");
    if (!legend) throw std::runtime_error("export_map: cannot open palette file");
    legend << "gray_level class_id\n";
    legend << "0 unknown\n";
    for (int c = 0; c < map.num_classes(); ++c)
        legend << class_gray_level(c, map.num_classes()) << " " << c << "\n";
}

Pgm read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error("read_pgm: not a binary PGM: " + path);
    Pgm img;
    int maxval = 0;
    in >> img.width >> img.height >> maxval;
    if (maxval != 255) throw std::runtime_error("read_pgm: expected 8-bit PGM");
    in.get();  // single whitespace after the header
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!in) throw std::runtime_error("read_pgm: truncated file " + path);
    return img;
}

}  // namespace semfuse
