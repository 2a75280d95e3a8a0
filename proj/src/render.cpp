#include "fraclab/render.hpp"

#include <fstream>

namespace fraclab {

std::string render_pixmap(const SurvivalTree& tree, int pixels) {
    if (tree.dim() != 2) throw UnsupportedDimension("raster output needs d = 2");
    if (pixels < 1) throw DomainError("pixels must be >= 1");

    const int depth = tree.depth();
    const std::int64_t den = tree.scales().side_denominator(depth);
    std::vector<unsigned char> filled(static_cast<std::size_t>(pixels) *
                                          static_cast<std::size_t>(pixels),
                                      0);
    const auto px = static_cast<__int128>(pixels);
    for (std::size_t i = 0; i < tree.count(depth); ++i) {
        const Box box = tree.box_of(depth, i);
        const auto x0 = static_cast<std::int64_t>(px * box.corner_num[0] / den);
        const auto y0 = static_cast<std::int64_t>(px * box.corner_num[1] / den);
        auto x1 = static_cast<std::int64_t>(px * (box.corner_num[0] + 1) / den);
        auto y1 = static_cast<std::int64_t>(px * (box.corner_num[1] + 1) / den);
        x1 = std::max(x1, x0 + 1);
        y1 = std::max(y1, y0 + 1);
        for (std::int64_t y = y0; y < y1 && y < pixels; ++y)
            for (std::int64_t x = x0; x < x1 && x < pixels; ++x) {
                // image rows run top-down; the second coordinate points up
                const std::int64_t row = pixels - 1 - y;
                filled[static_cast<std::size_t>(row) * static_cast<std::size_t>(pixels) +
                       static_cast<std::size_t>(x)] = 1;
            }
    }

    std::string out = "P6\n" + std::to_string(pixels) + " " + std::to_string(pixels) + "\n255\n";
    out.reserve(out.size() + filled.size() * 3);
    for (unsigned char f : filled) {
        const char v = f ? '\x00' : '\xff';
        out.push_back(v);
        out.push_back(v);
        out.push_back(v);
    }
    return out;
}

void render_image(const SurvivalTree& tree, int pixels, const std::string& path) {
    const std::string bytes = render_pixmap(tree, pixels);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace fraclab
