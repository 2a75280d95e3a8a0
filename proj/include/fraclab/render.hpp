#pragma once

#include <string>

#include "fraclab/grid.hpp"

namespace fraclab {

// Binary portable pixmap (P6) of the retained deepest-level cubes, black on
// white.  Bit-exact for fixed inputs; pixel ranges come from exact integer
// arithmetic and every cube covers at least one pixel.
std::string render_pixmap(const SurvivalTree& tree, int pixels);
void render_image(const SurvivalTree& tree, int pixels, const std::string& path);

}  // namespace fraclab
