#include "rjip/mask.hpp"

#include <cmath>

namespace rjip {

RegularGrid RegularGrid::from_real(double h) {
    require(h >= 1.0, "grid spacing must be >= 1");
    long fx = std::lround(h * 256.0);
    require(fx >= 256 && fx <= 0xFFFF, "grid spacing out of fixed-point range");
    RegularGrid g;
    g.h_fixed = static_cast<uint16_t>(fx);
    return g;
}

int grid_points_along(const RegularGrid& grid, int extent) {
    int n = 0;
    for (int i = 0;; ++i) {
        if (grid.coord(i) >= extent) break;
        ++n;
    }
    return n;
}

static void check_grid(int width, int height, const RegularGrid& grid) {
    require(width > 0 && height > 0, "mask: empty image");
    require(grid.h_fixed >= 256, "mask: h < 1");
    require(grid.h() <= std::min(width, height), "mask: h > min(width, height)");
}

GridDims grid_dims(int width, int height, const RegularGrid& grid) {
    check_grid(width, height, grid);
    return {grid_points_along(grid, width), grid_points_along(grid, height)};
}

std::vector<PixelCoord> build_regular_mask(int width, int height,
                                           const RegularGrid& grid) {
    GridDims d = grid_dims(width, height, grid);
    std::vector<PixelCoord> pts;
    pts.reserve(static_cast<size_t>(d.cols) * d.rows);
    for (int j = 0; j < d.rows; ++j) {
        int y = grid.coord(j);
        for (int i = 0; i < d.cols; ++i) {
            pts.push_back({grid.coord(i), y});
        }
    }
    return pts;
}

size_t mask_size_for(int width, int height, const RegularGrid& grid) {
    GridDims d = grid_dims(width, height, grid);
    return static_cast<size_t>(d.cols) * d.rows;
}

}  // namespace rjip
