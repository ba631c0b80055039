#ifndef RJIP_MASK_HPP
#define RJIP_MASK_HPP

#include <cstdint>
#include <vector>

#include "rjip/image.hpp"

namespace rjip {

// Grid spacing h as unsigned 16-bit fixed point, 8 fractional bits. This is
// the exact value written to the bitstream; all grid arithmetic runs on it so
// encoder and decoder enumerate identical masks.
struct RegularGrid {
    uint16_t h_fixed = 256;  // h = h_fixed / 256, h >= 1

    double h() const { return h_fixed / 256.0; }
    static RegularGrid from_real(double h);

    // Grid coordinate for index i: round(i*h) with round-half-up, integer-exact.
    int coord(int i) const {
        return static_cast<int>((2 * static_cast<int64_t>(i) * h_fixed + 256) / 512);
    }
};

// Number of grid indices whose rounded coordinate stays below `extent`.
int grid_points_along(const RegularGrid& grid, int extent);

// Grid points (round(i*h), round(j*h)) in row-major grid order. This order is
// the canonical coding order for prediction and PPM contexts.
std::vector<PixelCoord> build_regular_mask(int width, int height, const RegularGrid& grid);

// Equals build_regular_mask(...).size() without materialising the list.
size_t mask_size_for(int width, int height, const RegularGrid& grid);

// Grid dimensions (cols, rows) of the mask layout.
struct GridDims {
    int cols = 0;
    int rows = 0;
};
GridDims grid_dims(int width, int height, const RegularGrid& grid);

}  // namespace rjip

#endif
