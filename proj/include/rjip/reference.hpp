#ifndef RJIP_REFERENCE_HPP
#define RJIP_REFERENCE_HPP

#include "rjip/image.hpp"
#include "rjip/inpaint.hpp"

namespace rjip::reference {

// Serial counterparts of the parallel kernels, written as direct loops. They
// are kept deliberately independent of the production code paths: tests use
// them as oracles and the kernel benchmark compares against them.

// Per-pixel gather over every known sample, truncated Gaussian evaluated
// directly.
RasterImage shepard_direct(const KnownPixels& known, int width, int height,
                           double sigma);

double mse_direct(const RasterImage& a, const RasterImage& b);

// Nearest centre by linear scan, squared Euclidean, ties to the lowest index.
size_t nearest_scan(const std::array<double, 3>& color,
                    const std::vector<std::array<double, 3>>& centers);

RasterImage rgb_to_ycbcr_direct(const RasterImage& img);

}  // namespace rjip::reference

#endif
