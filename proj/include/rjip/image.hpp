#ifndef RJIP_IMAGE_HPP
#define RJIP_IMAGE_HPP

#include <array>
#include <cstdint>
#include <string>

#include "rjip/common.hpp"

namespace rjip {

enum class ColorSpace : uint8_t { RGB, YCbCr };

struct PixelCoord {
    int x = 0;  // column
    int y = 0;  // row
    bool operator==(const PixelCoord&) const = default;
};

// Three real-valued planes in [0,255], row-major. Plane 0 is R or Y depending
// on the space tag. Samples stay real internally; rounding to integers happens
// only at file I/O and quantisation boundaries.
struct RasterImage {
    int width = 0;
    int height = 0;
    ColorSpace space = ColorSpace::RGB;
    std::array<Plane, 3> planes;

    RasterImage() = default;
    RasterImage(int w, int h, ColorSpace s = ColorSpace::RGB)
        : width(w), height(h), space(s) {
        for (auto& p : planes) p.assign(static_cast<size_t>(w) * h, 0.0);
    }

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    double at(int c, int x, int y) const { return planes[c][index(x, y)]; }
    double& at(int c, int x, int y) { return planes[c][index(x, y)]; }
};

// Binary P6, maxval 255. The writer emits the canonical header
// "P6\n<w> <h>\n255\n"; the reader also accepts whitespace variations and
// '#' comments. Parse failures name the offending byte offset.
RasterImage load_ppm(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> save_ppm(const RasterImage& img);
RasterImage load_ppm_file(const std::string& path);
void save_ppm_file(const RasterImage& img, const std::string& path);

// Full-range BT.601 (JPEG convention), clamped to [0,255]. The inverse is the
// exact matrix inverse of the forward coefficients.
RasterImage rgb_to_ycbcr(const RasterImage& img);
RasterImage ycbcr_to_rgb(const RasterImage& img);

// Mean squared error over all 3*w*h samples. Both images must be RGB with
// equal dimensions.
double mse(const RasterImage& a, const RasterImage& b);

// Same, over an arbitrary set of planes (used for per-group errors in YCbCr).
double mean_sq_err(const std::vector<const Plane*>& a,
                   const std::vector<const Plane*>& b);

}  // namespace rjip

#endif
