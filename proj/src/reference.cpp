#include "rjip/reference.hpp"

#include <cmath>

namespace rjip::reference {

RasterImage shepard_direct(const KnownPixels& known, int width, int height,
                           double sigma) {
    require(!known.positions.empty(), "shepard_direct: empty mask");
    const double r = 4.0 * sigma;
    const double r2 = r * r;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    RasterImage out(width, height, ColorSpace::RGB);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double wsum = 0.0, vsum[3] = {0.0, 0.0, 0.0};
            bool is_known = false;
            for (size_t k = 0; k < known.positions.size(); ++k) {
                const PixelCoord p = known.positions[k];
                if (p.x == x && p.y == y) {
                    is_known = true;
                    for (int c = 0; c < 3; ++c)
                        out.at(c, x, y) = known.values[k][c];
                    break;
                }
                double d2 = static_cast<double>(p.x - x) * (p.x - x) +
                            static_cast<double>(p.y - y) * (p.y - y);
                if (d2 > r2) continue;
                double w = std::exp(-d2 * inv2s2);
                wsum += w;
                for (int c = 0; c < 3; ++c) vsum[c] += w * known.values[k][c];
            }
            if (is_known) continue;
            for (int c = 0; c < 3; ++c)
                out.at(c, x, y) = wsum > 0.0 ? vsum[c] / wsum : kUncoveredFallback;
        }
    }
    return out;
}

double mse_direct(const RasterImage& a, const RasterImage& b) {
    require(a.width == b.width && a.height == b.height,
            "mse_direct: dimension mismatch");
    double sum = 0.0;
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < a.height; ++y)
            for (int x = 0; x < a.width; ++x) {
                double d = a.at(c, x, y) - b.at(c, x, y);
                sum += d * d;
            }
    return sum / (3.0 * a.pixel_count());
}

size_t nearest_scan(const std::array<double, 3>& color,
                    const std::vector<std::array<double, 3>>& centers) {
    require(!centers.empty(), "nearest_scan: empty codebook");
    size_t best = 0;
    double best_d = -1.0;
    for (size_t i = 0; i < centers.size(); ++i) {
        double d = 0.0;
        for (int c = 0; c < 3; ++c) {
            double t = color[c] - centers[i][c];
            d += t * t;
        }
        if (best_d < 0.0 || d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

RasterImage rgb_to_ycbcr_direct(const RasterImage& img) {
    RasterImage out(img.width, img.height, ColorSpace::YCbCr);
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        double r = img.planes[0][i], g = img.planes[1][i], b = img.planes[2][i];
        out.planes[0][i] = clamp255(0.299 * r + 0.587 * g + 0.114 * b);
        out.planes[1][i] = clamp255(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b);
        out.planes[2][i] = clamp255(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b);
    }
    return out;
}

}  // namespace rjip::reference
