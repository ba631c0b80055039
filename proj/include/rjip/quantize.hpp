#ifndef RJIP_QUANTIZE_HPP
#define RJIP_QUANTIZE_HPP

#include <array>
#include <cstdint>

#include "rjip/image.hpp"
#include "rjip/inpaint.hpp"

namespace rjip {

// Uniform scalar quantisation to q levels over [0,255]. Levels map to
// interval midpoints on dequantisation (clamped so outputs stay in range).
struct UniformQuantizer {
    int q;

    explicit UniformQuantizer(int levels) : q(levels) {
        require(q >= 2 && q <= 256, "UniformQuantizer: q must be in [2,256]");
    }

    int quantize(double value) const {
        require(value >= 0.0 && value <= 255.0, "quantize: value out of [0,255]");
        int level = static_cast<int>(value * q / 256.0);
        return level >= q ? q - 1 : level;
    }

    double dequantize(int level) const {
        require(level >= 0 && level < q, "dequantize: level out of range");
        return std::min(255.0, (level + 0.5) * 256.0 / q);
    }
};

// Ordered palette of <= 256 integer colour vectors.
struct Codebook {
    std::vector<std::array<int, 3>> centers;

    size_t size() const { return centers.size(); }
    bool has_duplicates() const;

    // 1 byte (size-1), then 3 bytes R,G,B per centre in index order.
    void serialize(std::vector<uint8_t>& out) const;
    static Codebook deserialize(const std::vector<uint8_t>& bytes, size_t& pos);
    size_t serialized_size() const { return 1 + 3 * centers.size(); }
};

// Nearest centre, squared Euclidean, ties to the lowest index.
size_t assign_nearest(const std::array<double, 3>& color, const Codebook& cb);

struct KmeansResult {
    Codebook codebook;
    std::vector<int> labels;          // per input colour
    std::vector<double> energy_history;  // after each assignment step
    int iterations = 0;

    double energy() const {
        return energy_history.empty() ? 0.0 : energy_history.back();
    }
};

// Lloyd's algorithm. Initial centres are a seeded uniform random selection of
// k distinct input colours (all of them when fewer exist). Assignment maps to
// the nearest mean (ties to the lowest index); empty clusters are re-seeded to
// the point farthest from its centre. Stops when no label changes or after
// max_iters. Centres are rounded to integers only on output.
KmeansResult kmeans(const std::vector<std::array<uint8_t, 3>>& colors, int k,
                    uint32_t seed, int max_iters = 30);

// Best energy over `restarts` runs seeded seed, seed+1, ...
KmeansResult kmeans_best_of(const std::vector<std::array<uint8_t, 3>>& colors,
                            int k, uint32_t seed, int restarts,
                            int max_iters = 30);

// Coordinate descent over the palette: per centre, tries the 6 axis
// neighbours and keeps the best move only when the full-reconstruction MSE
// strictly decreases. Sweeps until a full sweep accepts nothing or max_sweeps.
Codebook refine_codebook(const Codebook& cb, const std::vector<int>& labels,
                         const std::vector<PixelCoord>& positions,
                         const RasterImage& original, const ShepardWeights& weights,
                         int max_sweeps = 20);

}  // namespace rjip

#endif
