#ifndef RJIP_TESTS_ORACLES_HPP
#define RJIP_TESTS_ORACLES_HPP

// Independent oracles used by the tests. These deliberately avoid the
// production code paths they check.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "rjip/image.hpp"

namespace oracles {

// Plain double-loop MSE.
inline double mse_loops(const rjip::RasterImage& a, const rjip::RasterImage& b) {
    double sum = 0.0;
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < a.height; ++y)
            for (int x = 0; x < a.width; ++x) {
                double d = a.at(c, x, y) - b.at(c, x, y);
                sum += d * d;
            }
    return sum / (3.0 * a.width * a.height);
}

// Golden-section minimiser of a unimodal 1-D function on [lo, hi].
inline double golden_section_min(const std::function<double(double)>& f, double lo,
                                 double hi, int iters = 200) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

// Exhaustive two-cluster partition: optimal k-means energy for n <= ~16
// points by trying every assignment bitmask.
inline double best_two_cluster_energy(const std::vector<std::array<uint8_t, 3>>& pts) {
    const int n = static_cast<int>(pts.size());
    double best = std::numeric_limits<double>::infinity();
    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
        double sum[2][3] = {{0, 0, 0}, {0, 0, 0}};
        int cnt[2] = {0, 0};
        for (int i = 0; i < n; ++i) {
            int side = (mask >> i) & 1;
            for (int c = 0; c < 3; ++c) sum[side][c] += pts[i][c];
            ++cnt[side];
        }
        double energy = 0.0;
        for (int i = 0; i < n; ++i) {
            int side = (mask >> i) & 1;
            if (cnt[side] == 0) continue;
            for (int c = 0; c < 3; ++c) {
                double d = pts[i][c] - sum[side][c] / cnt[side];
                energy += d * d;
            }
        }
        if (energy < best) best = energy;
    }
    return best;
}

// Ideal adaptive-model code length in bits: replays the model update rule
// (increment 32, halve at 2^16, floor-or-1) charging -log2 p per symbol.
inline double adaptive_ideal_bits(const std::vector<int>& symbols, int alphabet) {
    std::vector<uint32_t> freq(alphabet, 1);
    uint32_t total = alphabet;
    double bits = 0.0;
    for (int s : symbols) {
        bits += -std::log2(static_cast<double>(freq[s]) / total);
        freq[s] += 32;
        total += 32;
        if (total >= (1u << 16)) {
            total = 0;
            for (auto& f : freq) {
                f = (f >> 1) | 1;
                total += f;
            }
        }
    }
    return bits;
}

}  // namespace oracles

#endif
