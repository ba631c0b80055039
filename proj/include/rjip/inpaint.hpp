#ifndef RJIP_INPAINT_HPP
#define RJIP_INPAINT_HPP

#include <array>
#include <memory>

#include "rjip/image.hpp"

namespace rjip {

// Reconstruction value for pixels no known sample reaches.
inline constexpr double kUncoveredFallback = 128.0;

// sigma = sqrt((width*height) / (pi * mask_size))
double compute_sigma(int width, int height, size_t mask_size);

// Truncated Gaussian on the integer offset lattice. weight(d) =
// exp(-|d|^2 / (2 sigma^2)) for |d| <= 4 sigma, exactly 0 beyond. Windows are
// precomputed once per sigma; fetch shared instances through weights_for().
class ShepardWeights {
public:
    explicit ShepardWeights(double sigma);

    double sigma() const { return sigma_; }
    double truncation_radius() const { return 4.0 * sigma_; }
    int radius_int() const { return radius_; }

    // 0 outside the truncation disk.
    double weight(int dx, int dy) const {
        if (dx < -radius_ || dx > radius_ || dy < -radius_ || dy > radius_) return 0.0;
        return row(dy)[dx + radius_];
    }

    // Row dy of the window, indexed by dx + radius_int(). In-disk span for the
    // row is [span_lo(dy), span_hi(dy)] in dx; weights outside are exactly 0.
    const double* row(int dy) const {
        return table_.data() + static_cast<size_t>(dy + radius_) * (2 * radius_ + 1);
    }
    int span_lo(int dy) const { return span_lo_[dy + radius_]; }
    int span_hi(int dy) const { return span_hi_[dy + radius_]; }

private:
    double sigma_;
    int radius_;
    std::vector<double> table_;
    std::vector<int> span_lo_, span_hi_;
};

// Shared cache; sigma is quantised to 1e-6 for keying. Thread-safe.
std::shared_ptr<const ShepardWeights> weights_for(double sigma);

// The inpainting mask: stored positions with per-channel values.
struct KnownPixels {
    std::vector<PixelCoord> positions;
    std::vector<std::array<double, 3>> values;  // aligned with positions
};

// Running numerator/denominator of the Shepard average. v has one plane per
// channel; weight_sum is shared by all channels. Single writer; reads are safe
// between writes.
class AccumulatorField {
public:
    AccumulatorField(int width, int height, int channels);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }

    // Splats the pixel's truncated-Gaussian contribution over its window.
    void add_known_pixel(PixelCoord pos, const std::array<double, 3>& value,
                         const ShepardWeights& w);

    // v_c += delta * w over the window; used for incremental tonal updates.
    void patch_known_pixel(PixelCoord pos, int channel, double delta,
                           const ShepardWeights& w);

    // v/W per channel, or the 128 fallback where no weight reaches.
    std::array<double, 3> predict_at(PixelCoord pos) const {
        size_t i = index(pos);
        std::array<double, 3> out{kUncoveredFallback, kUncoveredFallback,
                                  kUncoveredFallback};
        if (weight_sum_[i] > 0.0) {
            for (int c = 0; c < channels_; ++c) out[c] = value_sum_[c][i] / weight_sum_[i];
        }
        return out;
    }
    double predict_at(PixelCoord pos, int channel) const {
        size_t i = index(pos);
        return weight_sum_[i] > 0.0 ? value_sum_[channel][i] / weight_sum_[i]
                                    : kUncoveredFallback;
    }

    double weight_sum_at(size_t i) const { return weight_sum_[i]; }
    double value_sum_at(int c, size_t i) const { return value_sum_[c][i]; }
    const Plane& weight_sums() const { return weight_sum_; }
    const Plane& value_sums(int c) const { return value_sum_[c]; }

    size_t index(PixelCoord p) const {
        return static_cast<size_t>(p.y) * width_ + p.x;
    }

    // Merges another accumulator (same dims) by simple summation.
    void merge(const AccumulatorField& other);

private:
    int width_, height_, channels_;
    Plane weight_sum_;
    std::array<Plane, 3> value_sum_;
};

// Full Shepard reconstruction: known pixels are copied verbatim, everything
// else is the weighted average Eq-style v/W. Parallel over mask points with
// per-thread accumulators.
RasterImage shepard_inpaint(const KnownPixels& known, int width, int height,
                            const ShepardWeights& weights);

// Reconstruction planes from an already-built accumulator plus the stored
// values to copy at mask positions. `channels` planes are produced.
std::vector<Plane> finalize_reconstruction(
    const AccumulatorField& acc, const std::vector<PixelCoord>& positions,
    const std::vector<std::array<double, 3>>& stored);

}  // namespace rjip

#endif
