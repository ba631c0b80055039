#include "rjip/inpaint.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rjip {

double compute_sigma(int width, int height, size_t mask_size) {
    require(width > 0 && height > 0, "compute_sigma: empty domain");
    require(mask_size >= 1, "compute_sigma: mask_size must be >= 1");
    return std::sqrt(static_cast<double>(width) * height /
                     (std::numbers::pi * static_cast<double>(mask_size)));
}

ShepardWeights::ShepardWeights(double sigma) : sigma_(sigma) {
    require(sigma > 0.0, "ShepardWeights: sigma must be positive");
    const double r = 4.0 * sigma;
    const double r2 = r * r;
    radius_ = static_cast<int>(std::floor(r));
    const int size = 2 * radius_ + 1;
    table_.assign(static_cast<size_t>(size) * size, 0.0);
    span_lo_.assign(size, 1);
    span_hi_.assign(size, 0);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int dy = -radius_; dy <= radius_; ++dy) {
        double* row = table_.data() + static_cast<size_t>(dy + radius_) * size;
        int lo = 1, hi = 0;
        for (int dx = -radius_; dx <= radius_; ++dx) {
            double d2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
            if (d2 <= r2) {
                row[dx + radius_] = std::exp(-d2 * inv2s2);
                if (lo > hi) lo = dx;
                hi = dx;
            }
        }
        span_lo_[dy + radius_] = lo;
        span_hi_[dy + radius_] = hi;
    }
}

std::shared_ptr<const ShepardWeights> weights_for(double sigma) {
    static std::mutex mu;
    static std::map<long long, std::shared_ptr<const ShepardWeights>> cache;
    long long key = std::llround(sigma * 1e6);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto w = std::make_shared<const ShepardWeights>(sigma);
    cache.emplace(key, w);
    return w;
}

AccumulatorField::AccumulatorField(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
    require(width > 0 && height > 0, "AccumulatorField: empty domain");
    require(channels >= 1 && channels <= 3, "AccumulatorField: 1..3 channels");
    weight_sum_.assign(static_cast<size_t>(width) * height, 0.0);
    for (int c = 0; c < channels_; ++c)
        value_sum_[c].assign(static_cast<size_t>(width) * height, 0.0);
}

void AccumulatorField::add_known_pixel(PixelCoord pos,
                                       const std::array<double, 3>& value,
                                       const ShepardWeights& w) {
    const int R = w.radius_int();
    const int ylo = std::max(-R, -pos.y), yhi = std::min(R, height_ - 1 - pos.y);
    for (int dy = ylo; dy <= yhi; ++dy) {
        const double* row = w.row(dy);
        const int xlo = std::max(w.span_lo(dy), -pos.x);
        const int xhi = std::min(w.span_hi(dy), width_ - 1 - pos.x);
        if (xlo > xhi) continue;
        size_t base = static_cast<size_t>(pos.y + dy) * width_ + pos.x;
        double* ws = weight_sum_.data() + base;
        for (int dx = xlo; dx <= xhi; ++dx) ws[dx] += row[dx + R];
        for (int c = 0; c < channels_; ++c) {
            double* vs = value_sum_[c].data() + base;
            const double u = value[c];
            for (int dx = xlo; dx <= xhi; ++dx) vs[dx] += row[dx + R] * u;
        }
    }
}

void AccumulatorField::patch_known_pixel(PixelCoord pos, int channel, double delta,
                                         const ShepardWeights& w) {
    const int R = w.radius_int();
    const int ylo = std::max(-R, -pos.y), yhi = std::min(R, height_ - 1 - pos.y);
    for (int dy = ylo; dy <= yhi; ++dy) {
        const double* row = w.row(dy);
        const int xlo = std::max(w.span_lo(dy), -pos.x);
        const int xhi = std::min(w.span_hi(dy), width_ - 1 - pos.x);
        if (xlo > xhi) continue;
        size_t base = static_cast<size_t>(pos.y + dy) * width_ + pos.x;
        double* vs = value_sum_[channel].data() + base;
        for (int dx = xlo; dx <= xhi; ++dx) vs[dx] += row[dx + R] * delta;
    }
}

void AccumulatorField::merge(const AccumulatorField& other) {
    require(width_ == other.width_ && height_ == other.height_ &&
                channels_ == other.channels_,
            "AccumulatorField::merge: shape mismatch");
    for (size_t i = 0; i < weight_sum_.size(); ++i) weight_sum_[i] += other.weight_sum_[i];
    for (int c = 0; c < channels_; ++c)
        for (size_t i = 0; i < value_sum_[c].size(); ++i)
            value_sum_[c][i] += other.value_sum_[c][i];
}

RasterImage shepard_inpaint(const KnownPixels& known, int width, int height,
                            const ShepardWeights& weights) {
    require(!known.positions.empty(), "shepard_inpaint: empty mask");
    require(known.positions.size() == known.values.size(),
            "shepard_inpaint: positions/values length mismatch");
    const size_t n = known.positions.size();

    AccumulatorField acc(width, height, 3);
#ifdef _OPENMP
    const int threads = std::min<int>(worker_count(), 1 + static_cast<int>(n / 64));
#else
    const int threads = 1;
#endif
    if (threads <= 1) {
        for (size_t i = 0; i < n; ++i)
            acc.add_known_pixel(known.positions[i], known.values[i], weights);
    } else {
#ifdef _OPENMP
        // Per-thread accumulators merged in thread order: the result is
        // reproducible for a fixed thread count.
        std::vector<AccumulatorField> partial(threads,
                                              AccumulatorField(width, height, 3));
        const size_t chunk = (n + threads - 1) / threads;
#pragma omp parallel num_threads(threads)
        {
            int t = omp_get_thread_num();
            size_t lo = t * chunk, hi = std::min(n, lo + chunk);
            for (size_t i = lo; i < hi; ++i)
                partial[t].add_known_pixel(known.positions[i], known.values[i], weights);
        }
        for (int t = 0; t < threads; ++t) acc.merge(partial[t]);
#endif
    }

    auto planes = finalize_reconstruction(acc, known.positions, known.values);
    RasterImage out(width, height, ColorSpace::RGB);
    for (int c = 0; c < 3; ++c) out.planes[c] = std::move(planes[c]);
    return out;
}

std::vector<Plane> finalize_reconstruction(
    const AccumulatorField& acc, const std::vector<PixelCoord>& positions,
    const std::vector<std::array<double, 3>>& stored) {
    const int C = acc.channels();
    const size_t n = acc.weight_sums().size();
    std::vector<Plane> out(C, Plane(n));
    for (int c = 0; c < C; ++c) {
        const double* vs = acc.value_sums(c).data();
        const double* ws = acc.weight_sums().data();
        double* o = out[c].data();
#pragma omp parallel for schedule(static) num_threads(worker_count())
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            o[i] = ws[i] > 0.0 ? vs[i] / ws[i] : kUncoveredFallback;
    }
    for (size_t k = 0; k < positions.size(); ++k) {
        size_t i = acc.index(positions[k]);
        for (int c = 0; c < C; ++c) out[c][i] = stored[k][c];
    }
    return out;
}

}  // namespace rjip
