// Timing comparison between the parallel kernels and their serial reference
// implementations. Usage: rjip_bench_kernels [width height [repeats]]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "rjip/bench.hpp"
#include "rjip/quantize.hpp"
#include "rjip/reference.hpp"

using Clock = std::chrono::steady_clock;

namespace {

template <typename Fn>
double time_ms(int repeats, Fn&& fn) {
    double best = 1e30;
    for (int r = 0; r < repeats; ++r) {
        auto t0 = Clock::now();
        fn();
        double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (ms < best) best = ms;
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
    int width = 256, height = 192, repeats = 3;
    if (argc >= 3) {
        width = std::atoi(argv[1]);
        height = std::atoi(argv[2]);
    }
    if (argc >= 4) repeats = std::atoi(argv[3]);

    std::printf("kernel benchmark on %dx%d, %d repeats, %d worker(s)\n\n", width,
                height, repeats, rjip::worker_count());
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    rjip::RasterImage img = rjip::synthetic_image(width, height, 7);

    // sparse mask covering ~1% of the pixels
    rjip::KnownPixels known;
    for (int y = 2; y < height; y += 10)
        for (int x = 2; x < width; x += 10) {
            known.positions.push_back({x, y});
            known.values.push_back({img.at(0, x, y), img.at(1, x, y), img.at(2, x, y)});
        }
    double sigma = rjip::compute_sigma(width, height, known.positions.size());
    auto weights = rjip::weights_for(sigma);

    rjip::RasterImage rec_serial, rec_parallel;
    double t_ser = time_ms(repeats, [&] {
        rec_serial = rjip::reference::shepard_direct(known, width, height, sigma);
    });
    double t_par = time_ms(repeats, [&] {
        rec_parallel = rjip::shepard_inpaint(known, width, height, *weights);
    });
    report("shepard_inpaint", t_ser, t_par);
    double check = rjip::reference::mse_direct(rec_serial, rec_parallel);
    if (check > 1e-12) {
        std::printf("MISMATCH: shepard kernels disagree (mse %g)\n", check);
        return 1;
    }

    volatile double sink = 0.0;
    t_ser = time_ms(repeats, [&] { sink = rjip::reference::mse_direct(img, rec_parallel); });
    t_par = time_ms(repeats, [&] { sink = rjip::mse(img, rec_parallel); });
    report("mse", t_ser, t_par);

    rjip::RasterImage conv;
    t_ser = time_ms(repeats, [&] { conv = rjip::reference::rgb_to_ycbcr_direct(img); });
    t_par = time_ms(repeats, [&] { conv = rjip::rgb_to_ycbcr(img); });
    report("rgb_to_ycbcr", t_ser, t_par);

    // k-means assignment: serial scan vs the parallel clustering step
    std::vector<std::array<uint8_t, 3>> colors;
    for (size_t i = 0; i < img.pixel_count(); ++i)
        colors.push_back({static_cast<uint8_t>(img.planes[0][i]),
                          static_cast<uint8_t>(img.planes[1][i]),
                          static_cast<uint8_t>(img.planes[2][i])});
    rjip::KmeansResult km = rjip::kmeans(colors, 64, 1, 5);
    std::vector<std::array<double, 3>> centers(km.codebook.size());
    for (size_t i = 0; i < centers.size(); ++i)
        centers[i] = {double(km.codebook.centers[i][0]),
                      double(km.codebook.centers[i][1]),
                      double(km.codebook.centers[i][2])};
    volatile size_t lsink = 0;
    t_ser = time_ms(repeats, [&] {
        size_t acc = 0;
        for (const auto& c : colors)
            acc += rjip::reference::nearest_scan({double(c[0]), double(c[1]), double(c[2])},
                                                 centers);
        lsink = acc;
    });
    t_par = time_ms(repeats, [&] {
        rjip::KmeansResult r = rjip::kmeans(colors, 64, 1, 1);
        lsink = r.labels.size();
    });
    report("kmeans assignment (1 iter)", t_ser, t_par);
    (void)sink;
    (void)lsink;
    return 0;
}
