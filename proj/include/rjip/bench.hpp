#ifndef RJIP_BENCH_HPP
#define RJIP_BENCH_HPP

#include <string>

#include "rjip/codec.hpp"

namespace rjip {

// One rate-distortion measurement. `average` rows aggregate a corpus at one
// (mode, ratio) and leave the per-image fields empty in the CSV.
struct RDPoint {
    std::string image;
    Mode mode = Mode::ScalarRgb;
    double ratio_requested = 0.0;
    double ratio_achieved = 0.0;
    double mse_value = 0.0;
    double encode_seconds = 0.0;
    double h_y = 0.0;
    int q_y = 0;
    double h_c = 0.0;
    int q_c = 0;
    double f = -1.0;
    int k = 0;
    long long distinct_colors = -1;
    bool average = false;
};

// CSV schema: image,mode,ratio_requested,ratio_achieved,mse,encode_s,
//             h_y,q_y,h_c,q_c,f,k,distinct_colours
std::string rd_csv_header();
std::string rd_csv_row(const RDPoint& p);

RDPoint rd_point_from(const std::string& image_id, double ratio_requested,
                      double encode_seconds, const EncodeResult& result);

struct SweepOptions {
    std::vector<double> ratios{20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120};
    std::vector<Mode> modes{Mode::ScalarRgb, Mode::ScalarLp, Mode::VectorRgb};
    EncodeOptions enc;
};

struct SweepOutcome {
    std::vector<RDPoint> points;    // per-image rows then average rows
    size_t failed_jobs = 0;
    size_t unreadable_files = 0;
};

// Runs (image, mode, ratio) jobs, in parallel when OpenMP is available, and
// appends per-(mode, ratio) corpus averages. Row order is deterministic.
SweepOutcome sweep_corpus(const std::vector<std::string>& ppm_paths,
                          const SweepOptions& opts, bool verbose);

// Distinct rounded RGB triples in an image.
size_t count_distinct_colors(const RasterImage& img);

// Deterministic photographic-ish test image: smooth multi-scale gradients,
// a few soft shapes, light noise.
RasterImage synthetic_image(int width, int height, uint32_t seed);

}  // namespace rjip

#endif
