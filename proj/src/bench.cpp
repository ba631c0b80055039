#include "rjip/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <unordered_set>

namespace rjip {

std::string rd_csv_header() {
    return "image,mode,ratio_requested,ratio_achieved,mse,encode_s,h_y,q_y,h_c,q_c,"
           "f,k,distinct_colours";
}

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

std::string rd_csv_row(const RDPoint& p) {
    std::string row = p.image;
    row += ',';
    row += mode_name(p.mode);
    row += ',' + fmt(p.ratio_requested);
    row += ',' + fmt(p.ratio_achieved);
    row += ',' + fmt(p.mse_value);
    row += ',' + fmt(p.encode_seconds, "%.3f");
    row += ',' + (p.h_y > 0 ? fmt(p.h_y) : "");
    row += ',' + (p.q_y > 0 ? std::to_string(p.q_y) : "");
    row += ',' + (p.h_c > 0 ? fmt(p.h_c) : "");
    row += ',' + (p.q_c > 0 ? std::to_string(p.q_c) : "");
    row += ',' + (p.f >= 0 ? fmt(p.f) : "");
    row += ',' + (p.k > 0 ? std::to_string(p.k) : "");
    row += ',' + (p.distinct_colors >= 0 ? std::to_string(p.distinct_colors) : "");
    return row;
}

RDPoint rd_point_from(const std::string& image_id, double ratio_requested,
                      double encode_seconds, const EncodeResult& r) {
    RDPoint p;
    p.image = image_id;
    p.mode = r.header.mode;
    p.ratio_requested = ratio_requested;
    p.ratio_achieved = r.ratio_achieved;
    p.mse_value = r.rgb_mse;
    p.encode_seconds = encode_seconds;
    p.distinct_colors = static_cast<long long>(r.distinct_mask_colors);
    switch (r.header.mode) {
        case Mode::ScalarRgb:
            p.h_y = r.header.groups[0].grid.h();
            p.q_y = r.header.groups[0].q;
            break;
        case Mode::ScalarLp:
            p.h_y = r.header.groups[0].grid.h();
            p.q_y = r.header.groups[0].q;
            p.h_c = r.header.groups[1].grid.h();
            p.q_c = r.header.groups[1].q;
            p.f = r.luma_factor;
            break;
        case Mode::VectorRgb:
            p.h_y = r.header.groups[0].grid.h();
            p.k = static_cast<int>(r.header.codebook.size());
            break;
    }
    return p;
}

SweepOutcome sweep_corpus(const std::vector<std::string>& ppm_paths,
                          const SweepOptions& opts, bool verbose) {
    SweepOutcome out;

    std::vector<std::pair<std::string, RasterImage>> images;
    for (const auto& path : ppm_paths) {
        try {
            RasterImage img = load_ppm_file(path);
            std::string id = path;
            if (auto slash = id.find_last_of('/'); slash != std::string::npos)
                id = id.substr(slash + 1);
            if (auto dot = id.find_last_of('.'); dot != std::string::npos)
                id = id.substr(0, dot);
            images.emplace_back(std::move(id), std::move(img));
        } catch (const std::exception& e) {
            std::fprintf(stderr, "warning: skipping %s: %s\n", path.c_str(), e.what());
            ++out.unreadable_files;
        }
    }

    struct Job {
        size_t image_idx;
        Mode mode;
        double ratio;
    };
    std::vector<Job> jobs;
    for (size_t i = 0; i < images.size(); ++i)
        for (Mode m : opts.modes)
            for (double r : opts.ratios) jobs.push_back({i, m, r});

    std::vector<RDPoint> rows(jobs.size());
    std::vector<uint8_t> ok(jobs.size(), 0);
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long long j = 0; j < static_cast<long long>(jobs.size()); ++j) {
        const Job& job = jobs[j];
        const auto& [id, img] = images[job.image_idx];
        try {
            auto t0 = std::chrono::steady_clock::now();
            EncodeResult r = encode(img, job.ratio, job.mode, opts.enc);
            double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            rows[j] = rd_point_from(id, job.ratio, secs, r);
            ok[j] = 1;
            if (verbose)
                std::fprintf(stderr, "%s %s %g:1 -> mse %.2f (%.1fs)\n", id.c_str(),
                             mode_name(job.mode), job.ratio, r.rgb_mse, secs);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "warning: %s %s %g:1 failed: %s\n", id.c_str(),
                         mode_name(job.mode), job.ratio, e.what());
        }
    }

    for (size_t j = 0; j < jobs.size(); ++j) {
        if (ok[j])
            out.points.push_back(rows[j]);
        else
            ++out.failed_jobs;
    }

    // corpus averages per (mode, ratio)
    for (Mode m : opts.modes) {
        for (double r : opts.ratios) {
            RDPoint avg;
            avg.image = "average";
            avg.mode = m;
            avg.ratio_requested = r;
            avg.average = true;
            size_t n = 0;
            for (size_t j = 0; j < jobs.size(); ++j) {
                if (!ok[j] || jobs[j].mode != m || jobs[j].ratio != r) continue;
                avg.ratio_achieved += rows[j].ratio_achieved;
                avg.mse_value += rows[j].mse_value;
                avg.encode_seconds += rows[j].encode_seconds;
                ++n;
            }
            if (n == 0) continue;
            avg.ratio_achieved /= n;
            avg.mse_value /= n;
            avg.encode_seconds /= n;
            out.points.push_back(avg);
        }
    }
    return out;
}

size_t count_distinct_colors(const RasterImage& img) {
    std::unordered_set<uint32_t> keys;
    keys.reserve(img.pixel_count());
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        uint32_t key = 0;
        for (int c = 0; c < 3; ++c)
            key = (key << 8) |
                  static_cast<uint32_t>(std::lround(clamp255(img.planes[c][i])));
        keys.insert(key);
    }
    return keys.size();
}

RasterImage synthetic_image(int width, int height, uint32_t seed) {
    std::mt19937 rng(seed);
    auto unit = [&rng]() { return (rng() >> 8) * (1.0 / 16777216.0); };

    RasterImage img(width, height, ColorSpace::RGB);
    const double tau = 2.0 * std::numbers::pi;

    struct Wave {
        double fx, fy, phase, amp;
    };
    std::array<std::vector<Wave>, 3> waves;
    for (int c = 0; c < 3; ++c) {
        for (int o = 0; o < 4; ++o) {
            double freq = std::pow(2.0, o) * (0.7 + 0.6 * unit());
            double angle = tau * unit();
            waves[c].push_back({freq * std::cos(angle) / width,
                                freq * std::sin(angle) / height, tau * unit(),
                                40.0 / (1 + o)});
        }
    }
    struct Blob {
        double cx, cy, rx, ry;
        double color[3];
    };
    std::vector<Blob> blobs;
    for (int b = 0; b < 5; ++b) {
        Blob bl;
        bl.cx = unit() * width;
        bl.cy = unit() * height;
        bl.rx = (0.08 + 0.2 * unit()) * width;
        bl.ry = (0.08 + 0.2 * unit()) * height;
        for (int c = 0; c < 3; ++c) bl.color[c] = 255.0 * unit();
        blobs.push_back(bl);
    }

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double noise = 3.0 * (unit() - 0.5);
            for (int c = 0; c < 3; ++c) {
                double v = 128.0;
                for (const Wave& w : waves[c])
                    v += w.amp * std::sin(tau * (w.fx * x + w.fy * y) + w.phase);
                for (const Blob& b : blobs) {
                    double dx = (x - b.cx) / b.rx, dy = (y - b.cy) / b.ry;
                    double d2 = dx * dx + dy * dy;
                    if (d2 < 1.0) {
                        double t = (1.0 - d2) * (1.0 - d2);
                        v = v * (1.0 - t) + b.color[c] * t;
                    }
                }
                img.at(c, x, y) = std::floor(clamp255(v + noise));
            }
        }
    }
    return img;
}

}  // namespace rjip
