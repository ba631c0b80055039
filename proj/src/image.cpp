#include "rjip/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rjip {

int worker_count() {
#ifdef _OPENMP
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("RJIP_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0 && cap < n) n = cap;
    }
    return n;
#else
    return 1;
#endif
}

namespace {

// Forward full-range BT.601 coefficients (JPEG convention).
constexpr double kF[3][3] = {
    {0.299, 0.587, 0.114},
    {-0.168736, -0.331264, 0.5},
    {0.5, -0.418688, -0.081312},
};
constexpr double kOffset[3] = {0.0, 128.0, 128.0};

struct Mat3 {
    double m[3][3];
};

constexpr Mat3 invert3(const double a[3][3]) {
    double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                 a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                 a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    Mat3 r{};
    r.m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
    r.m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
    r.m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
    r.m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
    r.m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
    r.m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
    r.m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
    r.m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
    r.m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
    return r;
}

const Mat3 kInv = invert3(kF);

int parse_ppm_int(const std::vector<uint8_t>& b, size_t& pos, const char* what) {
    // skip whitespace and '#' comments
    while (pos < b.size()) {
        uint8_t c = b[pos];
        if (c == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= b.size() || b[pos] < '0' || b[pos] > '9')
        throw ParseError(std::string("expected ") + what, pos);
    long v = 0;
    while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
        v = v * 10 + (b[pos] - '0');
        if (v > 1 << 20) throw ParseError(std::string(what) + " out of range", pos);
        ++pos;
    }
    return static_cast<int>(v);
}

}  // namespace

RasterImage load_ppm(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
        throw ParseError("not a binary PPM (P6)", 0);
    size_t pos = 2;
    int w = parse_ppm_int(bytes, pos, "width");
    int h = parse_ppm_int(bytes, pos, "height");
    int maxval = parse_ppm_int(bytes, pos, "maxval");
    if (w <= 0 || h <= 0) throw ParseError("non-positive dimensions", pos);
    if (maxval != 255) throw ParseError("unsupported maxval (must be 255)", pos);
    if (pos >= bytes.size()) throw ParseError("missing payload", pos);
    uint8_t sep = bytes[pos];
    if (sep != '\n' && sep != ' ' && sep != '\t' && sep != '\r')
        throw ParseError("expected single whitespace after maxval", pos);
    ++pos;

    size_t need = static_cast<size_t>(w) * h * 3;
    if (bytes.size() - pos < need)
        throw ParseError("truncated payload", bytes.size());

    RasterImage img(w, h, ColorSpace::RGB);
    const uint8_t* p = bytes.data() + pos;
    size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        img.planes[0][i] = p[3 * i + 0];
        img.planes[1][i] = p[3 * i + 1];
        img.planes[2][i] = p[3 * i + 2];
    }
    return img;
}

std::vector<uint8_t> save_ppm(const RasterImage& img) {
    require(img.width > 0 && img.height > 0, "save_ppm: empty image");
    char header[48];
    int hl = std::snprintf(header, sizeof header, "P6\n%d %d\n255\n", img.width,
                           img.height);
    std::vector<uint8_t> out(static_cast<size_t>(hl) + img.pixel_count() * 3);
    std::copy(header, header + hl, out.begin());
    uint8_t* p = out.data() + hl;
    size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        p[3 * i + 0] = static_cast<uint8_t>(std::lround(clamp255(img.planes[0][i])));
        p[3 * i + 1] = static_cast<uint8_t>(std::lround(clamp255(img.planes[1][i])));
        p[3 * i + 2] = static_cast<uint8_t>(std::lround(clamp255(img.planes[2][i])));
    }
    return out;
}

RasterImage load_ppm_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open '" + path + "'", 0);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return load_ppm(bytes);
}

void save_ppm_file(const RasterImage& img, const std::string& path) {
    auto bytes = save_ppm(img);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

RasterImage rgb_to_ycbcr(const RasterImage& img) {
    require(img.space == ColorSpace::RGB, "rgb_to_ycbcr: input is not RGB");
    RasterImage out(img.width, img.height, ColorSpace::YCbCr);
    const size_t n = img.pixel_count();
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        double r = img.planes[0][i], g = img.planes[1][i], b = img.planes[2][i];
        for (int c = 0; c < 3; ++c) {
            out.planes[c][i] = clamp255(kOffset[c] + kF[c][0] * r + kF[c][1] * g +
                                        kF[c][2] * b);
        }
    }
    return out;
}

RasterImage ycbcr_to_rgb(const RasterImage& img) {
    require(img.space == ColorSpace::YCbCr, "ycbcr_to_rgb: input is not YCbCr");
    RasterImage out(img.width, img.height, ColorSpace::RGB);
    const size_t n = img.pixel_count();
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        double y = img.planes[0][i] - kOffset[0];
        double cb = img.planes[1][i] - kOffset[1];
        double cr = img.planes[2][i] - kOffset[2];
        for (int c = 0; c < 3; ++c) {
            out.planes[c][i] = clamp255(kInv.m[c][0] * y + kInv.m[c][1] * cb +
                                        kInv.m[c][2] * cr);
        }
    }
    return out;
}

// Row sums are accumulated serially and combined in row order, so the result
// does not depend on the number of threads.
double mean_sq_err(const std::vector<const Plane*>& a,
                   const std::vector<const Plane*>& b) {
    require(a.size() == b.size() && !a.empty(), "mean_sq_err: plane count mismatch");
    size_t n = a[0]->size();
    for (size_t c = 0; c < a.size(); ++c)
        require(a[c]->size() == n && b[c]->size() == n,
                "mean_sq_err: plane size mismatch");

    const size_t kBlock = 4096;
    const size_t nblocks = (n + kBlock - 1) / kBlock;
    double total = 0.0;
    for (size_t c = 0; c < a.size(); ++c) {
        const double* pa = a[c]->data();
        const double* pb = b[c]->data();
        std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static) num_threads(worker_count())
        for (long long blk = 0; blk < static_cast<long long>(nblocks); ++blk) {
            size_t lo = blk * kBlock, hi = std::min(n, lo + kBlock);
            double s = 0.0;
            for (size_t i = lo; i < hi; ++i) {
                double d = pa[i] - pb[i];
                s += d * d;
            }
            partial[blk] = s;
        }
        for (double s : partial) total += s;
    }
    return total / (static_cast<double>(n) * a.size());
}

double mse(const RasterImage& a, const RasterImage& b) {
    require(a.width == b.width && a.height == b.height, "mse: dimension mismatch");
    require(a.space == ColorSpace::RGB && b.space == ColorSpace::RGB,
            "mse: both images must be RGB");
    return mean_sq_err({&a.planes[0], &a.planes[1], &a.planes[2]},
                       {&b.planes[0], &b.planes[1], &b.planes[2]});
}

}  // namespace rjip
