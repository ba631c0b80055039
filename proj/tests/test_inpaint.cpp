#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "rjip/inpaint.hpp"
#include "rjip/reference.hpp"

using namespace rjip;

namespace {

KnownPixels random_known(std::mt19937& rng, int w, int h, size_t n) {
    KnownPixels k;
    std::set<std::pair<int, int>> used;
    while (k.positions.size() < n) {
        int x = rng() % w, y = rng() % h;
        if (!used.insert({x, y}).second) continue;
        k.positions.push_back({x, y});
        k.values.push_back({double(rng() % 256), double(rng() % 256),
                            double(rng() % 256)});
    }
    return k;
}

}  // namespace

TEST_CASE("compute_sigma formula values") {
    CHECK(compute_sigma(100, 100, 100) ==
          doctest::Approx(std::sqrt(10000.0 / (100.0 * std::numbers::pi)))
              .epsilon(1e-12));
    CHECK(compute_sigma(100, 100, 100) == doctest::Approx(5.64189583).epsilon(1e-6));
    CHECK(compute_sigma(32, 16, 32 * 16) ==
          doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-12));
    CHECK_THROWS_AS(compute_sigma(10, 10, 0), ContractError);

    double prev = 1e9;
    for (size_t k = 1; k <= 64; k *= 2) {
        double s = compute_sigma(64, 64, k);
        CHECK(s < prev);
        prev = s;
    }
}

TEST_CASE("shepard weights invariants") {
    ShepardWeights w(2.5);
    CHECK(w.weight(0, 0) == 1.0);
    CHECK(w.truncation_radius() == 10.0);
    // inside: exact Gaussian
    CHECK(w.weight(3, 4) == doctest::Approx(std::exp(-25.0 / (2 * 2.5 * 2.5)))
                                .epsilon(1e-12));
    // boundary |d| = 10 is inside (<=), beyond is exactly zero
    CHECK(w.weight(6, 8) == doctest::Approx(std::exp(-100.0 / 12.5)).epsilon(1e-12));
    CHECK(w.weight(10, 1) == 0.0);
    CHECK(w.weight(11, 0) == 0.0);

    auto cached = weights_for(2.5);
    CHECK(cached->weight(3, 4) == w.weight(3, 4));
    CHECK(weights_for(2.5).get() == cached.get());  // cache hit
}

TEST_CASE("single known pixel covering the image gives a constant") {
    KnownPixels k;
    k.positions.push_back({3, 3});
    k.values.push_back({77.0, 77.0, 77.0});
    ShepardWeights w(10.0);  // radius 40 covers 8x8
    RasterImage out = shepard_inpaint(k, 8, 8, w);
    for (int c = 0; c < 3; ++c)
        for (auto v : out.planes[c]) CHECK(v == doctest::Approx(77.0).epsilon(1e-12));
}

TEST_CASE("two known pixels, equidistant query averages to 50") {
    KnownPixels k;
    k.positions.push_back({0, 3});
    k.values.push_back({0.0, 0.0, 0.0});
    k.positions.push_back({6, 3});
    k.values.push_back({100.0, 100.0, 100.0});
    ShepardWeights w(5.0);
    RasterImage out = shepard_inpaint(k, 7, 7, w);
    CHECK(out.at(0, 3, 3) == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("known pixels are copied verbatim") {
    std::mt19937 rng(17);
    KnownPixels k = random_known(rng, 10, 10, 12);
    ShepardWeights w(compute_sigma(10, 10, 12));
    RasterImage out = shepard_inpaint(k, 10, 10, w);
    for (size_t i = 0; i < k.positions.size(); ++i)
        for (int c = 0; c < 3; ++c)
            CHECK(out.at(c, k.positions[i].x, k.positions[i].y) == k.values[i][c]);
}

TEST_CASE("matches the direct gather oracle on random instances") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        int w = 8 + rng() % 25;  // 8..32
        int h = 8 + rng() % 25;
        size_t n = 1 + rng() % 40;
        n = std::min<size_t>(n, static_cast<size_t>(w) * h / 2);
        KnownPixels k = random_known(rng, w, h, n);
        double sigma = compute_sigma(w, h, n);
        RasterImage a = shepard_inpaint(k, w, h, *weights_for(sigma));
        RasterImage b = reference::shepard_direct(k, w, h, sigma);
        double max_err = 0.0;
        for (int c = 0; c < 3; ++c)
            for (size_t i = 0; i < a.pixel_count(); ++i)
                max_err = std::max(max_err,
                                   std::abs(a.planes[c][i] - b.planes[c][i]));
        CHECK(max_err < 1e-9);
    }
}

TEST_CASE("incremental accumulation equals batch under shuffled insertion") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        int w = 8 + rng() % 17, h = 8 + rng() % 17;
        size_t n = 2 + rng() % 20;
        KnownPixels k = random_known(rng, w, h, n);
        auto wt = weights_for(compute_sigma(w, h, n));
        RasterImage batch = shepard_inpaint(k, w, h, *wt);

        std::vector<size_t> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = i;
        shuffle_deterministic(order, rng);

        AccumulatorField acc(w, h, 3);
        for (size_t i : order) acc.add_known_pixel(k.positions[i], k.values[i], *wt);
        auto planes = finalize_reconstruction(acc, k.positions, k.values);
        double max_err = 0.0;
        for (int c = 0; c < 3; ++c)
            for (size_t i = 0; i < planes[c].size(); ++i)
                max_err = std::max(max_err,
                                   std::abs(planes[c][i] - batch.planes[c][i]));
        CHECK(max_err < 1e-9);
    }
}

TEST_CASE("predict_at fallback and single-pixel cases") {
    ShepardWeights w(2.0);
    AccumulatorField acc(8, 8, 3);
    SUBCASE("empty accumulator predicts 128 everywhere") {
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                auto p = acc.predict_at({x, y});
                CHECK(p[0] == 128.0);
                CHECK(p[1] == 128.0);
                CHECK(p[2] == 128.0);
            }
    }
    SUBCASE("one pixel within window dominates at its own position") {
        acc.add_known_pixel({4, 4}, {10.0, 200.0, 55.0}, w);
        CHECK(acc.predict_at({4, 4}, 0) == doctest::Approx(10.0).epsilon(1e-12));
        CHECK(acc.predict_at({4, 4}, 1) == doctest::Approx(200.0).epsilon(1e-12));
        // a neighbour inside the window sees the same single-term average
        CHECK(acc.predict_at({5, 4}, 1) == doctest::Approx(200.0).epsilon(1e-12));
        // outside the truncation radius (8): no coverage
        CHECK(acc.predict_at({4 - 8, 4}, 0) == 128.0);
    }
}

TEST_CASE("predict_at matches shepard_inpaint at non-mask positions") {
    std::mt19937 rng(37);
    int w = 16, h = 12;
    KnownPixels k = random_known(rng, w, h, 10);
    auto wt = weights_for(compute_sigma(w, h, 10));
    RasterImage full = shepard_inpaint(k, w, h, *wt);
    AccumulatorField acc(w, h, 3);
    for (size_t i = 0; i < k.positions.size(); ++i)
        acc.add_known_pixel(k.positions[i], k.values[i], *wt);
    std::set<std::pair<int, int>> mask;
    for (auto p : k.positions) mask.insert({p.x, p.y});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (mask.count({x, y})) continue;
            for (int c = 0; c < 3; ++c)
                CHECK(acc.predict_at({x, y}, c) ==
                      doctest::Approx(full.at(c, x, y)).epsilon(1e-9));
        }
}

TEST_CASE("reconstruction is a convex combination of known values") {
    std::mt19937 rng(41);
    KnownPixels k = random_known(rng, 20, 20, 15);
    auto wt = weights_for(compute_sigma(20, 20, 15));
    RasterImage out = shepard_inpaint(k, 20, 20, *wt);
    for (int c = 0; c < 3; ++c) {
        double lo = 255.0, hi = 0.0;
        for (const auto& v : k.values) {
            lo = std::min(lo, v[c]);
            hi = std::max(hi, v[c]);
        }
        for (auto v : out.planes[c]) {
            if (v == kUncoveredFallback) continue;  // uncovered corners
            CHECK(v >= lo - 1e-9);
            CHECK(v <= hi + 1e-9);
        }
    }
}

TEST_CASE("locality: a changed pixel only affects its truncation window") {
    std::mt19937 rng(43);
    int w = 24, h = 24;
    KnownPixels k = random_known(rng, w, h, 12);
    ShepardWeights wt(1.5);  // radius 6
    RasterImage before = shepard_inpaint(k, w, h, wt);
    KnownPixels k2 = k;
    k2.values[0][0] += 50.0;
    if (k2.values[0][0] > 255) k2.values[0][0] -= 100.0;
    RasterImage after = shepard_inpaint(k2, w, h, wt);
    const PixelCoord p = k.positions[0];
    const int R = wt.radius_int();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double dx = x - p.x, dy = y - p.y;
            if (dx * dx + dy * dy > double(R + 1) * (R + 1))
                CHECK(after.at(0, x, y) == before.at(0, x, y));
        }
}

TEST_CASE("empty mask is a contract error") {
    KnownPixels k;
    ShepardWeights w(2.0);
    CHECK_THROWS_AS(shepard_inpaint(k, 4, 4, w), ContractError);
}
