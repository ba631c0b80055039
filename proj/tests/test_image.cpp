#include <cstdlib>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rjip/bench.hpp"
#include "rjip/image.hpp"
#include "rjip/reference.hpp"

using namespace rjip;

TEST_CASE("ppm 1x1 maps bytes directly") {
    std::vector<uint8_t> bytes = {'P', '6', '\n', '1', ' ', '1', '\n',
                                  '2', '5', '5', '\n', 10, 20, 30};
    RasterImage img = load_ppm(bytes);
    CHECK(img.width == 1);
    CHECK(img.height == 1);
    CHECK(img.planes[0][0] == 10.0);
    CHECK(img.planes[1][0] == 20.0);
    CHECK(img.planes[2][0] == 30.0);
}

TEST_CASE("ppm canonical round-trip is byte identical") {
    std::mt19937 rng(11);
    RasterImage img(7, 5);
    for (auto& p : img.planes)
        for (auto& v : p) v = rng() % 256;
    auto bytes = save_ppm(img);
    RasterImage back = load_ppm(bytes);
    auto again = save_ppm(back);
    CHECK(bytes == again);
}

TEST_CASE("ppm errors name the byte offset") {
    SUBCASE("truncated payload") {
        std::vector<uint8_t> bytes = {'P', '6', '\n', '2', ' ', '2', '\n',
                                      '2', '5', '5', '\n'};
        for (int i = 0; i < 11; ++i) bytes.push_back(1);  // 11 of 12 bytes
        CHECK_THROWS_AS(load_ppm(bytes), ParseError);
    }
    SUBCASE("bad maxval") {
        std::vector<uint8_t> bytes = {'P', '6', '\n', '1', ' ', '1', '\n',
                                      '6', '5', '\n', 1, 2, 3};
        CHECK_THROWS_AS(load_ppm(bytes), ParseError);
    }
    SUBCASE("wrong magic") {
        std::vector<uint8_t> bytes = {'P', '5', '\n'};
        CHECK_THROWS_AS(load_ppm(bytes), ParseError);
    }
    SUBCASE("comments in header are accepted") {
        std::string s = "P6\n# a comment\n1 1\n255\n";
        std::vector<uint8_t> bytes(s.begin(), s.end());
        bytes.insert(bytes.end(), {9, 8, 7});
        RasterImage img = load_ppm(bytes);
        CHECK(img.planes[2][0] == 7.0);
    }
}

TEST_CASE("ycbcr conversion fixed points") {
    RasterImage img(1, 1);
    SUBCASE("grey is a fixed point") {
        for (auto& p : img.planes) p[0] = 128.0;
        RasterImage ycc = rgb_to_ycbcr(img);
        CHECK(ycc.planes[0][0] == doctest::Approx(128.0).epsilon(1e-12));
        CHECK(ycc.planes[1][0] == doctest::Approx(128.0).epsilon(1e-12));
        CHECK(ycc.planes[2][0] == doctest::Approx(128.0).epsilon(1e-12));
    }
    SUBCASE("pure red") {
        img.planes[0][0] = 255.0;
        img.planes[1][0] = 0.0;
        img.planes[2][0] = 0.0;
        RasterImage ycc = rgb_to_ycbcr(img);
        CHECK(ycc.planes[0][0] == doctest::Approx(76.245).epsilon(1e-9));
        CHECK(ycc.planes[1][0] == doctest::Approx(84.97232).epsilon(1e-9));
        CHECK(ycc.planes[2][0] == 255.0);  // 255.5 clamped
    }
}

TEST_CASE("ycbcr round-trip error is bounded by 1.0 per channel") {
    // 64^3 sampled grid by default; full 16.7M sweep with RJIP_SLOW_TESTS=1
    const bool slow = std::getenv("RJIP_SLOW_TESTS") != nullptr;
    const int step = slow ? 1 : 4;
    double max_err = 0.0;
    RasterImage img(1, 1);
    for (int r = 0; r < 256; r += step)
        for (int g = 0; g < 256; g += step)
            for (int b = 0; b < 256; b += step) {
                img.planes[0][0] = r;
                img.planes[1][0] = g;
                img.planes[2][0] = b;
                img.space = ColorSpace::RGB;
                RasterImage back = ycbcr_to_rgb(rgb_to_ycbcr(img));
                for (int c = 0; c < 3; ++c)
                    max_err = std::max(max_err,
                                       std::abs(back.planes[c][0] - img.planes[c][0]));
            }
    CHECK(max_err <= 1.0);
}

TEST_CASE("ycbcr conversion matches the serial reference") {
    RasterImage img = synthetic_image(33, 21, 3);
    RasterImage a = rgb_to_ycbcr(img);
    RasterImage b = reference::rgb_to_ycbcr_direct(img);
    double max_err = 0.0;
    for (int c = 0; c < 3; ++c)
        for (size_t i = 0; i < img.pixel_count(); ++i)
            max_err = std::max(max_err, std::abs(a.planes[c][i] - b.planes[c][i]));
    CHECK(max_err < 1e-9);
}

TEST_CASE("conversion rejects wrong space tags") {
    RasterImage img(2, 2, ColorSpace::YCbCr);
    CHECK_THROWS_AS(rgb_to_ycbcr(img), ContractError);
    RasterImage rgb(2, 2, ColorSpace::RGB);
    CHECK_THROWS_AS(ycbcr_to_rgb(rgb), ContractError);
}

TEST_CASE("mse basics") {
    RasterImage a(1, 1), b(1, 1);
    CHECK(mse(a, a) == 0.0);
    b.planes[1][0] = 3.0;
    CHECK(mse(a, b) == doctest::Approx(3.0));  // 9/3
    CHECK(mse(b, a) == mse(a, b));

    RasterImage c(2, 2);
    CHECK_THROWS_AS(mse(a, c), ContractError);
}

TEST_CASE("mse matches double-loop oracle on random pairs") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        RasterImage a(8, 8), b(8, 8);
        for (int c = 0; c < 3; ++c)
            for (size_t i = 0; i < a.pixel_count(); ++i) {
                a.planes[c][i] = rng() % 256;
                b.planes[c][i] = rng() % 256;
            }
        CHECK(mse(a, b) == doctest::Approx(oracles::mse_loops(a, b)).epsilon(1e-12));
    }
}
