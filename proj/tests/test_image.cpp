#include "scanpick/error.hpp"
#include "scanpick/image.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace scanpick {
namespace {

using testing::direct_sum;
using testing::from_rows;
using testing::random_image;

TEST(Micrograph, RejectsBadConstruction) {
    EXPECT_THROW(Micrograph(0, 3, {}), InputDomainError);
    EXPECT_THROW(Micrograph(2, 2, {1, 2, 3}), InputDomainError);
    EXPECT_THROW(Micrograph(1, 1, {std::numeric_limits<double>::quiet_NaN()}), InputDomainError);
    EXPECT_THROW(Micrograph(1, 1, {std::numeric_limits<double>::infinity()}), InputDomainError);
}

TEST(IntegralImage, TwoByTwoTotal) {
    const auto ii = build_integral(from_rows({{1, 2}, {3, 4}}));
    EXPECT_EQ(ii.entry(2, 2), 10.0);
    EXPECT_EQ(ii.entry(1, 2), 3.0);
    EXPECT_EQ(ii.entry(2, 1), 4.0);
}

TEST(IntegralImage, SinglePixel) {
    EXPECT_EQ(build_integral(from_rows({{5}})).entry(1, 1), 5.0);
}

TEST(IntegralImage, GuardRowAndColumnAreZero) {
    const auto ii = build_integral(random_image(7, 5, 3));
    for (int c = 0; c <= 7; ++c) EXPECT_EQ(ii.entry(0, c), 0.0);
    for (int r = 0; r <= 5; ++r) EXPECT_EQ(ii.entry(r, 0), 0.0);
}

TEST(IntegralImage, MatchesBruteForcePartialSums) {
    const auto img = random_image(16, 16, 11);
    const auto ii = build_integral(img);
    for (int r = 0; r <= 16; ++r) {
        for (int c = 0; c <= 16; ++c) {
            double expected = 0.0;
            for (int i = 0; i < r; ++i) {
                for (int j = 0; j < c; ++j) expected += img.at(i, j);
            }
            EXPECT_NEAR(ii.entry(r, c), expected, 1e-12) << r << "," << c;
        }
    }
}

TEST(WindowSum, SmallCases) {
    const auto ii = build_integral(from_rows({{1, 2}, {3, 4}}));
    EXPECT_EQ(window_sum(ii, 0, 0, 2), 10.0);
    EXPECT_EQ(window_sum(ii, 1, 1, 1), 4.0);
    const auto w = window_stats(ii, 0, 0, 2);
    EXPECT_EQ(w.mean, 2.5);
}

TEST(WindowSum, AllSide3WindowsOfRandom8x8) {
    const auto img = random_image(8, 8, 5);
    const auto ii = build_integral(img);
    int windows = 0;
    for (int r = 0; r + 3 <= 8; ++r) {
        for (int c = 0; c + 3 <= 8; ++c) {
            EXPECT_NEAR(window_sum(ii, r, c, 3), direct_sum(img, r, c, 3), 1e-9);
            ++windows;
        }
    }
    EXPECT_EQ(windows, 36);
}

TEST(WindowSum, OutOfBoundsThrows) {
    const auto ii = build_integral(random_image(4, 3, 1));
    EXPECT_THROW(window_sum(ii, 0, 0, 4), InputDomainError);
    EXPECT_THROW(window_sum(ii, 1, 2, 3), InputDomainError);
    EXPECT_THROW(window_sum(ii, -1, 0, 1), InputDomainError);
    EXPECT_THROW(window_sum(ii, 0, 0, 0), InputDomainError);
}

// Property: every in-bounds window matches direct summation within 1e-9 * side^2 * max|pixel|,
// and the full window equals the total.
TEST(WindowSum, PropertyAgainstDirectSummation) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed);
        const int w = rng.uniform_int(1, 20);
        const int h = rng.uniform_int(1, 20);
        const auto img = random_image(w, h, seed + 1000, -50.0, 50.0);
        const auto ii = build_integral(img);
        double peak = 0.0;
        for (double v : img.pixels()) peak = std::max(peak, std::abs(v));
        for (int side = 1; side <= std::min(w, h); ++side) {
            for (int r = 0; r + side <= h; ++r) {
                for (int c = 0; c + side <= w; ++c) {
                    ASSERT_NEAR(window_sum(ii, r, c, side), direct_sum(img, r, c, side),
                                1e-9 * side * side * peak);
                }
            }
        }
        const double total = std::accumulate(img.pixels().begin(), img.pixels().end(), 0.0);
        EXPECT_NEAR(ii.entry(h, w), total, 1e-9 * w * h * peak);
    }
}

TEST(Downsample, BlockMean) {
    const auto out = downsample2x(from_rows({{1, 2}, {3, 4}}));
    ASSERT_EQ(out.width(), 1);
    ASSERT_EQ(out.height(), 1);
    EXPECT_EQ(out.at(0, 0), 2.5);
}

TEST(Downsample, ConstantStaysConstant) {
    const auto out = downsample2x(Micrograph::filled(4, 4, 0.75));
    EXPECT_EQ(out, Micrograph::filled(2, 2, 0.75));
}

TEST(Downsample, OddTrailingRowAndColumnDropped) {
    const auto img = random_image(5, 5, 9);
    const auto out = downsample2x(img);
    ASSERT_EQ(out.width(), 2);
    ASSERT_EQ(out.height(), 2);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const double manual = (img.at(2 * r, 2 * c) + img.at(2 * r, 2 * c + 1) +
                                   img.at(2 * r + 1, 2 * c) + img.at(2 * r + 1, 2 * c + 1)) /
                                  4.0;
            EXPECT_NEAR(out.at(r, c), manual, 1e-15);
        }
    }
}

TEST(Downsample, NonSquareDims) {
    const auto out = downsample2x(random_image(7, 4, 2));
    EXPECT_EQ(out.width(), 3);
    EXPECT_EQ(out.height(), 2);
}

TEST(Downsample, PreservesMeanForEvenDims) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto img = random_image(2 * (1 + seed % 7), 2 * (1 + seed % 5), seed);
        const auto out = downsample2x(img);
        const auto mean = [](const Micrograph& m) {
            return std::accumulate(m.pixels().begin(), m.pixels().end(), 0.0) /
                   static_cast<double>(m.size());
        };
        EXPECT_NEAR(mean(out), mean(img), 1e-12);
    }
}

TEST(Downsample, TooSmallThrows) {
    EXPECT_THROW(downsample2x(random_image(1, 4, 1)), InputDomainError);
    EXPECT_THROW(downsample2x(random_image(4, 1, 1)), InputDomainError);
}

TEST(Normalize, DividesByMax) {
    const auto out = normalize_max1(from_rows({{0, 2}, {4, 1}}));
    EXPECT_EQ(out, from_rows({{0, 0.5}, {1, 0.25}}));
}

TEST(Normalize, ConstantOneUnchanged) {
    const auto img = Micrograph::filled(3, 3, 1.0);
    EXPECT_EQ(normalize_max1(img), img);
}

TEST(Normalize, MaxIsExactlyOne) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto out = normalize_max1(random_image(9, 6, seed, -3.0, 17.0));
        EXPECT_EQ(*std::max_element(out.pixels().begin(), out.pixels().end()), 1.0);
    }
}

TEST(Normalize, NonPositiveMaxThrows) {
    EXPECT_THROW(normalize_max1(Micrograph::filled(2, 2, 0.0)), InputDomainError);
    EXPECT_THROW(normalize_max1(Micrograph::filled(2, 2, -1.0)), InputDomainError);
}

}  // namespace
}  // namespace scanpick
