#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "flickermine/errors.hpp"
#include "flickermine/geometry.hpp"

using namespace flickermine;

TEST(Iou, HandComputedFixtures) {
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 5, 10, 10}), 25.0 / 175.0);
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {2, 2, 5, 5}), 0.25);
    EXPECT_DOUBLE_EQ(iou({0, 0, 4, 2}, {1, 0, 4, 2}), 0.6);
    EXPECT_DOUBLE_EQ(iou({1.5, 1.5, 2, 2}, {2.5, 1.5, 2, 2}), 2.0 / 6.0);
}

TEST(Iou, IdentityIsOne) {
    EXPECT_EQ(iou({3, 4, 5, 6}, {3, 4, 5, 6}), 1.0);
    EXPECT_EQ(iou({0.1, 0.2, 1e-3, 1e-3}, {0.1, 0.2, 1e-3, 1e-3}), 1.0);
}

TEST(Iou, DisjointAndTouchingAreZero) {
    EXPECT_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);
    EXPECT_EQ(iou({0, 0, 10, 10}, {0, 10, 10, 10}), 0.0);
    EXPECT_EQ(iou({0, 0, 10, 10}, {10, 10, 3, 3}), 0.0);
    EXPECT_EQ(iou({0, 0, 1, 1}, {50, 50, 1, 1}), 0.0);
}

TEST(Iou, SymmetricAndBoundedOnRandomPairs) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(0, 50), size(0.5, 30);
    for (int i = 0; i < 2000; ++i) {
        const BoundingBox a{pos(rng), pos(rng), size(rng), size(rng)};
        const BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)};
        const double ab = iou(a, b);
        EXPECT_EQ(ab, iou(b, a));
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
    }
}

TEST(EnlargeClamped, GrowsEachSideAndClips) {
    EXPECT_EQ(enlarge_clamped({50, 40, 10, 10}, 5, 160, 120), (BoundingBox{45, 35, 20, 20}));
    EXPECT_EQ(enlarge_clamped({50, 50, 10, 10}, 100, 160, 120), (BoundingBox{0, 0, 160, 120}));
    EXPECT_EQ(enlarge_clamped({2, 100, 10, 10}, 5, 160, 112), (BoundingBox{0, 95, 17, 17}));
    EXPECT_EQ(enlarge_clamped({2, 3, 4, 5}, 0, 160, 120), (BoundingBox{2, 3, 4, 5}));
}

TEST(Interpolate, EndpointsAreExact) {
    const BoundingBox a{0.1, 0.7, 3.3, 9.1};
    const BoundingBox b{10.3, 2.9, 4.4, 1.7};
    EXPECT_EQ(interpolate(a, b, 0.0), a);
    EXPECT_EQ(interpolate(a, b, 1.0), b);
    EXPECT_EQ(interpolate({0, 0, 10, 20}, {4, 6, 12, 20}, 0.5), (BoundingBox{2, 3, 11, 20}));
    EXPECT_EQ(interpolate({0, 0, 10, 20}, {4, 8, 12, 20}, 0.25), (BoundingBox{1, 2, 10.5, 20}));
}

TEST(Interpolate, RejectsParameterOutsideUnitInterval) {
    const BoundingBox a{0, 0, 1, 1};
    EXPECT_THROW(interpolate(a, a, -0.1), InvalidInput);
    EXPECT_THROW(interpolate(a, a, 1.5), InvalidInput);
    EXPECT_THROW(interpolate(a, a, std::nan("")), InvalidInput);
}

TEST(PixelRect, EdgesRoundHalfAwayAndClamp) {
    EXPECT_EQ(to_pixel_rect({1.5, 2.4, 3.0, 3.0}, 100, 100), (PixelRect{2, 2, 3, 3}));
    EXPECT_EQ(to_pixel_rect({0.49, 0.5, 9.9, 9.0}, 100, 100), (PixelRect{0, 1, 10, 9}));
    EXPECT_EQ(to_pixel_rect({150, 110, 20, 20}, 160, 120), (PixelRect{150, 110, 10, 10}));
    EXPECT_FALSE(to_pixel_rect({0, 0, 0.4, 0.4}, 100, 100));
    EXPECT_FALSE(to_pixel_rect({200, 10, 5, 5}, 160, 120));
    EXPECT_EQ(to_box(PixelRect{1, 2, 3, 4}), (BoundingBox{1, 2, 3, 4}));
}
