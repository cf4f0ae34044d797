#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "flickermine/errors.hpp"
#include "flickermine/imageproc.hpp"
#include "oracle.hpp"

using namespace flickermine;

namespace {

GrayImage from_values(int w, int h, std::vector<double> v) { return GrayImage(w, h, std::move(v)); }

std::vector<double> values(const GrayImage& g) { return {g.pixels().begin(), g.pixels().end()}; }

}  // namespace

TEST(GrayImage, ConstructorValidates) {
    EXPECT_THROW(GrayImage(0, 3, std::vector<double>{}), ImageError);
    EXPECT_THROW(GrayImage(2, 2, std::vector<double>(3, 0.5)), ImageError);
    EXPECT_THROW(GrayImage(1, 1, std::vector<double>{1.5}), ImageError);
    EXPECT_THROW(GrayImage(1, 1, std::vector<double>{std::nan("")}), ImageError);
    EXPECT_EQ(GrayImage(3, 2).size(), 6u);
    const std::vector<std::uint8_t> levels{0, 51, 255};
    const auto g = GrayImage::from_u8(3, 1, levels);
    EXPECT_EQ(g.at(1, 0), 51 / 255.0);
    EXPECT_EQ(g.at(2, 0), 1.0);
}

TEST(ToGray, LumaWeights) {
    RgbImage rgb{3, 1, {255, 0, 0, 0, 255, 0, 255, 255, 255}};
    const auto g = to_gray(rgb);
    EXPECT_NEAR(g.at(0, 0), 0.299, 1e-12);
    EXPECT_NEAR(g.at(1, 0), 0.587, 1e-12);
    EXPECT_NEAR(g.at(2, 0), 1.0, 1e-12);
    EXPECT_THROW(to_gray(RgbImage{}), ImageError);
}

TEST(Crop, CopiesRectangle) {
    const auto img = fixtures::noise_image(10, 8, 1);
    const auto c = crop(img, {2, 3, 4, 2});
    ASSERT_EQ(c.width(), 4);
    ASSERT_EQ(c.height(), 2);
    EXPECT_EQ(c.at(0, 0), img.at(2, 3));
    EXPECT_EQ(c.at(3, 1), img.at(5, 4));
    EXPECT_THROW(crop(img, {8, 0, 4, 2}), ImageError);
}

TEST(Ncc, HandComputedValues) {
    const auto a = from_values(2, 2, {0.1, 0.2, 0.3, 0.4});
    EXPECT_NEAR(ncc(a, from_values(2, 2, {0.3, 0.5, 0.7, 0.9})), 1.0, 1e-12);
    EXPECT_NEAR(ncc(a, from_values(2, 2, {0.4, 0.3, 0.2, 0.1})), -1.0, 1e-12);
    EXPECT_NEAR(ncc(from_values(2, 2, {0, 1, 0, 1}), from_values(2, 2, {0, 1, 1, 0})), 0.0, 1e-12);
    // devs (-1.5,-0.5,0.5,1.5) and (-1,-1,1,1): 4 / sqrt(5 * 4)
    EXPECT_NEAR(ncc(from_values(4, 1, {0.0, 0.1, 0.2, 0.3}), from_values(4, 1, {0.2, 0.2, 0.4, 0.4})),
                4.0 / std::sqrt(20.0), 1e-12);
}

TEST(Ncc, FlatPatchesAndSizeMismatch) {
    const auto a = fixtures::noise_image(4, 4, 2);
    EXPECT_THROW(ncc(a, fixtures::flat_image(4, 4, 0.5)), ZeroVarianceError);
    EXPECT_THROW(ncc(fixtures::flat_image(4, 4, 0.5), a), ZeroVarianceError);
    EXPECT_THROW(ncc(a, fixtures::noise_image(4, 3, 2)), ImageError);
}

TEST(Ncc, InvariantToAffineIntensityChange) {
    const auto a = fixtures::noise_image(9, 7, 3);
    const auto b = fixtures::noise_image(9, 7, 4);
    std::vector<double> scaled;
    for (double v : a.pixels()) scaled.push_back(0.05 + 0.5 * v);
    EXPECT_NEAR(ncc(from_values(9, 7, scaled), b), ncc(a, b), 1e-12);
}

TEST(Ncc, AgreesWithDirectSummation) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto a = fixtures::noise_image(6, 5, 100 + s);
        const auto b = fixtures::noise_image(6, 5, 200 + s);
        EXPECT_NEAR(ncc(a, b), *oracle::direct_ncc(values(a), values(b)), 1e-12);
    }
}

TEST(MatchTemplate, FindsPlantedPatch) {
    auto region = fixtures::noise_image(30, 20, 5);
    const auto templ = fixtures::noise_image(6, 5, 6);
    fixtures::paste(region, templ, 17, 9);
    const auto m = match_template(templ, region);
    EXPECT_EQ(m.offset_x, 17);
    EXPECT_EQ(m.offset_y, 9);
    EXPECT_NEAR(m.ncc, 1.0, 1e-12);
}

TEST(MatchTemplate, TiesGoToSmallestRowThenColumn) {
    // Sixteenths on a 16x16 region keep every sum exact, so the three copies score identically.
    std::mt19937_64 rng(7);
    std::vector<double> t(16);
    for (auto& v : t) v = static_cast<double>(1 + rng() % 15) / 16.0;
    const auto templ = from_values(4, 4, t);
    auto region = fixtures::flat_image(16, 16, 0.5);
    fixtures::paste(region, templ, 2, 9);
    fixtures::paste(region, templ, 10, 3);
    fixtures::paste(region, templ, 6, 3);
    const auto m = match_template(templ, region);
    EXPECT_EQ(m.offset_x, 6);
    EXPECT_EQ(m.offset_y, 3);
}

TEST(MatchTemplate, SkipsFlatWindows) {
    const auto templ = fixtures::noise_image(3, 3, 8);
    auto region = fixtures::flat_image(12, 12, 0.3);
    fixtures::paste(region, fixtures::noise_image(3, 3, 9), 8, 8);
    const auto m = match_template(templ, region);
    EXPECT_GE(m.offset_x, 6);
    EXPECT_GE(m.offset_y, 6);
}

TEST(MatchTemplate, DegenerateInputs) {
    EXPECT_THROW(match_template(fixtures::flat_image(3, 3, 0.2), fixtures::noise_image(10, 10, 1)), ZeroVarianceError);
    EXPECT_THROW(match_template(fixtures::noise_image(3, 3, 1), fixtures::flat_image(10, 10, 0.2)), ZeroVarianceError);
    EXPECT_THROW(match_template(fixtures::noise_image(11, 3, 1), fixtures::noise_image(10, 10, 1)), ImageError);
    const auto same = fixtures::noise_image(5, 5, 1);
    EXPECT_EQ(match_template(same, same).offset_x, 0);
}

TEST(MatchTemplate, AgreesWithExhaustiveOracle) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 40; ++i) {
        const int tw = 2 + static_cast<int>(rng() % 6);
        const int th = 2 + static_cast<int>(rng() % 6);
        const int rw = tw + static_cast<int>(rng() % 10);
        const int rh = th + static_cast<int>(rng() % 10);
        const auto templ = fixtures::noise_image(tw, th, rng());
        const auto region = fixtures::noise_image(rw, rh, rng());
        const auto m = match_template(templ, region);
        const auto o = oracle::direct_match(values(templ), tw, th, values(region), rw, rh);
        ASSERT_TRUE(o);
        EXPECT_EQ(m.offset_x, o->x);
        EXPECT_EQ(m.offset_y, o->y);
        EXPECT_NEAR(m.ncc, o->ncc, 1e-9);
    }
}
