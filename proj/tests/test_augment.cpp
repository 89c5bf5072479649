#include <gtest/gtest.h>

#include <cmath>

#include "detkit/augment.hpp"
#include "detkit/rng.hpp"

using namespace detkit;

namespace {

LabeledImage solid_image(int h, int w, float value, std::vector<BBox> boxes = {},
                         std::vector<int> classes = {}) {
    LabeledImage img;
    img.image = Tensor<float>({h, w, 3}, value);
    img.boxes = std::move(boxes);
    img.classes = std::move(classes);
    img.weights.assign(img.boxes.size(), 1.0);
    return img;
}

bool boxes_inside(const LabeledImage& img) {
    for (const BBox& b : img.boxes)
        if (!(b.x1 >= 0 && b.x1 <= b.x2 && b.x2 <= img.width() && b.y1 >= 0 && b.y1 <= b.y2 &&
              b.y2 <= img.height()))
            return false;
    return true;
}

}  // namespace

TEST(TransformBoxes, IdentityKeepsEverything) {
    const std::vector<BBox> boxes{{10, 10, 50, 50}, {100, 200, 140, 260}};
    const auto out = transform_boxes(boxes, Affine{}, 640, 640, 0.25);
    ASSERT_EQ(out.size(), 2u);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        EXPECT_TRUE(out[i].kept);
        EXPECT_DOUBLE_EQ(out[i].box.x1, boxes[i].x1);
        EXPECT_DOUBLE_EQ(out[i].box.y2, boxes[i].y2);
    }
}

TEST(TransformBoxes, PureTranslation) {
    const auto out =
        transform_boxes({{10, 10, 50, 50}}, Affine::translation(320, 320), 640, 640, 0.25);
    ASSERT_TRUE(out[0].kept);
    EXPECT_DOUBLE_EQ(out[0].box.x1, 330.0);
    EXPECT_DOUBLE_EQ(out[0].box.y1, 330.0);
    EXPECT_DOUBLE_EQ(out[0].box.x2, 370.0);
    EXPECT_DOUBLE_EQ(out[0].box.y2, 370.0);
}

TEST(TransformBoxes, Rotation45DoublesHullArea) {
    // unit square spun about its own center: hull side becomes sqrt(2)
    const double rad = M_PI / 4.0;
    const Affine about_center = Affine::compose(
        Affine::translation(2.5, 2.5),
        Affine::compose(Affine::scale_rotate(1.0, rad), Affine::translation(-2.5, -2.5)));
    const auto out = transform_boxes({{2, 2, 3, 3}}, about_center, 10, 10, 0.1);
    ASSERT_TRUE(out[0].kept);
    EXPECT_NEAR(out[0].box.width(), std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(out[0].box.height(), std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(out[0].box.area(), 2.0, 1e-9);

    // point-sampling oracle: every mapped interior point falls inside the hull
    Rng rng(1);
    for (int t = 0; t < 500; ++t) {
        const auto [x, y] = about_center.apply(2.0 + rng.uniform01(), 2.0 + rng.uniform01());
        EXPECT_GE(x, out[0].box.x1 - 1e-9);
        EXPECT_LE(x, out[0].box.x2 + 1e-9);
        EXPECT_GE(y, out[0].box.y1 - 1e-9);
        EXPECT_LE(y, out[0].box.y2 + 1e-9);
    }
}

TEST(TransformBoxes, AreaScalesWithDeterminantWithoutRotation) {
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        Affine a;
        a.m = {rng.uniform(0.3, 2.0), 0, rng.uniform(0, 20),
               0, rng.uniform(0.3, 2.0), rng.uniform(0, 20)};
        const BBox b{rng.uniform(50, 100), rng.uniform(50, 100), rng.uniform(120, 200),
                     rng.uniform(120, 200)};
        const auto out = transform_boxes({b}, a, 1000, 1000, 1e-9);
        if (!out[0].kept) continue;
        // unclipped: canvas is generous
        EXPECT_NEAR(out[0].box.area(), b.area() * a.det(), 1e-6 * std::max(1.0, b.area() * a.det()));
    }
}

TEST(TransformBoxes, DropsMostlyClippedBoxes) {
    // box pushed 90% off the canvas: visible fraction 0.1 < 0.25
    const auto out =
        transform_boxes({{0, 0, 100, 100}}, Affine::translation(-90, 0), 640, 640, 0.25);
    EXPECT_FALSE(out[0].kept);
    const auto kept = transform_boxes({{0, 0, 100, 100}}, Affine::translation(-90, 0), 640, 640, 0.05);
    EXPECT_TRUE(kept[0].kept);
    EXPECT_DOUBLE_EQ(kept[0].box.x2, 10.0);
}

TEST(TransformBoxes, RejectsSingularAffine) {
    Affine a;
    a.m = {1, 2, 0, 2, 4, 0};  // rank 1
    EXPECT_THROW(transform_boxes({{0, 0, 1, 1}}, a, 10, 10, 0.5), std::invalid_argument);
}

TEST(Mosaic, PureTranslationMapsBoxesExactly) {
    AugmentConfig cfg;
    cfg.target_size = 64;
    cfg.scale_range = {1.0, 1.0};
    cfg.rotation_deg = {0.0, 0.0};
    cfg.center_jitter = 0.0;
    cfg.min_visible_frac = 0.25;

    // tiles sized exactly like the target so the quadrant fit factor is 1
    std::vector<LabeledImage> tiles;
    for (int t = 0; t < 4; ++t)
        tiles.push_back(solid_image(64, 64, 0.25f * t, {{8, 8, 24, 20}}, {t}));

    Rng rng(7);
    const LabeledImage out = mosaic(tiles, cfg, rng);
    EXPECT_EQ(out.width(), 64);
    EXPECT_EQ(out.height(), 64);
    ASSERT_EQ(out.boxes.size(), 4u);

    // quadrant translation then the exact 0.5 letterbox scale
    const double offs[4][2] = {{0, 0}, {64, 0}, {0, 64}, {64, 64}};
    for (int t = 0; t < 4; ++t) {
        const BBox& b = out.boxes[t];
        EXPECT_EQ(out.classes[t], t);
        EXPECT_DOUBLE_EQ(b.x1, (8 + offs[t][0]) * 0.5);
        EXPECT_DOUBLE_EQ(b.y1, (8 + offs[t][1]) * 0.5);
        EXPECT_DOUBLE_EQ(b.x2, (24 + offs[t][0]) * 0.5);
        EXPECT_DOUBLE_EQ(b.y2, (20 + offs[t][1]) * 0.5);
    }
}

TEST(Mosaic, StraddlingBoxIsClippedToItsQuadrant) {
    AugmentConfig cfg;
    cfg.target_size = 64;
    cfg.scale_range = {1.0, 1.0};
    cfg.rotation_deg = {0.0, 0.0};
    cfg.center_jitter = 0.0;
    cfg.min_visible_frac = 0.25;

    // box spills past the tile's right edge into the neighbouring quadrant;
    // rectangle-intersection arithmetic gives the expected clip
    std::vector<LabeledImage> tiles;
    tiles.push_back(solid_image(64, 64, 0.1f, {{40, 10, 90, 30}}, {0}));
    for (int t = 1; t < 4; ++t) tiles.push_back(solid_image(64, 64, 0.2f));

    Rng rng(9);
    const LabeledImage out = mosaic(tiles, cfg, rng);
    ASSERT_EQ(out.boxes.size(), 1u);
    // visible fraction: clipped (40..64) of (40..90) = 24/50 > 0.25, kept
    EXPECT_DOUBLE_EQ(out.boxes[0].x1, 40 * 0.5);
    EXPECT_DOUBLE_EQ(out.boxes[0].x2, 64 * 0.5);

    // push the box nearly out of the quadrant: 4/50 visible < 0.25, dropped
    tiles[0] = solid_image(64, 64, 0.1f, {{60, 10, 110, 30}}, {0});
    Rng rng2(9);
    const LabeledImage dropped = mosaic(tiles, cfg, rng2);
    EXPECT_TRUE(dropped.boxes.empty());
}

TEST(Mosaic, DeterministicPerSeed) {
    AugmentConfig cfg;
    cfg.target_size = 96;
    std::vector<LabeledImage> tiles;
    for (int t = 0; t < 4; ++t)
        tiles.push_back(solid_image(80 + 8 * t, 72 + 4 * t, 0.2f * t, {{5, 5, 30, 30}}, {t}));

    Rng a(1234), b(1234);
    const LabeledImage out1 = mosaic(tiles, cfg, a);
    const LabeledImage out2 = mosaic(tiles, cfg, b);
    EXPECT_EQ(out1.image.data, out2.image.data);
    ASSERT_EQ(out1.boxes.size(), out2.boxes.size());
    for (std::size_t i = 0; i < out1.boxes.size(); ++i)
        EXPECT_TRUE(out1.boxes[i] == out2.boxes[i]);

    Rng c(99);
    const LabeledImage out3 = mosaic(tiles, cfg, c);
    EXPECT_NE(out1.image.data, out3.image.data);
    EXPECT_THROW(mosaic({tiles[0], tiles[1]}, cfg, a), std::invalid_argument);
}

TEST(Mixup, EndpointAndBlend) {
    AugmentConfig cfg;
    cfg.mixup_range = {1.0, 1.0};
    LabeledImage a = solid_image(4, 4, 100.0f / 255.0f, {{0, 0, 2, 2}}, {0});
    LabeledImage b = solid_image(4, 4, 200.0f / 255.0f, {{1, 1, 3, 3}}, {1});
    Rng rng(5);
    const LabeledImage lam1 = mixup(a, b, cfg, rng);
    for (float v : lam1.image.data) EXPECT_FLOAT_EQ(v, 100.0f / 255.0f);
    ASSERT_EQ(lam1.weights.size(), 2u);
    EXPECT_DOUBLE_EQ(lam1.weights[0], 1.0);  // a's box at full share
    EXPECT_DOUBLE_EQ(lam1.weights[1], 0.0);  // b's box at zero share

    cfg.mixup_range = {0.3, 0.3};
    Rng rng2(5);
    const LabeledImage blended = mixup(a, b, cfg, rng2);
    for (float v : blended.image.data) EXPECT_NEAR(v, 170.0f / 255.0f, 1e-6);
    EXPECT_EQ(blended.boxes.size(), a.boxes.size() + b.boxes.size());
    EXPECT_NEAR(blended.weights[0], 0.3, 1e-12);
    EXPECT_NEAR(blended.weights[1], 0.7, 1e-12);
}

TEST(Mixup, ValuesStayInUnitRangeAndDimsChecked) {
    Rng rng(6);
    AugmentConfig cfg;
    LabeledImage a = solid_image(3, 3, 1.0f), b = solid_image(3, 3, 0.0f);
    const LabeledImage out = mixup(a, b, cfg, rng);
    for (float v : out.image.data) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
    }
    LabeledImage c = solid_image(4, 3, 0.5f);
    EXPECT_THROW(mixup(a, c, cfg, rng), std::invalid_argument);
}

TEST(Photometric, NeutralGainsAreIdentity) {
    Rng rng(7);
    Tensor<float> img({5, 4, 3});
    for (float& v : img.data) v = static_cast<float>(rng.uniform01());
    const Tensor<float> out = photometric(img, PhotometricGains{});
    for (std::size_t i = 0; i < img.data.size(); ++i) EXPECT_NEAR(out.data[i], img.data[i], 1e-6);
}

TEST(Photometric, ZeroSaturationGivesGrayscale) {
    Rng rng(8);
    Tensor<float> img({6, 6, 3});
    for (float& v : img.data) v = static_cast<float>(rng.uniform01());
    PhotometricGains g;
    g.saturation = 0.0;
    const Tensor<float> out = photometric(img, g);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            EXPECT_NEAR(out.at3(i, j, 0), out.at3(i, j, 1), 1e-6);
            EXPECT_NEAR(out.at3(i, j, 1), out.at3(i, j, 2), 1e-6);
        }
}

TEST(Photometric, BrightnessScales) {
    Tensor<float> img({1, 1, 3}, 0.5f);
    PhotometricGains g;
    g.brightness = 1.2;
    const Tensor<float> out = photometric(img, g);
    for (float v : out.data) EXPECT_NEAR(v, 0.6f, 1e-6);
}

TEST(GaussianNoise, ZeroSigmaIsIdentityAndSeedIsReplayable) {
    Rng rng(9);
    Tensor<float> img({8, 8, 3}, 0.5f);
    EXPECT_EQ(gaussian_noise(img, 0.0, rng).data, img.data);

    Rng r1(42), r2(42);
    const Tensor<float> n1 = gaussian_noise(img, 0.03, r1);
    const Tensor<float> n2 = gaussian_noise(img, 0.03, r2);
    EXPECT_EQ(n1.data, n2.data);
    EXPECT_THROW(gaussian_noise(img, -0.1, rng), std::invalid_argument);
}

TEST(GaussianNoise, MeanOfResidualsVanishes) {
    // 10^6 interior pixels at 0.5 never clamp for sigma = 0.02
    const double sigma = 0.02;
    Tensor<float> img({1000, 1000, 1}, 0.5f);
    Rng rng(10);
    const Tensor<float> noisy = gaussian_noise(img, sigma, rng);
    double sum = 0.0;
    for (std::size_t i = 0; i < noisy.data.size(); ++i) sum += noisy.data[i] - img.data[i];
    const double mean = sum / static_cast<double>(noisy.data.size());
    EXPECT_LE(std::fabs(mean), 3.0 * sigma / 1000.0);
}

TEST(Letterbox, SquareInputPassesThrough) {
    const LabeledImage src = solid_image(640, 640, 0.5f, {{10, 20, 100, 200}}, {1});
    const LabeledImage out = letterbox(src, 640, 114.0 / 255.0);
    EXPECT_EQ(out.image.data, src.image.data);
    EXPECT_TRUE(out.boxes[0] == src.boxes[0]);
}

TEST(Letterbox, WideInputGetsVerticalPadding) {
    const LabeledImage src = solid_image(320, 640, 0.25f, {{0, 0, 10, 10}}, {0});
    const LabeledImage out = letterbox(src, 640, 0.0);
    EXPECT_EQ(out.height(), 640);
    EXPECT_EQ(out.width(), 640);
    EXPECT_DOUBLE_EQ(out.boxes[0].x1, 0.0);
    EXPECT_DOUBLE_EQ(out.boxes[0].y1, 160.0);
    EXPECT_DOUBLE_EQ(out.boxes[0].x2, 10.0);
    EXPECT_DOUBLE_EQ(out.boxes[0].y2, 170.0);
    EXPECT_FLOAT_EQ(out.image.at3(0, 0, 0), 0.0f);    // pad row
    EXPECT_FLOAT_EQ(out.image.at3(320, 0, 0), 0.25f); // content row
}

TEST(Letterbox, DownscaleHalvesCoordinates) {
    const LabeledImage src = solid_image(1280, 1280, 0.5f, {{100, 200, 300, 400}}, {0});
    const LabeledImage out = letterbox(src, 640, 0.0);
    EXPECT_DOUBLE_EQ(out.boxes[0].x1, 50.0);
    EXPECT_DOUBLE_EQ(out.boxes[0].y1, 100.0);
    EXPECT_DOUBLE_EQ(out.boxes[0].x2, 150.0);
    EXPECT_DOUBLE_EQ(out.boxes[0].y2, 200.0);
    EXPECT_THROW(letterbox(src, 0, 0.0), std::invalid_argument);
}

TEST(Letterbox, InverseRecoversBoxCoordinates) {
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
        const int w = 100 + rng.below(900), h = 100 + rng.below(900);
        const BBox b{rng.uniform(0, w / 2.0), rng.uniform(0, h / 2.0), rng.uniform(w / 2.0, w),
                     rng.uniform(h / 2.0, h)};
        const LabeledImage src = solid_image(h, w, 0.5f, {b}, {0});
        const LabeledImage out = letterbox(src, 640, 0.0);
        const LetterboxMap m = letterbox_map(w, h, 640);
        const BBox& mapped = out.boxes[0];
        EXPECT_NEAR((mapped.x1 - m.pad_x) / m.scale, b.x1, 1e-4);
        EXPECT_NEAR((mapped.y1 - m.pad_y) / m.scale, b.y1, 1e-4);
        EXPECT_NEAR((mapped.x2 - m.pad_x) / m.scale, b.x2, 1e-4);
        EXPECT_NEAR((mapped.y2 - m.pad_y) / m.scale, b.y2, 1e-4);
    }
}

TEST(Pipeline, DeterministicAndBoxesStayInside) {
    AugmentConfig cfg;
    cfg.target_size = 64;
    std::vector<LabeledImage> pool;
    Rng setup(12);
    for (int i = 0; i < 6; ++i) {
        LabeledImage img = solid_image(48 + 8 * i, 56 + 4 * i, 0.1f * i);
        for (int b = 0; b < 3; ++b) {
            const double x1 = setup.uniform(0, img.width() - 20);
            const double y1 = setup.uniform(0, img.height() - 20);
            img.boxes.push_back({x1, y1, x1 + setup.uniform(8, 18), y1 + setup.uniform(8, 18)});
            img.classes.push_back(b);
            img.weights.push_back(1.0);
        }
        pool.push_back(std::move(img));
    }

    for (std::uint64_t seed : {0ull, 7ull, 31337ull}) {
        cfg.seed = seed;
        for (std::size_t i = 0; i < 4; ++i) {
            const LabeledImage a = augment_one(pool, i, cfg);
            const LabeledImage b = augment_one(pool, i, cfg);
            EXPECT_EQ(a.image.data, b.image.data);
            ASSERT_EQ(a.boxes.size(), b.boxes.size());
            for (std::size_t k = 0; k < a.boxes.size(); ++k) EXPECT_TRUE(a.boxes[k] == b.boxes[k]);
            EXPECT_TRUE(boxes_inside(a));
            EXPECT_EQ(a.width(), cfg.target_size);
            EXPECT_EQ(a.height(), cfg.target_size);
            for (float v : a.image.data) {
                EXPECT_GE(v, 0.0f);
                EXPECT_LE(v, 1.0f);
            }
        }
    }
}
