#include <gtest/gtest.h>

#include <algorithm>

#include "detkit/anchors.hpp"
#include "detkit/rng.hpp"

using namespace detkit;

namespace {

std::vector<std::pair<double, double>> random_boxes(int n, Rng& rng, double lo = 8.0,
                                                    double hi = 256.0) {
    std::vector<std::pair<double, double>> boxes;
    for (int i = 0; i < n; ++i) {
        // log-uniform spread of widths/heights
        const double w = lo * std::exp(rng.uniform01() * std::log(hi / lo));
        const double h = lo * std::exp(rng.uniform01() * std::log(hi / lo));
        boxes.emplace_back(w, h);
    }
    return boxes;
}

}  // namespace

TEST(WhIou, BasicValues) {
    EXPECT_DOUBLE_EQ(wh_iou(10, 10, 10, 10), 1.0);
    EXPECT_DOUBLE_EQ(wh_iou(10, 10, 20, 20), 0.25);
    EXPECT_NEAR(wh_iou(10, 20, 20, 10), 100.0 / 300.0, 1e-12);
}

TEST(KmeansAnchors, IdenticalBoxesCollapse) {
    const std::vector<std::pair<double, double>> boxes(25, {33.0, 47.0});
    const AnchorSet set = kmeans_anchors(boxes, 1, 0);
    ASSERT_EQ(set.anchors.size(), 1u);
    EXPECT_DOUBLE_EQ(set.anchors[0].first, 33.0);
    EXPECT_DOUBLE_EQ(set.anchors[0].second, 47.0);
    EXPECT_DOUBLE_EQ(set.mean_best_iou, 1.0);
}

TEST(KmeansAnchors, RecoversSeparatedClustersExactly) {
    std::vector<std::pair<double, double>> boxes;
    for (int i = 0; i < 50; ++i) boxes.emplace_back(10.0, 10.0);
    for (int i = 0; i < 50; ++i) boxes.emplace_back(100.0, 100.0);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const AnchorSet set = kmeans_anchors(boxes, 2, seed);
        ASSERT_EQ(set.anchors.size(), 2u);
        EXPECT_DOUBLE_EQ(set.anchors[0].first, 10.0);
        EXPECT_DOUBLE_EQ(set.anchors[0].second, 10.0);
        EXPECT_DOUBLE_EQ(set.anchors[1].first, 100.0);
        EXPECT_DOUBLE_EQ(set.anchors[1].second, 100.0);
        EXPECT_DOUBLE_EQ(set.mean_best_iou, 1.0);
    }
}

TEST(KmeansAnchors, DeterministicPerSeedAndOrderInvariant) {
    Rng rng(5);
    const auto boxes = random_boxes(120, rng);
    const AnchorSet a = kmeans_anchors(boxes, 5, 77);
    const AnchorSet b = kmeans_anchors(boxes, 5, 77);
    EXPECT_EQ(a.anchors, b.anchors);
    EXPECT_DOUBLE_EQ(a.mean_best_iou, b.mean_best_iou);

    auto shuffled = boxes;
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.below(static_cast<int>(i))]);
    const AnchorSet c = kmeans_anchors(shuffled, 5, 77);
    EXPECT_EQ(a.anchors, c.anchors);
}

TEST(KmeansAnchors, InertiaNeverIncreases) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const auto boxes = random_boxes(150, rng);
        std::vector<double> trace;
        kmeans_anchors(boxes, 6, 1000 + trial, 300, &trace);
        ASSERT_GE(trace.size(), 1u);
        for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-12);
    }
}

TEST(KmeansAnchors, AnchorsSortedByArea) {
    Rng rng(7);
    const auto boxes = random_boxes(100, rng);
    const AnchorSet set = kmeans_anchors(boxes, 6, 3);
    for (std::size_t i = 1; i < set.anchors.size(); ++i) {
        const double prev = set.anchors[i - 1].first * set.anchors[i - 1].second;
        const double cur = set.anchors[i].first * set.anchors[i].second;
        EXPECT_LE(prev, cur);
    }
}

TEST(KmeansAnchors, MeanBestIouImprovesWithK) {
    Rng rng(8);
    const auto boxes = random_boxes(300, rng);
    double prev = 0.0;
    for (int k = 1; k <= 12; ++k) {
        double best = 0.0;
        for (std::uint64_t seed = 0; seed < 5; ++seed)
            best = std::max(best, kmeans_anchors(boxes, k, seed).mean_best_iou);
        EXPECT_GE(best, prev) << "k=" << k;
        prev = best;
    }
    EXPECT_GT(prev, 0.5);
}

TEST(KmeansAnchors, ErrorPaths) {
    std::vector<std::pair<double, double>> boxes{{10, 10}, {20, 20}};
    EXPECT_THROW(kmeans_anchors(boxes, 3, 0), std::invalid_argument);
    EXPECT_THROW(kmeans_anchors(boxes, 0, 0), std::invalid_argument);
    boxes.push_back({0.0, 5.0});
    EXPECT_THROW(kmeans_anchors(boxes, 2, 0), std::invalid_argument);
}
