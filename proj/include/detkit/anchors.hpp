#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "detkit/rng.hpp"

namespace detkit {

// (width, height) anchors sorted by area ascending, ties by width, plus the
// dataset's mean best-anchor IoU.
struct AnchorSet {
    std::vector<std::pair<double, double>> anchors;
    double mean_best_iou = 0.0;
};

// IoU of two origin-centered boxes given as (w,h).
inline double wh_iou(double w1, double h1, double w2, double h2) {
    const double inter = std::min(w1, w2) * std::min(h1, h2);
    const double uni = w1 * h1 + w2 * h2 - inter;
    return uni <= 1e-9 ? 0.0 : inter / uni;
}

// K-means over box shapes with distance 1 - IoU, k-means++ seeding, mean
// update in (w,h) space, deterministic for a fixed seed. The optional trace
// records inertia after every update step.
inline AnchorSet kmeans_anchors(const std::vector<std::pair<double, double>>& boxes, int k,
                                std::uint64_t seed, int max_iter = 300,
                                std::vector<double>* inertia_trace = nullptr) {
    if (k < 1) throw std::invalid_argument("kmeans_anchors: k must be >= 1");
    if (static_cast<int>(boxes.size()) < k)
        throw std::invalid_argument("kmeans_anchors: k=" + std::to_string(k) + " exceeds " +
                                    std::to_string(boxes.size()) + " boxes");
    for (const auto& [w, h] : boxes)
        if (!(w > 0.0) || !(h > 0.0))
            throw std::invalid_argument("kmeans_anchors: box dimensions must be positive");

    // cluster over a canonically sorted copy so the result ignores input order
    std::vector<std::pair<double, double>> pts = boxes;
    std::sort(pts.begin(), pts.end());
    const int n = static_cast<int>(pts.size());

    Rng rng(seed);
    auto dist = [&](const std::pair<double, double>& b, const std::pair<double, double>& c) {
        return 1.0 - wh_iou(b.first, b.second, c.first, c.second);
    };

    // k-means++ over squared distances
    std::vector<std::pair<double, double>> centroids;
    centroids.push_back(pts[rng.below(n)]);
    std::vector<double> best_d(n);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double d = dist(pts[i], centroids[0]);
            for (std::size_t c = 1; c < centroids.size(); ++c) d = std::min(d, dist(pts[i], centroids[c]));
            best_d[i] = d * d;
            total += best_d[i];
        }
        if (total <= 0.0) {
            centroids.push_back(pts[rng.below(n)]);
            continue;
        }
        double pick = rng.uniform01() * total;
        int chosen = n - 1;
        for (int i = 0; i < n; ++i) {
            pick -= best_d[i];
            if (pick <= 0.0) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(pts[chosen]);
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = dist(pts[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = dist(pts[i], centroids[c]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (inertia_trace) {
            double inertia = 0.0;
            for (int i = 0; i < n; ++i) inertia += dist(pts[i], centroids[assign[i]]);
            inertia_trace->push_back(inertia);
        }
        if (!changed && iter > 0) break;

        // mean update, accepted per cluster only when it lowers that cluster's
        // summed 1-IoU cost (the mean minimizes squared Euclidean distance,
        // not IoU distance, so an unconditional move could raise inertia)
        std::vector<double> sw(k, 0.0), sh(k, 0.0);
        std::vector<int> cnt(k, 0);
        for (int i = 0; i < n; ++i) {
            sw[assign[i]] += pts[i].first;
            sh[assign[i]] += pts[i].second;
            ++cnt[assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (cnt[c] > 0) {
                const std::pair<double, double> cand{sw[c] / cnt[c], sh[c] / cnt[c]};
                double cur_cost = 0.0, cand_cost = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (assign[i] != c) continue;
                    cur_cost += dist(pts[i], centroids[c]);
                    cand_cost += dist(pts[i], cand);
                }
                if (cand_cost < cur_cost) centroids[c] = cand;
            } else {
                // reseed an empty cluster from the farthest point
                int far = 0;
                double fd = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d = dist(pts[i], centroids[assign[i]]);
                    if (d > fd) {
                        fd = d;
                        far = i;
                    }
                }
                centroids[c] = pts[far];
            }
        }
    }

    AnchorSet out;
    out.anchors = centroids;
    std::sort(out.anchors.begin(), out.anchors.end(), [](const auto& a, const auto& b) {
        const double aa = a.first * a.second, ab = b.first * b.second;
        return aa != ab ? aa < ab : a.first < b.first;
    });
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double best = 0.0;
        for (const auto& c : out.anchors)
            best = std::max(best, wh_iou(pts[i].first, pts[i].second, c.first, c.second));
        s += best;
    }
    out.mean_best_iou = s / n;
    return out;
}

}  // namespace detkit
