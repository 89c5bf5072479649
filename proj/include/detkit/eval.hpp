#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "detkit/box.hpp"

namespace detkit {

struct Detection {
    BBox bbox;
    int class_id = 0;
    double score = 0.0;
    std::string image_id;
};

struct GroundTruth {
    BBox bbox;
    int class_id = 0;
    std::string image_id;
};

struct EvalReport {
    std::map<int, double> per_class_ap;
    double map50 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    long tp = 0, fp = 0, fn = 0;
    double iou_thresh = 0.5;
    double conf_thresh = 0.25;
};

// Greedy score-ordered matching: each detection takes the highest-IoU
// unmatched ground truth of its class and image with IoU >= thresh. Returns
// a TP flag per detection, aligned with the input order. Score ties keep the
// original index order.
inline std::vector<bool> match_detections(const std::vector<Detection>& dets,
                                          const std::vector<GroundTruth>& gts, double iou_thresh) {
    if (!(iou_thresh > 0.0 && iou_thresh < 1.0))
        throw std::invalid_argument("match_detections: iou_thresh must lie in (0,1)");
    std::vector<int> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dets[a].score > dets[b].score; });

    std::vector<bool> gt_used(gts.size(), false);
    std::vector<bool> tp(dets.size(), false);
    for (int di : order) {
        const Detection& d = dets[di];
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_used[gi] || gts[gi].class_id != d.class_id || gts[gi].image_id != d.image_id)
                continue;
            const double v = iou(d.bbox, gts[gi].bbox);
            if (v < iou_thresh) continue;
            if (best < 0 || v > best_iou) {  // ties keep the first ground truth
                best = static_cast<int>(gi);
                best_iou = v;
            }
        }
        if (best >= 0) {
            gt_used[best] = true;
            tp[di] = true;
        }
    }
    return tp;
}

// All-point interpolated AP from score-ordered TP/FP flags.
inline double average_precision(const std::vector<bool>& flags, long n_gt) {
    if (n_gt < 0) throw std::invalid_argument("average_precision: n_gt must be >= 0");
    if (n_gt == 0) return 0.0;
    const std::size_t n = flags.size();
    if (n == 0) return 0.0;

    std::vector<double> precision(n), recall(n);
    long tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (flags[i]) ++tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
    }
    // precision envelope (max to the right)
    for (std::size_t i = n - 1; i-- > 0;) precision[i] = std::max(precision[i], precision[i + 1]);

    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

// Per-class AP over all detections plus precision/recall/counts at a single
// confidence threshold.
inline EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                           double iou_thresh = 0.5, double conf_thresh = 0.25) {
    if (gts.empty()) throw std::invalid_argument("evaluate: no ground truths to evaluate against");

    EvalReport rep;
    rep.iou_thresh = iou_thresh;
    rep.conf_thresh = conf_thresh;

    const std::vector<bool> tp_flags = match_detections(dets, gts, iou_thresh);

    std::map<int, long> gt_per_class;
    for (const GroundTruth& g : gts) ++gt_per_class[g.class_id];

    for (const auto& [cls, n_gt] : gt_per_class) {
        std::vector<int> order;
        for (std::size_t i = 0; i < dets.size(); ++i)
            if (dets[i].class_id == cls) order.push_back(static_cast<int>(i));
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return dets[a].score > dets[b].score; });
        std::vector<bool> flags;
        flags.reserve(order.size());
        for (int i : order) flags.push_back(tp_flags[i]);
        rep.per_class_ap[cls] = average_precision(flags, n_gt);
    }

    double ap_sum = 0.0;
    for (const auto& [cls, ap] : rep.per_class_ap) ap_sum += ap;
    rep.map50 = rep.per_class_ap.empty() ? 0.0 : ap_sum / static_cast<double>(rep.per_class_ap.size());

    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (dets[i].score < conf_thresh) continue;
        if (tp_flags[i]) ++rep.tp;
        else ++rep.fp;
    }
    rep.fn = static_cast<long>(gts.size()) - rep.tp;
    rep.precision = rep.tp + rep.fp > 0 ? static_cast<double>(rep.tp) / (rep.tp + rep.fp) : 0.0;
    rep.recall = rep.tp + rep.fn > 0 ? static_cast<double>(rep.tp) / (rep.tp + rep.fn) : 0.0;
    return rep;
}

struct BenchResult {
    double fps = 0.0;
    double mean_ms = 0.0;
    double min_ms = 0.0;
    double max_ms = 0.0;
};

// Times `workload` on a monotonic clock after untimed warmup iterations.
inline BenchResult fps_bench(const std::function<void()>& workload, int warmup, int iters) {
    if (iters < 1) throw std::invalid_argument("fps_bench: iters must be >= 1");
    if (warmup < 0) throw std::invalid_argument("fps_bench: warmup must be >= 0");
    for (int i = 0; i < warmup; ++i) workload();

    using clock = std::chrono::steady_clock;
    BenchResult r;
    r.min_ms = std::numeric_limits<double>::infinity();
    double total_ms = 0.0;
    for (int i = 0; i < iters; ++i) {
        const auto t0 = clock::now();
        workload();
        const auto t1 = clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        total_ms += ms;
        r.min_ms = std::min(r.min_ms, ms);
        r.max_ms = std::max(r.max_ms, ms);
    }
    r.mean_ms = total_ms / iters;
    r.fps = iters / (total_ms / 1000.0);
    return r;
}

}  // namespace detkit
