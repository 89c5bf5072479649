#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "detkit/box.hpp"
#include "detkit/rng.hpp"
#include "detkit/tensor.hpp"

namespace detkit {

// Image tensor (H,W,C) with values in [0,1] plus class-tagged boxes in
// absolute pixels. Each box carries a blend weight (1 until MixUp touches it).
struct LabeledImage {
    Tensor<float> image;
    std::vector<BBox> boxes;
    std::vector<int> classes;
    std::vector<double> weights;

    int height() const { return image.shape[0]; }
    int width() const { return image.shape[1]; }
    int channels() const { return image.shape[2]; }
};

struct AugmentConfig {
    std::array<double, 2> scale_range{0.8, 1.2};
    std::array<double, 2> rotation_deg{-15.0, 15.0};
    std::array<double, 2> mixup_range{0.2, 0.4};
    int target_size = 640;
    std::array<double, 2> noise_sigma{0.01, 0.05};
    std::array<double, 2> brightness_range{0.6, 1.4};
    std::array<double, 2> contrast_range{0.6, 1.4};
    std::array<double, 2> saturation_range{0.6, 1.4};
    double min_visible_frac = 0.25;
    double pad_value = 114.0 / 255.0;
    double center_jitter = 0.25;      // mosaic junction offset as a fraction of target_size
    bool photometric_per_tile = true; // jitter tiles before stitching (vs. once after MixUp)
    std::uint64_t seed = 0;
};

// Row-major 2x3 affine: (x,y) -> (m[0]x + m[1]y + m[2], m[3]x + m[4]y + m[5]).
struct Affine {
    std::array<double, 6> m{1, 0, 0, 0, 1, 0};

    std::pair<double, double> apply(double x, double y) const {
        return {m[0] * x + m[1] * y + m[2], m[3] * x + m[4] * y + m[5]};
    }
    double det() const { return m[0] * m[4] - m[1] * m[3]; }
    Affine inverse() const {
        const double d = det();
        if (std::fabs(d) < 1e-12) throw std::invalid_argument("affine: singular linear part");
        Affine inv;
        inv.m[0] = m[4] / d;
        inv.m[1] = -m[1] / d;
        inv.m[3] = -m[3] / d;
        inv.m[4] = m[0] / d;
        inv.m[2] = -(inv.m[0] * m[2] + inv.m[1] * m[5]);
        inv.m[5] = -(inv.m[3] * m[2] + inv.m[4] * m[5]);
        return inv;
    }
    static Affine translation(double tx, double ty) { return {{1, 0, tx, 0, 1, ty}}; }
    // scale then rotate about the origin
    static Affine scale_rotate(double s, double radians) {
        const double c = std::cos(radians) * s, sn = std::sin(radians) * s;
        return {{c, -sn, 0, sn, c, 0}};
    }
    // a after b (apply b first)
    static Affine compose(const Affine& a, const Affine& b) {
        Affine r;
        r.m[0] = a.m[0] * b.m[0] + a.m[1] * b.m[3];
        r.m[1] = a.m[0] * b.m[1] + a.m[1] * b.m[4];
        r.m[2] = a.m[0] * b.m[2] + a.m[1] * b.m[5] + a.m[2];
        r.m[3] = a.m[3] * b.m[0] + a.m[4] * b.m[3];
        r.m[4] = a.m[3] * b.m[1] + a.m[4] * b.m[4];
        r.m[5] = a.m[3] * b.m[2] + a.m[4] * b.m[5] + a.m[5];
        return r;
    }
};

struct TransformedBox {
    BBox box;
    bool kept = false;
};

namespace detail {

// Hull of the four mapped corners, clipped to a rectangle; dropped when the
// visible fraction of the hull falls below min_visible_frac.
inline TransformedBox transform_one_box(const BBox& b, const Affine& a, double cx1, double cy1,
                                        double cx2, double cy2, double min_visible_frac) {
    const std::array<std::pair<double, double>, 4> corners{
        a.apply(b.x1, b.y1), a.apply(b.x2, b.y1), a.apply(b.x1, b.y2), a.apply(b.x2, b.y2)};
    double hx1 = corners[0].first, hx2 = corners[0].first;
    double hy1 = corners[0].second, hy2 = corners[0].second;
    for (const auto& c : corners) {
        hx1 = std::min(hx1, c.first);
        hx2 = std::max(hx2, c.first);
        hy1 = std::min(hy1, c.second);
        hy2 = std::max(hy2, c.second);
    }
    const double hull_area = (hx2 - hx1) * (hy2 - hy1);
    BBox clipped{std::clamp(hx1, cx1, cx2), std::clamp(hy1, cy1, cy2), std::clamp(hx2, cx1, cx2),
                 std::clamp(hy2, cy1, cy2)};
    const bool kept = hull_area > 0.0 && clipped.area() / hull_area >= min_visible_frac;
    return {clipped, kept};
}

}  // namespace detail

inline std::vector<TransformedBox> transform_boxes(const std::vector<BBox>& boxes, const Affine& a,
                                                   double canvas_w, double canvas_h,
                                                   double min_visible_frac) {
    if (std::fabs(a.det()) < 1e-12)
        throw std::invalid_argument("transform_boxes: singular linear part");
    std::vector<TransformedBox> out;
    out.reserve(boxes.size());
    for (const BBox& b : boxes)
        out.push_back(detail::transform_one_box(b, a, 0.0, 0.0, canvas_w, canvas_h, min_visible_frac));
    return out;
}

namespace detail {

// Paste `src` into `dst` inside the pixel rect [rx1,rx2) x [ry1,ry2) through
// the affine. Destination pixels that map outside the source keep their value.
inline void warp_into(Tensor<float>& dst, const Tensor<float>& src, const Affine& a, int rx1, int ry1,
                      int rx2, int ry2) {
    const Affine inv = a.inverse();
    const int sh = src.shape[0], sw = src.shape[1], sc = src.shape[2];
    for (int y = ry1; y < ry2; ++y) {
        for (int x = rx1; x < rx2; ++x) {
            const auto [sx, sy] = inv.apply(x + 0.5, y + 0.5);
            const int ix = static_cast<int>(std::floor(sx));
            const int iy = static_cast<int>(std::floor(sy));
            if (ix < 0 || ix >= sw || iy < 0 || iy >= sh) continue;
            for (int c = 0; c < sc; ++c) dst.at3(y, x, c) = src.at3(iy, ix, c);
        }
    }
}

inline Tensor<float> resize_image_nearest(const Tensor<float>& img, int th, int tw) {
    const int sh = img.shape[0], sw = img.shape[1], c_ = img.shape[2];
    Tensor<float> out({th, tw, c_});
    for (int i = 0; i < th; ++i) {
        const int si = nearest_src(i, th, sh);
        for (int j = 0; j < tw; ++j) {
            const int sj = nearest_src(j, tw, sw);
            for (int c = 0; c < c_; ++c) out.at3(i, j, c) = img.at3(si, sj, c);
        }
    }
    return out;
}

}  // namespace detail

// Aspect-preserving scale and symmetric padding to a square target.
struct LetterboxMap {
    double scale = 1.0;
    int pad_x = 0;
    int pad_y = 0;
    int new_w = 0;
    int new_h = 0;
};

inline LetterboxMap letterbox_map(int w, int h, int target) {
    if (target <= 0) throw std::invalid_argument("letterbox: non-positive target");
    if (w <= 0 || h <= 0) throw std::invalid_argument("letterbox: non-positive source extent");
    LetterboxMap m;
    m.scale = std::min(static_cast<double>(target) / w, static_cast<double>(target) / h);
    m.new_w = std::max(1, static_cast<int>(std::lround(w * m.scale)));
    m.new_h = std::max(1, static_cast<int>(std::lround(h * m.scale)));
    m.pad_x = (target - m.new_w) / 2;
    m.pad_y = (target - m.new_h) / 2;
    return m;
}

inline LabeledImage letterbox(const LabeledImage& src, int target, double pad_value) {
    const LetterboxMap m = letterbox_map(src.width(), src.height(), target);
    LabeledImage out;
    if (m.new_w == src.width() && m.new_h == src.height() && m.pad_x == 0 && m.pad_y == 0) {
        out.image = src.image;
    } else {
        out.image = Tensor<float>({target, target, src.channels()}, static_cast<float>(pad_value));
        const Tensor<float> resized = detail::resize_image_nearest(src.image, m.new_h, m.new_w);
        for (int i = 0; i < m.new_h; ++i)
            for (int j = 0; j < m.new_w; ++j)
                for (int c = 0; c < src.channels(); ++c)
                    out.image.at3(i + m.pad_y, j + m.pad_x, c) = resized.at3(i, j, c);
    }
    out.classes = src.classes;
    out.weights = src.weights;
    out.boxes.reserve(src.boxes.size());
    for (const BBox& b : src.boxes)
        out.boxes.push_back({b.x1 * m.scale + m.pad_x, b.y1 * m.scale + m.pad_y,
                             b.x2 * m.scale + m.pad_x, b.y2 * m.scale + m.pad_y});
    return out;
}

// Four tiles stitched on a 2*target canvas around a jittered junction, each
// tile scaled/rotated into its quadrant, then letterboxed down to target.
// Draw order per call: junction x, junction y, then (scale, rotation) per tile.
inline LabeledImage mosaic(const std::vector<LabeledImage>& tiles, const AugmentConfig& cfg,
                           Rng& rng) {
    if (tiles.size() != 4) throw std::invalid_argument("mosaic: exactly four tiles required");
    const int big = 2 * cfg.target_size;
    const double j = cfg.center_jitter;
    const int cx = std::clamp(static_cast<int>(std::lround(rng.uniform(
                       cfg.target_size * (1.0 - j), cfg.target_size * (1.0 + j)))),
                              0, big);
    const int cy = std::clamp(static_cast<int>(std::lround(rng.uniform(
                       cfg.target_size * (1.0 - j), cfg.target_size * (1.0 + j)))),
                              0, big);

    LabeledImage canvas;
    canvas.image = Tensor<float>({big, big, tiles[0].channels()}, static_cast<float>(cfg.pad_value));

    // quadrant rects: TL, TR, BL, BR
    const std::array<std::array<int, 4>, 4> quads{{{0, 0, cx, cy},
                                                   {cx, 0, big, cy},
                                                   {0, cy, cx, big},
                                                   {cx, cy, big, big}}};
    for (int t = 0; t < 4; ++t) {
        const LabeledImage& tile = tiles[t];
        const double s = rng.uniform(cfg.scale_range[0], cfg.scale_range[1]);
        const double rot = rng.uniform(cfg.rotation_deg[0], cfg.rotation_deg[1]) * M_PI / 180.0;
        const int qx1 = quads[t][0], qy1 = quads[t][1], qx2 = quads[t][2], qy2 = quads[t][3];
        const double qw = qx2 - qx1, qh = qy2 - qy1;
        if (qw <= 0 || qh <= 0) continue;

        const double fit = std::min(qw / tile.width(), qh / tile.height());
        const Affine lin = Affine::scale_rotate(s * fit, rot);

        // bounds of the linearly mapped image
        double hx1 = 0, hx2 = 0, hy1 = 0, hy2 = 0;
        const std::array<std::pair<double, double>, 4> crn{
            lin.apply(0, 0), lin.apply(tile.width(), 0), lin.apply(0, tile.height()),
            lin.apply(tile.width(), tile.height())};
        for (const auto& cpt : crn) {
            hx1 = std::min(hx1, cpt.first);
            hx2 = std::max(hx2, cpt.first);
            hy1 = std::min(hy1, cpt.second);
            hy2 = std::max(hy2, cpt.second);
        }
        // anchor the mapped hull to the junction corner of this quadrant
        const double tx = t % 2 == 0 ? cx - hx2 : cx - hx1;
        const double ty = t < 2 ? cy - hy2 : cy - hy1;
        const Affine aff = Affine::compose(Affine::translation(tx, ty), lin);

        detail::warp_into(canvas.image, tile.image, aff, qx1, qy1, qx2, qy2);
        for (std::size_t bi = 0; bi < tile.boxes.size(); ++bi) {
            const TransformedBox tb = detail::transform_one_box(
                tile.boxes[bi], aff, qx1, qy1, qx2, qy2, cfg.min_visible_frac);
            if (!tb.kept) continue;
            canvas.boxes.push_back(tb.box);
            canvas.classes.push_back(tile.classes[bi]);
            canvas.weights.push_back(bi < tile.weights.size() ? tile.weights[bi] : 1.0);
        }
    }
    return letterbox(canvas, cfg.target_size, cfg.pad_value);
}

// lambda*a + (1-lambda)*b with the box union; a's boxes carry share lambda,
// b's carry 1-lambda.
inline LabeledImage mixup(const LabeledImage& a, const LabeledImage& b, const AugmentConfig& cfg,
                          Rng& rng) {
    if (a.image.shape != b.image.shape)
        throw std::invalid_argument("mixup: images must share dimensions");
    const double lam = rng.uniform(cfg.mixup_range[0], cfg.mixup_range[1]);
    LabeledImage out;
    out.image = Tensor<float>(a.image.shape);
    for (std::size_t i = 0; i < out.image.data.size(); ++i)
        out.image.data[i] = static_cast<float>(lam * a.image.data[i] + (1.0 - lam) * b.image.data[i]);
    out.boxes = a.boxes;
    out.classes = a.classes;
    for (std::size_t i = 0; i < a.boxes.size(); ++i)
        out.weights.push_back(lam * (i < a.weights.size() ? a.weights[i] : 1.0));
    out.boxes.insert(out.boxes.end(), b.boxes.begin(), b.boxes.end());
    out.classes.insert(out.classes.end(), b.classes.begin(), b.classes.end());
    for (std::size_t i = 0; i < b.boxes.size(); ++i)
        out.weights.push_back((1.0 - lam) * (i < b.weights.size() ? b.weights[i] : 1.0));
    return out;
}

struct PhotometricGains {
    double brightness = 1.0;
    double contrast = 1.0;
    double saturation = 1.0;
};

// brightness: x*g; contrast: (x-mean)*g + mean; saturation: blend with the
// per-pixel channel mean. Clamped to [0,1] after each step.
inline Tensor<float> photometric(const Tensor<float>& img, const PhotometricGains& g) {
    Tensor<float> out = img;
    auto clamp01 = [](double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); };
    for (float& v : out.data) v = clamp01(v * g.brightness);

    double mean = 0.0;
    for (float v : out.data) mean += v;
    mean /= static_cast<double>(out.data.size());
    for (float& v : out.data) v = clamp01((v - mean) * g.contrast + mean);

    const int h = img.shape[0], w = img.shape[1], c_ = img.shape[2];
    for (int i = 0; i < h; ++i)
        for (int jx = 0; jx < w; ++jx) {
            double gray = 0.0;
            for (int c = 0; c < c_; ++c) gray += out.at3(i, jx, c);
            gray /= c_;
            for (int c = 0; c < c_; ++c)
                out.at3(i, jx, c) = clamp01(gray + g.saturation * (out.at3(i, jx, c) - gray));
        }
    return out;
}

inline Tensor<float> photometric(const Tensor<float>& img, const AugmentConfig& cfg, Rng& rng) {
    PhotometricGains g;
    g.brightness = rng.uniform(cfg.brightness_range[0], cfg.brightness_range[1]);
    g.contrast = rng.uniform(cfg.contrast_range[0], cfg.contrast_range[1]);
    g.saturation = rng.uniform(cfg.saturation_range[0], cfg.saturation_range[1]);
    return photometric(img, g);
}

// i.i.d. zero-mean Gaussian noise, clamped to [0,1]. Flat draw order.
inline Tensor<float> gaussian_noise(const Tensor<float>& img, double sigma, Rng& rng) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_noise: sigma must be >= 0");
    Tensor<float> out = img;
    if (sigma == 0.0) return out;
    for (float& v : out.data)
        v = static_cast<float>(std::clamp(static_cast<double>(v) + sigma * rng.normal(), 0.0, 1.0));
    return out;
}

// One full pipeline pass: two mosaics blended by MixUp, then noise.
// Deterministic given (pool, cfg, out_index): the stream seed is
// split(cfg.seed, out_index).
inline LabeledImage augment_one(const std::vector<LabeledImage>& pool, std::size_t out_index,
                                const AugmentConfig& cfg) {
    if (pool.empty()) throw std::invalid_argument("augment_one: empty image pool");
    Rng rng(Rng::split(cfg.seed, out_index));
    const int n = static_cast<int>(pool.size());

    auto build_mosaic = [&](std::size_t lead) {
        std::vector<LabeledImage> tiles;
        tiles.push_back(pool[lead]);
        for (int t = 0; t < 3; ++t) tiles.push_back(pool[rng.below(n)]);
        if (cfg.photometric_per_tile)
            for (LabeledImage& tile : tiles) tile.image = photometric(tile.image, cfg, rng);
        return mosaic(tiles, cfg, rng);
    };

    LabeledImage first = build_mosaic(out_index % pool.size());
    LabeledImage second = build_mosaic(rng.below(n));
    LabeledImage mixed = mixup(first, second, cfg, rng);
    if (!cfg.photometric_per_tile) mixed.image = photometric(mixed.image, cfg, rng);

    const double sigma = rng.uniform(cfg.noise_sigma[0], cfg.noise_sigma[1]);
    mixed.image = gaussian_noise(mixed.image, sigma, rng);
    return mixed;
}

}  // namespace detkit
