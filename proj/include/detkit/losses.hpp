#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "detkit/box.hpp"

namespace detkit {

// Box-regression loss result: value plus d(loss)/d(x1,y1,x2,y2) of the
// predicted box.
struct LossValue {
    double value = 0.0;
    std::array<double, 4> grad_pred{0.0, 0.0, 0.0, 0.0};
};

// Classification loss result (scalar input, scalar gradient).
struct ScalarLoss {
    double value = 0.0;
    double grad = 0.0;
};

// Running state for WIoU's dynamic focusing. running_mean_iou_loss follows
// m <- momentum*m + (1-momentum)*L_iou.
struct WiouState {
    double running_mean_iou_loss = 1.0;
    double momentum = 0.99;
    double alpha = 1.9;
    double delta = 3.0;
};

namespace detail {

// value + partials w.r.t. the predicted corners; a 4-lane forward-mode dual.
struct Val4 {
    double v = 0.0;
    std::array<double, 4> g{0.0, 0.0, 0.0, 0.0};
};

inline Val4 constant(double c) { return {c, {0, 0, 0, 0}}; }

inline Val4 operator+(const Val4& a, const Val4& b) {
    return {a.v + b.v, {a.g[0] + b.g[0], a.g[1] + b.g[1], a.g[2] + b.g[2], a.g[3] + b.g[3]}};
}
inline Val4 operator-(const Val4& a, const Val4& b) {
    return {a.v - b.v, {a.g[0] - b.g[0], a.g[1] - b.g[1], a.g[2] - b.g[2], a.g[3] - b.g[3]}};
}
inline Val4 operator*(const Val4& a, const Val4& b) {
    Val4 r;
    r.v = a.v * b.v;
    for (int i = 0; i < 4; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
    return r;
}
inline Val4 operator*(double s, const Val4& a) {
    return {s * a.v, {s * a.g[0], s * a.g[1], s * a.g[2], s * a.g[3]}};
}
// guarded quotient: denominator floored away from zero
inline Val4 div_guarded(const Val4& num, const Val4& den, double eps = 1e-9) {
    const double d = std::max(den.v, eps);
    Val4 r;
    r.v = num.v / d;
    const bool live = den.v > eps;  // below the floor the denominator is constant
    for (int i = 0; i < 4; ++i)
        r.g[i] = (num.g[i] * d - (live ? num.v * den.g[i] : 0.0)) / (d * d);
    return r;
}

// IoU with partials. Identical boxes are a kink of the true function; the
// reported gradient there is 0, matching the loss minimum convention.
inline Val4 iou_grad(const BBox& p, const BBox& g) {
    if (p == g) return {p.area() > 0.0 ? 1.0 : 0.0, {0, 0, 0, 0}};

    Val4 inter = constant(0.0);
    const double ix1 = std::max(p.x1, g.x1), iy1 = std::max(p.y1, g.y1);
    const double ix2 = std::min(p.x2, g.x2), iy2 = std::min(p.y2, g.y2);
    const double iw = ix2 - ix1, ih = iy2 - iy1;
    if (iw > 0.0 && ih > 0.0) {
        inter.v = iw * ih;
        inter.g[0] = p.x1 > g.x1 ? -ih : 0.0;
        inter.g[1] = p.y1 > g.y1 ? -iw : 0.0;
        inter.g[2] = p.x2 < g.x2 ? ih : 0.0;
        inter.g[3] = p.y2 < g.y2 ? iw : 0.0;
    }
    Val4 uni;
    uni.v = p.area() + g.area() - inter.v;
    uni.g[0] = -p.height() - inter.g[0];
    uni.g[1] = -p.width() - inter.g[1];
    uni.g[2] = p.height() - inter.g[2];
    uni.g[3] = p.width() - inter.g[3];
    return div_guarded(inter, uni);
}

// squared center distance
inline Val4 center_dist2_grad(const BBox& p, const BBox& g) {
    const double dx = p.cx() - g.cx(), dy = p.cy() - g.cy();
    return {dx * dx + dy * dy, {dx, dy, dx, dy}};
}

// enclosing-box width/height with partials
inline Val4 enclose_w_grad(const BBox& p, const BBox& g) {
    Val4 r;
    r.v = std::max(p.x2, g.x2) - std::min(p.x1, g.x1);
    r.g[0] = p.x1 < g.x1 ? -1.0 : 0.0;
    r.g[2] = p.x2 > g.x2 ? 1.0 : 0.0;
    return r;
}
inline Val4 enclose_h_grad(const BBox& p, const BBox& g) {
    Val4 r;
    r.v = std::max(p.y2, g.y2) - std::min(p.y1, g.y1);
    r.g[1] = p.y1 < g.y1 ? -1.0 : 0.0;
    r.g[3] = p.y2 > g.y2 ? 1.0 : 0.0;
    return r;
}

// aspect-consistency term v = (4/pi^2) (atan(wg/hg) - atan(w/h))^2
inline Val4 aspect_v_grad(const BBox& p, const BBox& g) {
    constexpr double k = 4.0 / (M_PI * M_PI);
    const double w = p.width(), h = p.height();
    const double q = std::atan2(g.width(), g.height()) - std::atan2(w, h);
    const double denom = std::max(w * w + h * h, 1e-9);
    Val4 r;
    r.v = k * q * q;
    const double dv_dw = -2.0 * k * q * h / denom;
    const double dv_dh = 2.0 * k * q * w / denom;
    r.g = {-dv_dw, -dv_dh, dv_dw, dv_dh};
    return r;
}

inline void require_positive_gt(const BBox& g, const char* who) {
    if (g.width() <= 0.0 || g.height() <= 0.0)
        throw std::invalid_argument(std::string(who) + ": ground-truth box must have positive area");
}

}  // namespace detail

// L = 1 - IoU + rho^2/c^2 + alpha*v, with alpha = v/((1-IoU)+v) held constant
// during differentiation.
inline LossValue ciou_loss(const BBox& pred, const BBox& gt) {
    detail::require_positive_gt(gt, "ciou_loss");
    using namespace detail;
    const Val4 i = iou_grad(pred, gt);
    const Val4 rho2 = center_dist2_grad(pred, gt);
    const Val4 cw = enclose_w_grad(pred, gt), ch = enclose_h_grad(pred, gt);
    const Val4 c2 = cw * cw + ch * ch;
    const Val4 v = aspect_v_grad(pred, gt);
    const double alpha = v.v / std::max((1.0 - i.v) + v.v, 1e-9);

    const Val4 loss = constant(1.0) - i + div_guarded(rho2, c2) + alpha * v;
    return {loss.v, loss.g};
}

// L = 1 - IoU + rho^2/c^2 + (w-wg)^2/cw^2 + (h-hg)^2/ch^2.
inline LossValue eiou_loss(const BBox& pred, const BBox& gt) {
    detail::require_positive_gt(gt, "eiou_loss");
    using namespace detail;
    const Val4 i = iou_grad(pred, gt);
    const Val4 rho2 = center_dist2_grad(pred, gt);
    const Val4 cw = enclose_w_grad(pred, gt), ch = enclose_h_grad(pred, gt);
    const Val4 c2 = cw * cw + ch * ch;

    const double dw = pred.width() - gt.width();
    const double dh = pred.height() - gt.height();
    const Val4 dw2{dw * dw, {-2.0 * dw, 0.0, 2.0 * dw, 0.0}};
    const Val4 dh2{dh * dh, {0.0, -2.0 * dh, 0.0, 2.0 * dh}};

    const Val4 loss = constant(1.0) - i + div_guarded(rho2, c2) + div_guarded(dw2, cw * cw) +
                      div_guarded(dh2, ch * ch);
    return {loss.v, loss.g};
}

// Focused L = r * R * (1 - IoU) with distance attention R = exp(rho^2/D^2).
// D^2, the outlierness beta and hence r are held constant during
// differentiation; the returned state folds this sample's IoU loss into the
// running mean.
inline std::pair<LossValue, WiouState> wiou_loss(const BBox& pred, const BBox& gt,
                                                 const WiouState& state) {
    if (!(state.running_mean_iou_loss > 0.0) || !(state.momentum > 0.0 && state.momentum < 1.0) ||
        !(state.alpha > 0.0) || !(state.delta > 0.0))
        throw std::invalid_argument("wiou_loss: uninitialized or invalid state");
    detail::require_positive_gt(gt, "wiou_loss");
    using namespace detail;

    const Val4 i = iou_grad(pred, gt);
    const Val4 liou = constant(1.0) - i;
    const Val4 rho2 = center_dist2_grad(pred, gt);
    const Val4 cw = enclose_w_grad(pred, gt), ch = enclose_h_grad(pred, gt);
    const double d2 = std::max(cw.v * cw.v + ch.v * ch.v, 1e-9);  // detached

    Val4 att;
    att.v = std::exp(rho2.v / d2);
    for (int k = 0; k < 4; ++k) att.g[k] = att.v * rho2.g[k] / d2;

    const double beta = liou.v / state.running_mean_iou_loss;
    const double r = beta / (state.delta * std::pow(state.alpha, beta - state.delta));

    const Val4 focused = r * (att * liou);

    WiouState next = state;
    next.running_mean_iou_loss =
        state.momentum * state.running_mean_iou_loss + (1.0 - state.momentum) * liou.v;
    return {LossValue{focused.v, focused.g}, next};
}

// WIoU focusing coefficient on its own, for studying r(beta).
inline double wiou_focus_coeff(double beta, double alpha, double delta) {
    return beta / (delta * std::pow(alpha, beta - delta));
}

// Batch-style state update: callers that score a whole batch against one
// state fold the batch mean of L_iou in with a single EMA step.
inline WiouState wiou_update_batch(const WiouState& state, double batch_mean_iou_loss) {
    if (!(batch_mean_iou_loss >= 0.0))
        throw std::invalid_argument("wiou_update_batch: mean IoU loss must be >= 0");
    WiouState next = state;
    next.running_mean_iou_loss =
        state.momentum * state.running_mean_iou_loss + (1.0 - state.momentum) * batch_mean_iou_loss;
    return next;
}

// -alpha_t * (1-p_t)^gamma * ln(p_t); prob must be strictly inside (0,1).
inline ScalarLoss focal_loss(double prob, int target, double alpha = 0.25, double gamma = 2.0) {
    if (!(prob > 0.0 && prob < 1.0))
        throw std::invalid_argument("focal_loss: prob must lie strictly in (0,1)");
    if (target != 0 && target != 1) throw std::invalid_argument("focal_loss: target must be 0 or 1");
    if (gamma < 0.0) throw std::invalid_argument("focal_loss: gamma must be >= 0");

    const double pt = target == 1 ? prob : 1.0 - prob;
    const double at = target == 1 ? alpha : 1.0 - alpha;
    const double one_m = 1.0 - pt;
    const double value = -at * std::pow(one_m, gamma) * std::log(pt);

    // d/d(pt), then chain through pt = prob or 1-prob
    const double dpow = gamma > 0.0 ? gamma * std::pow(one_m, gamma - 1.0) : 0.0;
    const double d_dpt = at * (dpow * std::log(pt) - std::pow(one_m, gamma) / pt);
    return {value, target == 1 ? d_dpt : -d_dpt};
}

// Numerically stable BCE on a raw logit: max(z,0) - z*t + ln(1+e^{-|z|}).
inline ScalarLoss bce_with_logits(double logit, int target) {
    if (target != 0 && target != 1)
        throw std::invalid_argument("bce_with_logits: target must be 0 or 1");
    const double z = logit;
    const double value = std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::fabs(z)));
    const double sig = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    return {value, sig - target};
}

}  // namespace detkit
