#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "detkit/blocks.hpp"
#include "detkit/box.hpp"
#include "detkit/losses.hpp"
#include "detkit/rng.hpp"
#include "detkit/tensor.hpp"

namespace detkit {

struct GradCheckResult {
    std::string name;
    int trials = 0;
    double max_rel_err = 0.0;
    double tolerance = 1e-3;
    bool pass = false;
};

namespace gradcheck_detail {

constexpr double kEps = 1e-3;

inline double rel_inf_error(const std::vector<double>& analytic, const std::vector<double>& fd) {
    double num = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        num = std::max(num, std::fabs(analytic[i] - fd[i]));
        scale = std::max({scale, std::fabs(analytic[i]), std::fabs(fd[i])});
    }
    return num / std::max(scale, 1e-8);
}

inline double dot(const Tensor<double>& a, const Tensor<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

inline Tensor<double> random_tensor(const std::vector<int>& shape, Rng& rng, double lo = -1.0,
                                    double hi = 1.0) {
    Tensor<double> t(shape);
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

// probe <u, block(x)> against the hand-written vector-Jacobian product
inline double check_block(const std::function<Tensor<double>(const Tensor<double>&)>& forward,
                          const std::function<Tensor<double>(const Tensor<double>&, const Tensor<double>&)>& vjp,
                          const Tensor<double>& x, Rng& rng) {
    const Tensor<double> probe = forward(x);
    const Tensor<double> u = random_tensor(probe.shape, rng);
    const std::function<double(const Tensor<double>&)> f = [&](const Tensor<double>& t) {
        return dot(u, forward(t));
    };
    const Tensor<double> fd = finite_diff_grad<double>(f, x, kEps);
    const Tensor<double> analytic = vjp(x, u);
    return rel_inf_error(analytic.data, fd.data);
}

inline double fd_scalar(const std::function<double(double)>& f, double x) {
    return (f(x + kEps) - f(x - kEps)) / (2.0 * kEps);
}

// Random box pair that stays differentiable across the finite-difference
// stencil: positive overlap and every branch point (edge ties, enclosing-box
// switches) at least `margin` away.
inline std::pair<BBox, BBox> random_box_pair(Rng& rng, double margin = 8e-3) {
    for (int attempt = 0; attempt < 256; ++attempt) {
        BBox g;
        g.x1 = rng.uniform(0.0, 300.0);
        g.y1 = rng.uniform(0.0, 300.0);
        g.x2 = g.x1 + rng.uniform(20.0, 140.0);
        g.y2 = g.y1 + rng.uniform(20.0, 140.0);
        BBox p;
        p.x1 = g.x1 + rng.uniform(-0.4, 0.4) * g.width();
        p.y1 = g.y1 + rng.uniform(-0.4, 0.4) * g.height();
        p.x2 = g.x2 + rng.uniform(-0.4, 0.4) * g.width();
        p.y2 = g.y2 + rng.uniform(-0.4, 0.4) * g.height();
        if (p.width() < 2.0 || p.height() < 2.0) continue;
        const double iw = std::min(p.x2, g.x2) - std::max(p.x1, g.x1);
        const double ih = std::min(p.y2, g.y2) - std::max(p.y1, g.y1);
        if (iw < margin || ih < margin) continue;
        bool near_tie = false;
        for (double d : {p.x1 - g.x1, p.x2 - g.x2, p.y1 - g.y1, p.y2 - g.y2})
            near_tie |= std::fabs(d) < margin;
        if (near_tie) continue;
        return {p, g};
    }
    return {{0, 0, 10, 10}, {2, 2, 12, 12}};
}

inline double rho2_of(const BBox& p, const BBox& g) {
    const double dx = p.cx() - g.cx(), dy = p.cy() - g.cy();
    return dx * dx + dy * dy;
}
inline double c2_of(const BBox& p, const BBox& g) {
    const BBox e = enclosing_box(p, g);
    return e.width() * e.width() + e.height() * e.height();
}

// central differences over the four corners of the predicted box
inline std::array<double, 4> fd_box(const std::function<double(const BBox&)>& f, const BBox& p) {
    std::array<double, 4> g{};
    for (int i = 0; i < 4; ++i) {
        BBox hi = p, lo = p;
        double* fh = i == 0 ? &hi.x1 : i == 1 ? &hi.y1 : i == 2 ? &hi.x2 : &hi.y2;
        double* fl = i == 0 ? &lo.x1 : i == 1 ? &lo.y1 : i == 2 ? &lo.x2 : &lo.y2;
        *fh += kEps;
        *fl -= kEps;
        g[i] = (f(hi) - f(lo)) / (2.0 * kEps);
    }
    return g;
}

}  // namespace gradcheck_detail

// Every loss and block with a hand-written gradient, checked against the
// finite-difference oracle. Detached sub-expressions (CIoU's alpha, WIoU's
// distance denominator and focusing coefficient) are frozen inside the oracle
// closures exactly as the implementations freeze them.
inline std::vector<GradCheckResult> run_gradchecks(int trials = 100, std::uint64_t seed = 20240401,
                                                   double tol = 1e-3) {
    using namespace gradcheck_detail;
    std::vector<GradCheckResult> results;
    auto record = [&](const std::string& name, double err) {
        results.push_back({name, trials, err, tol, err < tol});
    };

    {  // ciou
        Rng rng(Rng::split(seed, 1));
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            const auto [p, g] = random_box_pair(rng);
            const LossValue lv = ciou_loss(p, g);
            const double v0 = [&] {
                constexpr double k = 4.0 / (M_PI * M_PI);
                const double q = std::atan2(g.width(), g.height()) - std::atan2(p.width(), p.height());
                return k * q * q;
            }();
            const double alpha0 = v0 / std::max((1.0 - iou(p, g)) + v0, 1e-9);
            const auto f = [&](const BBox& b) {
                constexpr double k = 4.0 / (M_PI * M_PI);
                const double q = std::atan2(g.width(), g.height()) - std::atan2(b.width(), b.height());
                return 1.0 - iou(b, g) + rho2_of(b, g) / std::max(c2_of(b, g), 1e-9) +
                       alpha0 * k * q * q;
            };
            const auto fd = fd_box(f, p);
            worst = std::max(worst, rel_inf_error({lv.grad_pred.begin(), lv.grad_pred.end()},
                                                  {fd.begin(), fd.end()}));
        }
        record("ciou_loss", worst);
    }

    {  // eiou
        Rng rng(Rng::split(seed, 2));
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            const auto [p, g] = random_box_pair(rng);
            const LossValue lv = eiou_loss(p, g);
            const auto f = [&](const BBox& b) {
                const BBox e = enclosing_box(b, g);
                const double dw = b.width() - g.width(), dh = b.height() - g.height();
                return 1.0 - iou(b, g) + rho2_of(b, g) / std::max(c2_of(b, g), 1e-9) +
                       dw * dw / std::max(e.width() * e.width(), 1e-9) +
                       dh * dh / std::max(e.height() * e.height(), 1e-9);
            };
            const auto fd = fd_box(f, p);
            worst = std::max(worst, rel_inf_error({lv.grad_pred.begin(), lv.grad_pred.end()},
                                                  {fd.begin(), fd.end()}));
        }
        record("eiou_loss", worst);
    }

    {  // wiou
        Rng rng(Rng::split(seed, 3));
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            const auto [p, g] = random_box_pair(rng);
            WiouState st;
            st.running_mean_iou_loss = rng.uniform(0.4, 1.6);
            const auto [lv, next] = wiou_loss(p, g, st);
            (void)next;
            const double d2 = std::max(c2_of(p, g), 1e-9);
            const double liou0 = 1.0 - iou(p, g);
            const double beta = liou0 / st.running_mean_iou_loss;
            const double r = beta / (st.delta * std::pow(st.alpha, beta - st.delta));
            const auto f = [&](const BBox& b) {
                return r * std::exp(rho2_of(b, g) / d2) * (1.0 - iou(b, g));
            };
            const auto fd = fd_box(f, p);
            worst = std::max(worst, rel_inf_error({lv.grad_pred.begin(), lv.grad_pred.end()},
                                                  {fd.begin(), fd.end()}));
        }
        record("wiou_loss", worst);
    }

    {  // focal
        Rng rng(Rng::split(seed, 4));
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            const double prob = rng.uniform(0.05, 0.95);
            const int target = rng.below(2);
            const double alpha = rng.uniform(0.1, 0.9), gamma = rng.uniform(0.0, 4.0);
            const ScalarLoss sl = focal_loss(prob, target, alpha, gamma);
            const double fd = fd_scalar(
                [&](double x) { return focal_loss(x, target, alpha, gamma).value; }, prob);
            worst = std::max(worst, rel_inf_error({sl.grad}, {fd}));
        }
        record("focal_loss", worst);
    }

    {  // bce
        Rng rng(Rng::split(seed, 5));
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            const double z = rng.uniform(-6.0, 6.0);
            const int target = rng.below(2);
            const ScalarLoss sl = bce_with_logits(z, target);
            const double fd =
                fd_scalar([&](double x) { return bce_with_logits(x, target).value; }, z);
            worst = std::max(worst, rel_inf_error({sl.grad}, {fd}));
        }
        record("bce_with_logits", worst);
    }

    {  // conv2d input gradient
        Rng rng(Rng::split(seed, 6));
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            ConvSpec<double> spec;
            spec.kernel = random_tensor({3, 2, 3, 3}, rng);
            spec.bias = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            spec.stride = 1 + rng.below(2);
            spec.pad_h = spec.pad_w = rng.below(2);
            const Tensor<double> x = random_tensor({1, 2, 6, 7}, rng);
            worst = std::max(
                worst,
                check_block([&](const Tensor<double>& v) { return conv2d(v, spec); },
                            [&](const Tensor<double>& v, const Tensor<double>& u) {
                                (void)v;
                                return conv2d_backward_input(u, spec, x.shape);
                            },
                            x, rng));
        }
        record("conv2d", worst);
    }

    {  // coordinate attention
        Rng rng(Rng::split(seed, 7));
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            const int c = 4, ratio = 2, h = 5, w = 6;
            CaParams<double> p;
            p.ratio = ratio;
            p.reduce.kernel = random_tensor({c / ratio, c, 1, 1}, rng, -0.7, 0.7);
            p.reduce.bias = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
            p.expand_h.kernel = random_tensor({c, c / ratio, 1, 1}, rng, -0.7, 0.7);
            p.expand_w.kernel = random_tensor({c, c / ratio, 1, 1}, rng, -0.7, 0.7);
            p.bn.gamma = {rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
            p.bn.beta = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
            p.bn.mean = {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
            p.bn.var = {rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
            p.bn.eps = 1e-5;

            // keep the ReLU kink outside the difference stencil
            Tensor<double> x;
            bool ok = false;
            for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
                x = random_tensor({1, c, h, w}, rng);
                const auto trace = detail::ca_forward(x, p).second;
                ok = true;
                for (double v : trace.trunk_post.data) ok &= std::fabs(v) > 5e-3;
            }
            worst = std::max(
                worst, check_block(
                           [&](const Tensor<double>& v) { return coordinate_attention(v, p); },
                           [&](const Tensor<double>& v, const Tensor<double>& u) {
                               return coordinate_attention_backward(v, p, u);
                           },
                           x, rng));
        }
        record("coordinate_attention", worst);
    }

    {  // bifpn_fuse, gradient w.r.t. every fused input
        Rng rng(Rng::split(seed, 8));
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            BifpnNodeParams<double> p;
            p.weights = {rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0)};
            p.post_conv.kernel = random_tensor({3, 3, 1, 1}, rng, -0.7, 0.7);
            std::vector<Tensor<double>> inputs{random_tensor({1, 3, 6, 6}, rng),
                                               random_tensor({1, 3, 3, 3}, rng),
                                               random_tensor({1, 3, 12, 12}, rng)};
            const Tensor<double> probe = bifpn_fuse(inputs, p);
            const Tensor<double> u = random_tensor(probe.shape, rng);
            for (std::size_t which = 0; which < inputs.size(); ++which) {
                const std::function<double(const Tensor<double>&)> f =
                    [&](const Tensor<double>& v) {
                        std::vector<Tensor<double>> local = inputs;
                        local[which] = v;
                        return dot(u, bifpn_fuse(local, p));
                    };
                const Tensor<double> fd = finite_diff_grad<double>(f, inputs[which], kEps);
                const Tensor<double> analytic = bifpn_fuse_backward(inputs, p, u)[which];
                worst = std::max(worst, rel_inf_error(analytic.data, fd.data));
            }
        }
        record("bifpn_fuse", worst);
    }

    {  // odconv
        Rng rng(Rng::split(seed, 9));
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            OdconvParams<double> p;
            const int kk = 3;
            for (int k = 0; k < kk; ++k) {
                p.kernels.push_back(random_tensor({4, 3, 3, 3}, rng, -0.5, 0.5));
                p.biases.push_back({rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                                    rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)});
            }
            p.pad_h = p.pad_w = 1;
            p.attn_weight = random_tensor({kk, 3}, rng, -0.6, 0.6);
            p.attn_bias = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
            const Tensor<double> x = random_tensor({2, 3, 5, 5}, rng);
            worst = std::max(worst,
                             check_block([&](const Tensor<double>& v) { return odconv(v, p); },
                                         [&](const Tensor<double>& v, const Tensor<double>& u) {
                                             return odconv_backward_input(v, p, u);
                                         },
                                         x, rng));
        }
        record("odconv", worst);
    }

    {  // lska
        Rng rng(Rng::split(seed, 10));
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            const int c = 3, k = 5;
            auto taps = [&](int len) {
                std::vector<double> v(c * len);
                for (double& x : v) x = rng.uniform(-0.6, 0.6);
                return v;
            };
            LskaParams<double> p;
            p.dw_h = make_depthwise_1d<double>(c, k, true, 1, taps(k));
            p.dw_v = make_depthwise_1d<double>(c, k, false, 1, taps(k));
            p.dwd_h = make_depthwise_1d<double>(c, k, true, 2, taps(k));
            p.dwd_v = make_depthwise_1d<double>(c, k, false, 2, taps(k));
            const Tensor<double> x = random_tensor({1, c, 7, 8}, rng);
            worst = std::max(worst,
                             check_block([&](const Tensor<double>& v) { return lska(v, p); },
                                         [&](const Tensor<double>& v, const Tensor<double>& u) {
                                             return lska_backward_input(v, p, u);
                                         },
                                         x, rng));
        }
        record("lska", worst);
    }

    return results;
}

}  // namespace detkit
