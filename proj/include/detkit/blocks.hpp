#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "detkit/tensor.hpp"

namespace detkit {

// ---------------------------------------------------------------------------
// Coordinate attention
// ---------------------------------------------------------------------------

// Inference-mode per-channel normalization (stored statistics).
template <typename T = float>
struct BnParams {
    std::vector<T> gamma, beta, mean, var;
    T eps = T(0);

    static BnParams identity(int channels) {
        BnParams p;
        p.gamma.assign(channels, T(1));
        p.beta.assign(channels, T(0));
        p.mean.assign(channels, T(0));
        p.var.assign(channels, T(1));
        return p;
    }
};

template <typename T = float>
struct CaParams {
    ConvSpec<T> reduce;    // 1x1, C -> C/ratio, shared trunk
    ConvSpec<T> expand_h;  // 1x1, C/ratio -> C
    ConvSpec<T> expand_w;  // 1x1, C/ratio -> C
    BnParams<T> bn;        // over C/ratio channels
    int ratio = 8;
};

namespace detail {

template <typename T>
Tensor<T> bn_infer(const Tensor<T>& x, const BnParams<T>& bn) {
    const int c_ = x.shape[1];
    if (static_cast<int>(bn.gamma.size()) != c_ || static_cast<int>(bn.var.size()) != c_)
        throw std::invalid_argument("batchnorm: parameter size != channels");
    Tensor<T> out = x;
    for (int n = 0; n < x.shape[0]; ++n)
        for (int c = 0; c < c_; ++c) {
            const double scale = bn.gamma[c] / std::sqrt(static_cast<double>(bn.var[c]) + bn.eps);
            const double shift = bn.beta[c] - scale * bn.mean[c];
            for (int h = 0; h < x.shape[2]; ++h)
                for (int w = 0; w < x.shape[3]; ++w)
                    out.at4(n, c, h, w) = static_cast<T>(scale * x.at4(n, c, h, w) + shift);
        }
    return out;
}

template <typename T>
Tensor<T> bn_infer_backward(const Tensor<T>& grad_out, const BnParams<T>& bn) {
    Tensor<T> gx = grad_out;
    for (int n = 0; n < gx.shape[0]; ++n)
        for (int c = 0; c < gx.shape[1]; ++c) {
            const double scale = bn.gamma[c] / std::sqrt(static_cast<double>(bn.var[c]) + bn.eps);
            for (int h = 0; h < gx.shape[2]; ++h)
                for (int w = 0; w < gx.shape[3]; ++w)
                    gx.at4(n, c, h, w) = static_cast<T>(scale * grad_out.at4(n, c, h, w));
        }
    return gx;
}

// stack a (N,C,H,1) block on top of a (N,C,W,1) block -> (N,C,H+W,1)
template <typename T>
Tensor<T> concat_rows(const Tensor<T>& a, const Tensor<T>& b) {
    const int n_ = a.shape[0], c_ = a.shape[1], ha = a.shape[2], hb = b.shape[2];
    Tensor<T> out({n_, c_, ha + hb, 1});
    for (int n = 0; n < n_; ++n)
        for (int c = 0; c < c_; ++c) {
            for (int i = 0; i < ha; ++i) out.at4(n, c, i, 0) = a.at4(n, c, i, 0);
            for (int i = 0; i < hb; ++i) out.at4(n, c, ha + i, 0) = b.at4(n, c, i, 0);
        }
    return out;
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& t, int begin, int count) {
    Tensor<T> out({t.shape[0], t.shape[1], count, 1});
    for (int n = 0; n < t.shape[0]; ++n)
        for (int c = 0; c < t.shape[1]; ++c)
            for (int i = 0; i < count; ++i) out.at4(n, c, i, 0) = t.at4(n, c, begin + i, 0);
    return out;
}

template <typename T>
struct CaTrace {
    Tensor<T> trunk_pre;   // reduce conv output, before BN
    Tensor<T> trunk_post;  // after BN, before ReLU
    Tensor<T> gate_h;      // (N,C,H,1)
    Tensor<T> gate_w;      // (N,C,1,W)
};

template <typename T>
std::pair<Tensor<T>, CaTrace<T>> ca_forward(const Tensor<T>& x, const CaParams<T>& p) {
    if (x.rank() != 4) throw std::invalid_argument("coordinate_attention: input must be rank 4");
    const int c = x.shape[1], h = x.shape[2], w = x.shape[3];
    if (p.ratio <= 0 || c % p.ratio != 0)
        throw std::invalid_argument("coordinate_attention: channels not divisible by ratio");
    if (p.reduce.in_channels() != c || p.expand_h.out_channels() != c ||
        p.expand_w.out_channels() != c)
        throw std::invalid_argument("coordinate_attention: conv channel mismatch for C=" +
                                    std::to_string(c));

    const Tensor<T> zh = directional_pool(x, Axis::Horizontal);            // (N,C,H,1)
    const Tensor<T> zw = directional_pool(x, Axis::Vertical);              // (N,C,1,W)
    const Tensor<T> zw_col = zw.reshaped({x.shape[0], c, w, 1});           // transpose to rows
    const Tensor<T> joint = concat_rows(zh, zw_col);                       // (N,C,H+W,1)

    CaTrace<T> tr;
    tr.trunk_pre = conv2d(joint, p.reduce);
    tr.trunk_post = bn_infer(tr.trunk_pre, p.bn);
    const Tensor<T> f = activation(tr.trunk_post, Act::Relu);

    const Tensor<T> fh = slice_rows(f, 0, h);
    const Tensor<T> fw = slice_rows(f, h, w);
    tr.gate_h = activation(conv2d(fh, p.expand_h), Act::Sigmoid);          // (N,C,H,1)
    const Tensor<T> gw_col = activation(conv2d(fw, p.expand_w), Act::Sigmoid);
    tr.gate_w = gw_col.reshaped({x.shape[0], c, 1, w});                    // back to (N,C,1,W)

    Tensor<T> y = elementwise(elementwise(x, tr.gate_h, EwOp::Mul), tr.gate_w, EwOp::Mul);
    return {std::move(y), std::move(tr)};
}

}  // namespace detail

// y_c(i,j) = x_c(i,j) * g_h(i) * g_w(j), gates built from directional pooling.
template <typename T>
Tensor<T> coordinate_attention(const Tensor<T>& x, const CaParams<T>& p) {
    return detail::ca_forward(x, p).first;
}

// Attention maps (g_h, g_w), exposed for range checks.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> coordinate_attention_maps(const Tensor<T>& x, const CaParams<T>& p) {
    auto tr = detail::ca_forward(x, p).second;
    return {tr.gate_h, tr.gate_w};
}

template <typename T>
Tensor<T> coordinate_attention_backward(const Tensor<T>& x, const CaParams<T>& p,
                                        const Tensor<T>& grad_out) {
    const int h = x.shape[2], w = x.shape[3];
    auto [y, tr] = detail::ca_forward(x, p);
    (void)y;

    // direct product path
    Tensor<T> gx = elementwise(elementwise(grad_out, tr.gate_h, EwOp::Mul), tr.gate_w, EwOp::Mul);

    // gate paths
    const Tensor<T> d_gh = reduce_to_shape(
        elementwise(elementwise(grad_out, x, EwOp::Mul), tr.gate_w, EwOp::Mul), tr.gate_h.shape);
    const Tensor<T> d_gw = reduce_to_shape(
        elementwise(elementwise(grad_out, x, EwOp::Mul), tr.gate_h, EwOp::Mul), tr.gate_w.shape);

    // through the sigmoids: g' = g(1-g)
    Tensor<T> d_pre_h = d_gh;
    for (std::size_t i = 0; i < d_pre_h.data.size(); ++i) {
        const T g = tr.gate_h.data[i];
        d_pre_h.data[i] = static_cast<T>(d_gh.data[i] * g * (T(1) - g));
    }
    Tensor<T> d_pre_w_col({x.shape[0], x.shape[1], w, 1});
    for (std::size_t i = 0; i < d_pre_w_col.data.size(); ++i) {
        const T g = tr.gate_w.data[i];  // same flat layout as the column view
        d_pre_w_col.data[i] = static_cast<T>(d_gw.data[i] * g * (T(1) - g));
    }

    const std::vector<int> trunk_h_shape{x.shape[0], x.shape[1] / p.ratio, h, 1};
    const std::vector<int> trunk_w_shape{x.shape[0], x.shape[1] / p.ratio, w, 1};
    const Tensor<T> d_fh = conv2d_backward_input(d_pre_h, p.expand_h, trunk_h_shape);
    const Tensor<T> d_fw = conv2d_backward_input(d_pre_w_col, p.expand_w, trunk_w_shape);

    Tensor<T> d_f = detail::concat_rows(d_fh, d_fw);
    const Tensor<T> d_post = activation_backward(d_f, tr.trunk_post, Act::Relu);
    const Tensor<T> d_pre = detail::bn_infer_backward(d_post, p.bn);
    const Tensor<T> d_joint =
        conv2d_backward_input(d_pre, p.reduce, {x.shape[0], x.shape[1], h + w, 1});

    // undo concat, then spread the pooling means
    const Tensor<T> d_zh = detail::slice_rows(d_joint, 0, h);
    const Tensor<T> d_zw_col = detail::slice_rows(d_joint, h, w);
    for (int n = 0; n < x.shape[0]; ++n)
        for (int c = 0; c < x.shape[1]; ++c)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j)
                    gx.at4(n, c, i, j) += static_cast<T>(d_zh.at4(n, c, i, 0) / T(w) +
                                                         d_zw_col.at4(n, c, j, 0) / T(h));
    return gx;
}

// ---------------------------------------------------------------------------
// BiFPN weighted fusion
// ---------------------------------------------------------------------------

template <typename T = float>
struct BifpnNodeParams {
    std::vector<T> weights;  // one per fused input, rectified to >= 0 before use
    T epsilon = T(1e-4);
    ConvSpec<T> post_conv;
};

namespace detail {
template <typename T>
std::vector<double> rectified_weights(const BifpnNodeParams<T>& p, std::size_t n_inputs) {
    if (p.weights.size() != n_inputs)
        throw std::invalid_argument("bifpn_fuse: weight count != input count");
    if (!(p.epsilon > T(0))) throw std::invalid_argument("bifpn_fuse: epsilon must be positive");
    std::vector<double> w(n_inputs);
    for (std::size_t i = 0; i < n_inputs; ++i) w[i] = std::max(0.0, static_cast<double>(p.weights[i]));
    return w;
}
}  // namespace detail

// O = sum(w_i * I_i) / (eps + sum w_i), inputs resized to the first input's
// extent, then post_conv.
template <typename T>
Tensor<T> bifpn_fuse(const std::vector<Tensor<T>>& inputs, const BifpnNodeParams<T>& p) {
    if (inputs.empty()) throw std::invalid_argument("bifpn_fuse: empty input list");
    if (inputs.size() < 2) throw std::invalid_argument("bifpn_fuse: needs at least two inputs");
    const std::vector<double> w = detail::rectified_weights(p, inputs.size());
    double wsum = static_cast<double>(p.epsilon);
    for (double v : w) wsum += v;

    const int th = inputs[0].shape[2], tw = inputs[0].shape[3];
    Tensor<T> fused(inputs[0].shape);
    std::vector<double> acc(fused.numel(), 0.0);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (inputs[k].shape[0] != inputs[0].shape[0] || inputs[k].shape[1] != inputs[0].shape[1])
            throw std::invalid_argument("bifpn_fuse: batch/channel mismatch on input " +
                                        std::to_string(k));
        if (w[k] == 0.0) continue;
        const Tensor<T> r = (inputs[k].shape[2] == th && inputs[k].shape[3] == tw)
                                ? inputs[k]
                                : resize_nearest(inputs[k], th, tw);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w[k] * static_cast<double>(r.data[i]);
    }
    for (std::size_t i = 0; i < acc.size(); ++i) fused.data[i] = static_cast<T>(acc[i] / wsum);
    return conv2d(fused, p.post_conv);
}

// Gradients with respect to every input tensor (weights held fixed).
template <typename T>
std::vector<Tensor<T>> bifpn_fuse_backward(const std::vector<Tensor<T>>& inputs,
                                           const BifpnNodeParams<T>& p, const Tensor<T>& grad_out) {
    const std::vector<double> w = detail::rectified_weights(p, inputs.size());
    double wsum = static_cast<double>(p.epsilon);
    for (double v : w) wsum += v;

    const int th = inputs[0].shape[2], tw = inputs[0].shape[3];
    const Tensor<T> d_fused =
        conv2d_backward_input(grad_out, p.post_conv,
                              {inputs[0].shape[0], inputs[0].shape[1], th, tw});

    std::vector<Tensor<T>> grads;
    grads.reserve(inputs.size());
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        Tensor<T> dk = d_fused;
        const T scale = static_cast<T>(w[k] / wsum);
        for (T& v : dk.data) v *= scale;
        if (inputs[k].shape[2] != th || inputs[k].shape[3] != tw)
            dk = resize_nearest_backward(dk, inputs[k].shape);
        grads.push_back(std::move(dk));
    }
    return grads;
}

// The layer-4 node pair: top-down fuses {P4_in, resized P5_in}; output node
// fuses {P4_in, P4_td, resized P3_out}. P5 sits at half, P3 at double the P4
// extent.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> bifpn_layer4(const Tensor<T>& p4_in, const Tensor<T>& p5_in,
                                             const Tensor<T>& p3_out,
                                             const BifpnNodeParams<T>& td_params,
                                             const BifpnNodeParams<T>& out_params) {
    const int h4 = p4_in.shape[2], w4 = p4_in.shape[3];
    if (p5_in.shape[2] * 2 != h4 || p5_in.shape[3] * 2 != w4)
        throw std::invalid_argument("bifpn_layer4: P5 extent must be half of P4");
    if (p3_out.shape[2] != 2 * h4 || p3_out.shape[3] != 2 * w4)
        throw std::invalid_argument("bifpn_layer4: P3 extent must be double P4");
    Tensor<T> p4_td = bifpn_fuse<T>({p4_in, p5_in}, td_params);
    Tensor<T> p4_out = bifpn_fuse<T>({p4_in, p4_td, p3_out}, out_params);
    return {std::move(p4_td), std::move(p4_out)};
}

// ---------------------------------------------------------------------------
// Omni-dimensional dynamic convolution (kernel-wise attention)
// ---------------------------------------------------------------------------

template <typename T = float>
struct OdconvParams {
    std::vector<Tensor<T>> kernels;       // K kernels, identical (F, C/g, kh, kw) shape
    std::vector<std::vector<T>> biases;   // K bias vectors (may be empty)
    int stride = 1;
    int pad_h = 0;
    int pad_w = 0;
    int dilation = 1;
    int groups = 1;
    Tensor<T> attn_weight;                // (K, C): GAP features -> K logits
    std::vector<T> attn_bias;             // K

    ConvSpec<T> branch(std::size_t k) const {
        ConvSpec<T> s;
        s.kernel = kernels[k];
        s.bias = k < biases.size() ? biases[k] : std::vector<T>{};
        s.stride = stride;
        s.pad_h = pad_h;
        s.pad_w = pad_w;
        s.dilation = dilation;
        s.groups = groups;
        return s;
    }
};

namespace detail {
template <typename T>
void validate_odconv(const Tensor<T>& x, const OdconvParams<T>& p) {
    if (p.kernels.empty()) throw std::invalid_argument("odconv: needs at least one kernel (K >= 1)");
    for (std::size_t k = 1; k < p.kernels.size(); ++k)
        if (p.kernels[k].shape != p.kernels[0].shape)
            throw std::invalid_argument("odconv: kernel " + std::to_string(k) + " shape differs");
    const int kk = static_cast<int>(p.kernels.size());
    if (p.attn_weight.rank() != 2 || p.attn_weight.shape[0] != kk ||
        p.attn_weight.shape[1] != x.shape[1])
        throw std::invalid_argument("odconv: attention weight must be (K, C)");
    if (static_cast<int>(p.attn_bias.size()) != kk)
        throw std::invalid_argument("odconv: attention bias must have K entries");
}

// per-sample global average pool -> (N, C)
template <typename T>
std::vector<std::vector<double>> gap_nc(const Tensor<T>& x) {
    const int n_ = x.shape[0], c_ = x.shape[1], h = x.shape[2], w = x.shape[3];
    std::vector<std::vector<double>> g(n_, std::vector<double>(c_, 0.0));
    for (int n = 0; n < n_; ++n)
        for (int c = 0; c < c_; ++c) {
            double s = 0.0;
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) s += static_cast<double>(x.at4(n, c, i, j));
            g[n][c] = s / (static_cast<double>(h) * w);
        }
    return g;
}
}  // namespace detail

// Per-sample kernel attention a = softmax(W * gap(x) + b).
template <typename T>
std::vector<std::vector<T>> odconv_attention(const Tensor<T>& x, const OdconvParams<T>& p) {
    detail::validate_odconv(x, p);
    const auto gap = detail::gap_nc(x);
    const int kk = static_cast<int>(p.kernels.size());
    std::vector<std::vector<T>> attn(x.shape[0]);
    for (int n = 0; n < x.shape[0]; ++n) {
        std::vector<T> logits(kk);
        for (int k = 0; k < kk; ++k) {
            double s = static_cast<double>(p.attn_bias[k]);
            for (int c = 0; c < x.shape[1]; ++c)
                s += static_cast<double>(p.attn_weight.data[static_cast<std::size_t>(k) * x.shape[1] + c]) *
                     gap[n][c];
            logits[k] = static_cast<T>(s);
        }
        attn[n] = softmax(logits);
    }
    return attn;
}

// y = sum_k a_k * Conv_k(x); a_k computed per sample from the input itself.
template <typename T>
Tensor<T> odconv(const Tensor<T>& x, const OdconvParams<T>& p) {
    const auto attn = odconv_attention(x, p);
    Tensor<T> out;
    for (std::size_t k = 0; k < p.kernels.size(); ++k) {
        const Tensor<T> yk = conv2d(x, p.branch(k));
        if (k == 0) out = Tensor<T>(yk.shape);
        const std::size_t per_n = out.numel() / out.shape[0];
        for (int n = 0; n < out.shape[0]; ++n) {
            const T a = attn[n][k];
            for (std::size_t i = 0; i < per_n; ++i)
                out.data[n * per_n + i] += a * yk.data[n * per_n + i];
        }
    }
    return out;
}

// Input gradient, including the path through the attention logits.
template <typename T>
Tensor<T> odconv_backward_input(const Tensor<T>& x, const OdconvParams<T>& p,
                                const Tensor<T>& grad_out) {
    const auto attn = odconv_attention(x, p);
    const int n_ = x.shape[0], c_ = x.shape[1], h = x.shape[2], w = x.shape[3];
    const int kk = static_cast<int>(p.kernels.size());
    const std::size_t per_n = grad_out.numel() / n_;

    Tensor<T> gx(x.shape);
    // d(loss)/d(a_{n,k}) = <grad_out_n, Conv_k(x)_n>
    std::vector<std::vector<double>> d_attn(n_, std::vector<double>(kk, 0.0));
    for (int k = 0; k < kk; ++k) {
        const ConvSpec<T> spec = p.branch(k);
        const Tensor<T> yk = conv2d(x, spec);
        for (int n = 0; n < n_; ++n)
            for (std::size_t i = 0; i < per_n; ++i)
                d_attn[n][k] += static_cast<double>(grad_out.data[n * per_n + i]) *
                                static_cast<double>(yk.data[n * per_n + i]);
        // conv path: scale grad_out by a_{n,k} per sample, push through the kernel
        Tensor<T> scaled = grad_out;
        for (int n = 0; n < n_; ++n)
            for (std::size_t i = 0; i < per_n; ++i) scaled.data[n * per_n + i] *= attn[n][k];
        const Tensor<T> gk = conv2d_backward_input(scaled, spec, x.shape);
        for (std::size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += gk.data[i];
    }

    // attention path: softmax backward, then the affine map, then the GAP spread
    for (int n = 0; n < n_; ++n) {
        double dot = 0.0;
        for (int k = 0; k < kk; ++k) dot += d_attn[n][k] * static_cast<double>(attn[n][k]);
        std::vector<double> d_gap(c_, 0.0);
        for (int k = 0; k < kk; ++k) {
            const double d_logit = static_cast<double>(attn[n][k]) * (d_attn[n][k] - dot);
            for (int c = 0; c < c_; ++c)
                d_gap[c] +=
                    d_logit *
                    static_cast<double>(p.attn_weight.data[static_cast<std::size_t>(k) * c_ + c]);
        }
        const double inv_hw = 1.0 / (static_cast<double>(h) * w);
        for (int c = 0; c < c_; ++c) {
            const T add = static_cast<T>(d_gap[c] * inv_hw);
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) gx.at4(n, c, i, j) += add;
        }
    }
    return gx;
}

// ---------------------------------------------------------------------------
// Large separable kernel attention
// ---------------------------------------------------------------------------

template <typename T = float>
struct LskaParams {
    ConvSpec<T> dw_h;   // 1 x k depthwise
    ConvSpec<T> dw_v;   // k x 1 depthwise
    ConvSpec<T> dwd_h;  // 1 x k depthwise, dilated
    ConvSpec<T> dwd_v;  // k x 1 depthwise, dilated
};

namespace detail {
template <typename T>
void validate_lska_spec(const ConvSpec<T>& s, int channels, const char* name) {
    if (s.groups != channels || s.kernel.shape[0] != channels || s.kernel.shape[1] != 1)
        throw std::invalid_argument(std::string("lska: ") + name +
                                    " must be depthwise (groups == channels)");
    if (s.kernel.shape[2] != 1 && s.kernel.shape[3] != 1)
        throw std::invalid_argument(std::string("lska: ") + name + " must be a 1xk or kx1 kernel");
}
}  // namespace detail

// Output = (dw_v . dw_h)(x) ⊙ (dwd_v . dwd_h)(x); both branches preserve
// the spatial extent.
template <typename T>
Tensor<T> lska(const Tensor<T>& x, const LskaParams<T>& p) {
    const int c = x.shape[1];
    detail::validate_lska_spec(p.dw_h, c, "dw_h");
    detail::validate_lska_spec(p.dw_v, c, "dw_v");
    detail::validate_lska_spec(p.dwd_h, c, "dwd_h");
    detail::validate_lska_spec(p.dwd_v, c, "dwd_v");

    const Tensor<T> a = conv2d(conv2d(x, p.dw_h), p.dw_v);
    const Tensor<T> b = conv2d(conv2d(x, p.dwd_h), p.dwd_v);
    if (a.shape != x.shape || b.shape != x.shape)
        throw std::invalid_argument("lska: branch convolutions must preserve spatial extent");
    return elementwise(a, b, EwOp::Mul);
}

template <typename T>
Tensor<T> lska_backward_input(const Tensor<T>& x, const LskaParams<T>& p, const Tensor<T>& grad_out) {
    const Tensor<T> ah = conv2d(x, p.dw_h);
    const Tensor<T> a = conv2d(ah, p.dw_v);
    const Tensor<T> bh = conv2d(x, p.dwd_h);
    const Tensor<T> b = conv2d(bh, p.dwd_v);

    const Tensor<T> da = elementwise(grad_out, b, EwOp::Mul);
    const Tensor<T> db = elementwise(grad_out, a, EwOp::Mul);

    const Tensor<T> gxa =
        conv2d_backward_input(conv2d_backward_input(da, p.dw_v, ah.shape), p.dw_h, x.shape);
    const Tensor<T> gxb =
        conv2d_backward_input(conv2d_backward_input(db, p.dwd_v, bh.shape), p.dwd_h, x.shape);
    return elementwise(gxa, gxb, EwOp::Add);
}

// Depthwise 1 x k / k x 1 spec with same-padding. Horizontal=true gives 1 x k.
template <typename T>
ConvSpec<T> make_depthwise_1d(int channels, int k, bool horizontal, int dilation, const std::vector<T>& taps) {
    if (k % 2 == 0) throw std::invalid_argument("make_depthwise_1d: kernel length must be odd");
    if (static_cast<int>(taps.size()) != channels * k)
        throw std::invalid_argument("make_depthwise_1d: need channels*k taps");
    ConvSpec<T> s;
    s.kernel = horizontal ? Tensor<T>({channels, 1, 1, k}) : Tensor<T>({channels, 1, k, 1});
    s.kernel.data.assign(taps.begin(), taps.end());
    s.groups = channels;
    s.dilation = dilation;
    const int pad = dilation * (k - 1) / 2;
    s.pad_h = horizontal ? 0 : pad;
    s.pad_w = horizontal ? pad : 0;
    return s;
}

// 1x1 convolution that passes channels through unchanged.
template <typename T>
ConvSpec<T> identity_conv1x1(int channels) {
    ConvSpec<T> s;
    s.kernel = Tensor<T>({channels, channels, 1, 1});
    for (int c = 0; c < channels; ++c) s.kernel.at4(c, c, 0, 0) = T(1);
    return s;
}

}  // namespace detkit
