#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace detkit {

// Dense row-major tensor. Feature maps are (N,C,H,W), raw images (H,W,C).
template <typename T = float>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s, T fill = T(0)) : shape(std::move(s)) {
        std::size_t n = 1;
        for (int d : shape) {
            if (d <= 0) throw std::invalid_argument("Tensor: non-positive extent " + std::to_string(d));
            n *= static_cast<std::size_t>(d);
        }
        data.assign(n, fill);
    }
    Tensor(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        std::size_t n = 1;
        for (int dd : shape) n *= static_cast<std::size_t>(dd);
        if (n != data.size()) throw std::invalid_argument("Tensor: data length does not match shape");
    }

    std::size_t numel() const { return data.size(); }
    int rank() const { return static_cast<int>(shape.size()); }

    std::size_t index4(int n, int c, int h, int w) const {
        return ((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w;
    }
    T& at4(int n, int c, int h, int w) { return data[index4(n, c, h, w)]; }
    const T& at4(int n, int c, int h, int w) const { return data[index4(n, c, h, w)]; }

    std::size_t index3(int a, int b, int c) const {
        return (static_cast<std::size_t>(a) * shape[1] + b) * shape[2] + c;
    }
    T& at3(int a, int b, int c) { return data[index3(a, b, c)]; }
    const T& at3(int a, int b, int c) const { return data[index3(a, b, c)]; }

    // Same data, new shape (element count must match).
    Tensor<T> reshaped(std::vector<int> s) const {
        Tensor<T> out;
        out.shape = std::move(s);
        std::size_t n = 1;
        for (int d : out.shape) n *= static_cast<std::size_t>(d);
        if (n != data.size()) throw std::invalid_argument("reshape: element count mismatch");
        out.data = data;
        return out;
    }
};

template <typename T>
inline std::string shape_str(const Tensor<T>& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(t.shape[i]);
    }
    return s + ")";
}

template <typename T>
inline bool all_finite(const Tensor<T>& t) {
    for (T v : t.data)
        if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
}

// Convolution weights plus geometry. (F, C/groups, kh, kw) kernel.
// groups == C with F == C is a depthwise convolution.
template <typename T = float>
struct ConvSpec {
    Tensor<T> kernel;
    std::vector<T> bias;  // size F, or empty for no bias
    int stride = 1;
    int pad_h = 0;
    int pad_w = 0;
    int dilation = 1;
    int groups = 1;

    ConvSpec() = default;
    ConvSpec(Tensor<T> k, std::vector<T> b, int stride_ = 1, int padding = 0, int dilation_ = 1,
             int groups_ = 1)
        : kernel(std::move(k)), bias(std::move(b)), stride(stride_), pad_h(padding), pad_w(padding),
          dilation(dilation_), groups(groups_) {}

    int out_channels() const { return kernel.shape[0]; }
    int in_channels() const { return kernel.shape[1] * groups; }
};

namespace detail {

inline int conv_out_extent(int in, int pad, int dil, int k, int stride) {
    return (in + 2 * pad - dil * (k - 1) - 1) / stride + 1;
}

template <typename T>
inline void validate_conv(const Tensor<T>& x, const ConvSpec<T>& spec) {
    if (x.rank() != 4) throw std::invalid_argument("conv2d: input must be rank 4, got " + shape_str(x));
    if (spec.kernel.rank() != 4)
        throw std::invalid_argument("conv2d: kernel must be rank 4, got " + shape_str(spec.kernel));
    if (spec.stride < 1 || spec.dilation < 1 || spec.groups < 1 || spec.pad_h < 0 || spec.pad_w < 0)
        throw std::invalid_argument("conv2d: bad stride/dilation/groups/padding");
    const int c = x.shape[1];
    if (spec.kernel.shape[1] * spec.groups != c)
        throw std::invalid_argument("conv2d: input channels " + std::to_string(c) +
                                    " != kernel_channels*groups " +
                                    std::to_string(spec.kernel.shape[1] * spec.groups));
    if (spec.kernel.shape[0] % spec.groups != 0)
        throw std::invalid_argument("conv2d: out channels not divisible by groups");
    if (!spec.bias.empty() && static_cast<int>(spec.bias.size()) != spec.kernel.shape[0])
        throw std::invalid_argument("conv2d: bias size != out channels");
    const int oh = conv_out_extent(x.shape[2], spec.pad_h, spec.dilation, spec.kernel.shape[2], spec.stride);
    const int ow = conv_out_extent(x.shape[3], spec.pad_w, spec.dilation, spec.kernel.shape[3], spec.stride);
    if (oh < 1 || ow < 1)
        throw std::invalid_argument("conv2d: zero-sized output (H'=" + std::to_string(oh) +
                                    ", W'=" + std::to_string(ow) + ")");
}

}  // namespace detail

// Cross-correlation with bias (no kernel flip). Accumulates in double.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const ConvSpec<T>& spec) {
    detail::validate_conv(x, spec);
    const int n_ = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3];
    const int f = spec.kernel.shape[0], kh = spec.kernel.shape[2], kw = spec.kernel.shape[3];
    const int cg = spec.kernel.shape[1];
    const int fg = f / spec.groups;
    const int oh = detail::conv_out_extent(h, spec.pad_h, spec.dilation, kh, spec.stride);
    const int ow = detail::conv_out_extent(w, spec.pad_w, spec.dilation, kw, spec.stride);
    (void)c;

    Tensor<T> out({n_, f, oh, ow});
    for (int n = 0; n < n_; ++n) {
        for (int g = 0; g < spec.groups; ++g) {
            for (int fo = 0; fo < fg; ++fo) {
                const int ff = g * fg + fo;
                const double b = spec.bias.empty() ? 0.0 : static_cast<double>(spec.bias[ff]);
                for (int y = 0; y < oh; ++y) {
                    for (int xo = 0; xo < ow; ++xo) {
                        double acc = b;
                        for (int ci = 0; ci < cg; ++ci) {
                            const int cc = g * cg + ci;
                            for (int ky = 0; ky < kh; ++ky) {
                                const int iy = y * spec.stride - spec.pad_h + ky * spec.dilation;
                                if (iy < 0 || iy >= h) continue;
                                for (int kx = 0; kx < kw; ++kx) {
                                    const int ix = xo * spec.stride - spec.pad_w + kx * spec.dilation;
                                    if (ix < 0 || ix >= w) continue;
                                    acc += static_cast<double>(x.at4(n, cc, iy, ix)) *
                                           static_cast<double>(spec.kernel.at4(ff, ci, ky, kx));
                                }
                            }
                        }
                        out.at4(n, ff, y, xo) = static_cast<T>(acc);
                    }
                }
            }
        }
    }
    return out;
}

// Gradient of conv2d with respect to its input (scatter of grad_out through the kernel).
template <typename T>
Tensor<T> conv2d_backward_input(const Tensor<T>& grad_out, const ConvSpec<T>& spec,
                                const std::vector<int>& in_shape) {
    if (in_shape.size() != 4) throw std::invalid_argument("conv2d_backward_input: need rank-4 input shape");
    Tensor<T> gx(in_shape);
    const int n_ = in_shape[0], h = in_shape[2], w = in_shape[3];
    const int f = spec.kernel.shape[0], kh = spec.kernel.shape[2], kw = spec.kernel.shape[3];
    const int cg = spec.kernel.shape[1];
    const int fg = f / spec.groups;
    const int oh = grad_out.shape[2], ow = grad_out.shape[3];

    for (int n = 0; n < n_; ++n) {
        for (int g = 0; g < spec.groups; ++g) {
            for (int fo = 0; fo < fg; ++fo) {
                const int ff = g * fg + fo;
                for (int y = 0; y < oh; ++y) {
                    for (int xo = 0; xo < ow; ++xo) {
                        const double go = static_cast<double>(grad_out.at4(n, ff, y, xo));
                        if (go == 0.0) continue;
                        for (int ci = 0; ci < cg; ++ci) {
                            const int cc = g * cg + ci;
                            for (int ky = 0; ky < kh; ++ky) {
                                const int iy = y * spec.stride - spec.pad_h + ky * spec.dilation;
                                if (iy < 0 || iy >= h) continue;
                                for (int kx = 0; kx < kw; ++kx) {
                                    const int ix = xo * spec.stride - spec.pad_w + kx * spec.dilation;
                                    if (ix < 0 || ix >= w) continue;
                                    gx.at4(n, cc, iy, ix) += static_cast<T>(
                                        go * static_cast<double>(spec.kernel.at4(ff, ci, ky, kx)));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return gx;
}

enum class Axis { Horizontal, Vertical };

// Horizontal: per-row mean over width -> (N,C,H,1).
// Vertical: per-column mean over height -> (N,C,1,W).
template <typename T>
Tensor<T> directional_pool(const Tensor<T>& x, Axis axis) {
    if (x.rank() != 4) throw std::invalid_argument("directional_pool: input must be rank 4");
    const int n_ = x.shape[0], c_ = x.shape[1], h = x.shape[2], w = x.shape[3];
    if (h < 1 || w < 1) throw std::invalid_argument("directional_pool: empty spatial dims");
    if (axis == Axis::Horizontal) {
        Tensor<T> out({n_, c_, h, 1});
        for (int n = 0; n < n_; ++n)
            for (int c = 0; c < c_; ++c)
                for (int i = 0; i < h; ++i) {
                    double s = 0.0;
                    for (int j = 0; j < w; ++j) s += static_cast<double>(x.at4(n, c, i, j));
                    out.at4(n, c, i, 0) = static_cast<T>(s / w);
                }
        return out;
    }
    Tensor<T> out({n_, c_, 1, w});
    for (int n = 0; n < n_; ++n)
        for (int c = 0; c < c_; ++c)
            for (int j = 0; j < w; ++j) {
                double s = 0.0;
                for (int i = 0; i < h; ++i) s += static_cast<double>(x.at4(n, c, i, j));
                out.at4(n, c, 0, j) = static_cast<T>(s / h);
            }
    return out;
}

template <typename T>
Tensor<T> directional_pool_backward(const Tensor<T>& grad_out, Axis axis,
                                    const std::vector<int>& in_shape) {
    Tensor<T> gx(in_shape);
    const int n_ = in_shape[0], c_ = in_shape[1], h = in_shape[2], w = in_shape[3];
    for (int n = 0; n < n_; ++n)
        for (int c = 0; c < c_; ++c)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j)
                    gx.at4(n, c, i, j) = axis == Axis::Horizontal
                                             ? static_cast<T>(grad_out.at4(n, c, i, 0) / T(w))
                                             : static_cast<T>(grad_out.at4(n, c, 0, j) / T(h));
    return gx;
}

namespace detail {
// Nearest source index for destination cell i. Integer floor keeps identity and
// integer-factor replication exact.
inline int nearest_src(int i, int dst, int src) {
    return static_cast<int>(static_cast<std::int64_t>(i) * src / dst);
}
}  // namespace detail

template <typename T>
Tensor<T> resize_nearest(const Tensor<T>& x, int target_h, int target_w) {
    if (x.rank() != 4) throw std::invalid_argument("resize_nearest: input must be rank 4");
    if (target_h < 1 || target_w < 1)
        throw std::invalid_argument("resize_nearest: non-positive target extent");
    const int n_ = x.shape[0], c_ = x.shape[1], h = x.shape[2], w = x.shape[3];
    Tensor<T> out({n_, c_, target_h, target_w});
    for (int n = 0; n < n_; ++n)
        for (int c = 0; c < c_; ++c)
            for (int i = 0; i < target_h; ++i) {
                const int si = detail::nearest_src(i, target_h, h);
                for (int j = 0; j < target_w; ++j)
                    out.at4(n, c, i, j) = x.at4(n, c, si, detail::nearest_src(j, target_w, w));
            }
    return out;
}

template <typename T>
Tensor<T> resize_nearest_backward(const Tensor<T>& grad_out, const std::vector<int>& in_shape) {
    Tensor<T> gx(in_shape);
    const int h = in_shape[2], w = in_shape[3];
    const int th = grad_out.shape[2], tw = grad_out.shape[3];
    for (int n = 0; n < in_shape[0]; ++n)
        for (int c = 0; c < in_shape[1]; ++c)
            for (int i = 0; i < th; ++i) {
                const int si = detail::nearest_src(i, th, h);
                for (int j = 0; j < tw; ++j)
                    gx.at4(n, c, si, detail::nearest_src(j, tw, w)) += grad_out.at4(n, c, i, j);
            }
    return gx;
}

enum class Act { Sigmoid, Relu };

namespace detail {
template <typename T>
inline T sigmoid_scalar(T x) {
    const double v = static_cast<double>(x);
    double y = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    // keep the open-interval contract even when exp saturates
    const double lo = static_cast<double>(std::numeric_limits<T>::min());
    const double hi = 1.0 - static_cast<double>(std::numeric_limits<T>::epsilon()) / 2.0;
    y = std::min(std::max(y, lo), hi);
    return static_cast<T>(y);
}
}  // namespace detail

template <typename T>
Tensor<T> activation(const Tensor<T>& x, Act kind) {
    Tensor<T> out = x;
    for (T& v : out.data) v = kind == Act::Sigmoid ? detail::sigmoid_scalar(v) : std::max(T(0), v);
    return out;
}

// Gradient through activation given the forward *input*.
template <typename T>
Tensor<T> activation_backward(const Tensor<T>& grad_out, const Tensor<T>& x, Act kind) {
    Tensor<T> gx = grad_out;
    for (std::size_t i = 0; i < gx.data.size(); ++i) {
        if (kind == Act::Sigmoid) {
            const T s = detail::sigmoid_scalar(x.data[i]);
            gx.data[i] = static_cast<T>(grad_out.data[i] * s * (T(1) - s));
        } else {
            gx.data[i] = x.data[i] > T(0) ? grad_out.data[i] : T(0);
        }
    }
    return gx;
}

template <typename T>
std::vector<T> softmax(const std::vector<T>& v) {
    if (v.empty()) throw std::invalid_argument("softmax: empty input");
    double m = -std::numeric_limits<double>::infinity();
    for (T x : v) m = std::max(m, static_cast<double>(x));
    std::vector<double> e(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        e[i] = std::exp(static_cast<double>(v[i]) - m);
        sum += e[i];
    }
    std::vector<T> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<T>(e[i] / sum);
    return out;
}

enum class EwOp { Add, Mul };

namespace detail {
inline std::vector<int> pad4(const std::vector<int>& s) {
    std::vector<int> out(4, 1);
    if (s.size() > 4) throw std::invalid_argument("elementwise: rank > 4 unsupported");
    std::copy(s.begin(), s.end(), out.end() - s.size());
    return out;
}
}  // namespace detail

// Elementwise add/mul with singleton-axis broadcasting (covers the
// (N,C,H,1) x (N,C,1,W) attention product).
template <typename T>
Tensor<T> elementwise(const Tensor<T>& a, const Tensor<T>& b, EwOp op) {
    const std::vector<int> sa = detail::pad4(a.shape), sb = detail::pad4(b.shape);
    std::vector<int> so(4);
    for (int d = 0; d < 4; ++d) {
        if (sa[d] == sb[d]) so[d] = sa[d];
        else if (sa[d] == 1) so[d] = sb[d];
        else if (sb[d] == 1) so[d] = sa[d];
        else
            throw std::invalid_argument("elementwise: incompatible shapes " + shape_str(a) + " vs " +
                                        shape_str(b));
    }
    // result keeps the rank of the wider operand
    std::vector<int> out_shape(so.end() - std::max(a.shape.size(), b.shape.size()), so.end());
    Tensor<T> out(out_shape.empty() ? std::vector<int>{1} : out_shape);

    auto flat = [](const std::vector<int>& s, int n, int c, int h, int w) {
        const int in = s[0] == 1 ? 0 : n, ic = s[1] == 1 ? 0 : c;
        const int ih = s[2] == 1 ? 0 : h, iw = s[3] == 1 ? 0 : w;
        return ((static_cast<std::size_t>(in) * s[1] + ic) * s[2] + ih) * s[3] + iw;
    };
    std::size_t idx = 0;
    for (int n = 0; n < so[0]; ++n)
        for (int c = 0; c < so[1]; ++c)
            for (int h = 0; h < so[2]; ++h)
                for (int w = 0; w < so[3]; ++w, ++idx) {
                    const T va = a.data[flat(sa, n, c, h, w)];
                    const T vb = b.data[flat(sb, n, c, h, w)];
                    out.data[idx] = op == EwOp::Add ? va + vb : va * vb;
                }
    return out;
}

// Sum t down to `target_shape` over axes where the target extent is 1
// (adjoint of broadcasting).
template <typename T>
Tensor<T> reduce_to_shape(const Tensor<T>& t, const std::vector<int>& target_shape) {
    const std::vector<int> st = detail::pad4(t.shape), sr = detail::pad4(target_shape);
    for (int d = 0; d < 4; ++d)
        if (sr[d] != st[d] && sr[d] != 1)
            throw std::invalid_argument("reduce_to_shape: incompatible target");
    std::vector<double> acc(std::accumulate(sr.begin(), sr.end(), std::size_t(1),
                                            std::multiplies<>()),
                            0.0);
    auto flat = [](const std::vector<int>& s, int n, int c, int h, int w) {
        const int in = s[0] == 1 ? 0 : n, ic = s[1] == 1 ? 0 : c;
        const int ih = s[2] == 1 ? 0 : h, iw = s[3] == 1 ? 0 : w;
        return ((static_cast<std::size_t>(in) * s[1] + ic) * s[2] + ih) * s[3] + iw;
    };
    std::size_t idx = 0;
    for (int n = 0; n < st[0]; ++n)
        for (int c = 0; c < st[1]; ++c)
            for (int h = 0; h < st[2]; ++h)
                for (int w = 0; w < st[3]; ++w, ++idx) acc[flat(sr, n, c, h, w)] += t.data[idx];
    Tensor<T> out(target_shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = static_cast<T>(acc[i]);
    return out;
}

// Central-difference gradient of a scalar function, the oracle all analytic
// backward passes are checked against. Runs in double regardless of T.
template <typename T>
Tensor<double> finite_diff_grad(const std::function<double(const Tensor<T>&)>& f, const Tensor<T>& x,
                                double eps) {
    if (eps <= 0.0) throw std::invalid_argument("finite_diff_grad: eps must be positive");
    Tensor<double> grad(x.shape);
    Tensor<T> probe = x;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const T orig = probe.data[i];
        probe.data[i] = static_cast<T>(static_cast<double>(orig) + eps);
        const double hi = static_cast<double>(probe.data[i]);
        const double fp = f(probe);
        probe.data[i] = static_cast<T>(static_cast<double>(orig) - eps);
        const double lo = static_cast<double>(probe.data[i]);
        const double fm = f(probe);
        probe.data[i] = orig;
        grad.data[i] = (fp - fm) / (hi - lo);
    }
    return grad;
}

}  // namespace detkit
