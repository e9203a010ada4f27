#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "shapecx/rng.hpp"
#include "shapecx/tensor.hpp"

namespace shapecx {

// ---------------------------------------------------------------------------
// Layer descriptions
// ---------------------------------------------------------------------------

enum class LayerKind : uint32_t {
    conv2d = 1,
    tconv2d = 2,
    maxpool2d = 3,
    linear = 4,
    relu = 5,
    sigmoid = 6,
    flatten = 7,
    reshape = 8,
};

struct LayerSpec {
    LayerKind kind{};
    int kh = 0, kw = 0;  // kernel / pool window; reshape target (h, w)
    int sh = 1, sw = 1;  // strides
    int in_ch = 0, out_ch = 0;  // linear: in/out features; reshape: out_ch = channels

    static LayerSpec conv(int in_c, int out_c, int k, int s) {
        return {LayerKind::conv2d, k, k, s, s, in_c, out_c};
    }
    static LayerSpec tconv(int in_c, int out_c, int k, int s) {
        return {LayerKind::tconv2d, k, k, s, s, in_c, out_c};
    }
    static LayerSpec maxpool(int w) { return {LayerKind::maxpool2d, w, w, w, w, 0, 0}; }
    static LayerSpec dense(int in_f, int out_f) {
        return {LayerKind::linear, 0, 0, 1, 1, in_f, out_f};
    }
    static LayerSpec act_relu() { return {LayerKind::relu, 0, 0, 1, 1, 0, 0}; }
    static LayerSpec act_sigmoid() { return {LayerKind::sigmoid, 0, 0, 1, 1, 0, 0}; }
    static LayerSpec flat() { return {LayerKind::flatten, 0, 0, 1, 1, 0, 0}; }
    static LayerSpec shape_to(int c, int h, int w) {
        return {LayerKind::reshape, h, w, 1, 1, 0, c};
    }

    bool has_params() const {
        return kind == LayerKind::conv2d || kind == LayerKind::tconv2d ||
               kind == LayerKind::linear;
    }
};

// ---------------------------------------------------------------------------
// Autograd graph
// ---------------------------------------------------------------------------

template <typename T>
struct Node;

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

// One value in the recorded computation. Forward ops allocate a fresh node;
// backward() fills grad buffers by walking the recorded graph in reverse.
template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // allocated on first accumulation
    bool needs_grad = false;
    std::vector<NodePtr<T>> parents;
    std::function<void(Node<T>&)> backprop;  // reads this->grad, adds into parents

    Tensor<T>& ensure_grad() {
        if (grad.empty()) grad = Tensor<T>(value.shape());
        return grad;
    }
};

template <typename T>
NodePtr<T> make_constant(Tensor<T> v) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(v);
    return n;
}

template <typename T>
NodePtr<T> make_leaf(Tensor<T> v) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(v);
    n->needs_grad = true;
    return n;
}

namespace detail {

template <typename T>
bool any_needs_grad(std::initializer_list<const NodePtr<T>*> nodes) {
    for (auto* n : nodes)
        if (*n && (*n)->needs_grad) return true;
    return false;
}

// ---- dense kernels ---------------------------------------------------------
// All convolution work is phrased as patch gather/scatter plus one of three
// matmul variants so the inner loops stay contiguous and vectorizable.

// C[M,N] += A[M,K] * B[K,N]
template <typename T>
void matmul_acc(const T* a, const T* b, T* c, int M, int K, int N) {
    for (int m = 0; m < M; ++m) {
        const T* arow = a + static_cast<size_t>(m) * K;
        T* crow = c + static_cast<size_t>(m) * N;
        for (int k = 0; k < K; ++k) {
            const T av = arow[k];
            const T* brow = b + static_cast<size_t>(k) * N;
            for (int n = 0; n < N; ++n) crow[n] += av * brow[n];
        }
    }
}

// C[M,N] += A[M,K] * B[N,K]^T
// The dot product runs over a bank of independent accumulators; a single
// accumulator would serialize on the FMA latency and block vectorization.
// Summation order is fixed, so results stay deterministic.
template <typename T>
void matmul_bt(const T* a, const T* b, T* c, int M, int K, int N) {
    constexpr int kLanes = 16;
    T acc[kLanes];
    for (int m = 0; m < M; ++m) {
        const T* arow = a + static_cast<size_t>(m) * K;
        T* crow = c + static_cast<size_t>(m) * N;
        for (int n = 0; n < N; ++n) {
            const T* brow = b + static_cast<size_t>(n) * K;
            for (int u = 0; u < kLanes; ++u) acc[u] = 0;
            int k = 0;
            for (; k + kLanes <= K; k += kLanes)
                for (int u = 0; u < kLanes; ++u) acc[u] += arow[k + u] * brow[k + u];
            T tail = 0;
            for (; k < K; ++k) tail += arow[k] * brow[k];
            for (int u = 1; u < kLanes; ++u) acc[0] += acc[u];
            crow[n] += acc[0] + tail;
        }
    }
}

// C[M,N] += A[K,M]^T * B[K,N]
template <typename T>
void matmul_at(const T* a, const T* b, T* c, int M, int K, int N) {
    for (int k = 0; k < K; ++k) {
        const T* arow = a + static_cast<size_t>(k) * M;
        const T* brow = b + static_cast<size_t>(k) * N;
        for (int m = 0; m < M; ++m) {
            const T av = arow[m];
            T* crow = c + static_cast<size_t>(m) * N;
            for (int n = 0; n < N; ++n) crow[n] += av * brow[n];
        }
    }
}

// patches[(c*kh+ki)*kw+kj][gy*GW+gx] = img[c][gy*sh+ki][gx*sw+kj]
// where (GH, GW) is the patch grid.
template <typename T>
void gather_patches(const T* img, int C, int H, int W, int kh, int kw, int sh, int sw,
                    int GH, int GW, T* patches) {
    (void)H;
    size_t row = 0;
    for (int c = 0; c < C; ++c)
        for (int ki = 0; ki < kh; ++ki)
            for (int kj = 0; kj < kw; ++kj, ++row) {
                T* prow = patches + row * static_cast<size_t>(GH) * GW;
                for (int gy = 0; gy < GH; ++gy) {
                    const T* src = img + (static_cast<size_t>(c) * H + gy * sh + ki) * W + kj;
                    T* dst = prow + static_cast<size_t>(gy) * GW;
                    if (sw == 1) {
                        std::copy(src, src + GW, dst);
                    } else {
                        for (int gx = 0; gx < GW; ++gx) dst[gx] = src[gx * sw];
                    }
                }
            }
}

// Adjoint of gather_patches: img[c][gy*sh+ki][gx*sw+kj] += patches[...][...]
template <typename T>
void scatter_patches(const T* patches, int C, int H, int W, int kh, int kw, int sh, int sw,
                     int GH, int GW, T* img) {
    size_t row = 0;
    for (int c = 0; c < C; ++c)
        for (int ki = 0; ki < kh; ++ki)
            for (int kj = 0; kj < kw; ++kj, ++row) {
                const T* prow = patches + row * static_cast<size_t>(GH) * GW;
                for (int gy = 0; gy < GH; ++gy) {
                    T* dst = img + (static_cast<size_t>(c) * H + gy * sh + ki) * W + kj;
                    const T* src = prow + static_cast<size_t>(gy) * GW;
                    for (int gx = 0; gx < GW; ++gx) dst[gx * sw] += src[gx];
                }
            }
}

inline void check_4d(const std::vector<int>& s, const char* what) {
    if (s.size() != 4)
        throw DimensionError(std::string(what) + " expects a [N,C,H,W] tensor, got " +
                             shape_str(s));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Layer forward ops
// ---------------------------------------------------------------------------

/// Valid (unpadded) 2-d convolution. input [N,C,H,W], weight [O,C,kh,kw],
/// bias [O]; output spatial dims are floor((H-kh)/sh)+1 by floor((W-kw)/sw)+1.
template <typename T>
NodePtr<T> conv2d(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& b,
                  int sh, int sw) {
    detail::check_4d(x->value.shape(), "conv2d input");
    detail::check_4d(w->value.shape(), "conv2d weight");
    const int N = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2), W = x->value.dim(3);
    const int O = w->value.dim(0), kh = w->value.dim(2), kw = w->value.dim(3);
    if (w->value.dim(1) != C)
        throw DimensionError("conv2d: input has " + std::to_string(C) + " channels, weight expects " +
                             std::to_string(w->value.dim(1)));
    if (b->value.size() != O)
        throw DimensionError("conv2d: bias size mismatch");
    if (H < kh || W < kw)
        throw DimensionError("conv2d: kernel larger than input");
    if (sh < 1 || sw < 1) throw DimensionError("conv2d: stride must be >= 1");
    const int OH = (H - kh) / sh + 1, OW = (W - kw) / sw + 1;
    const int CKK = C * kh * kw, OHW = OH * OW;

    auto out = std::make_shared<Node<T>>();
    out->value = Tensor<T>({N, O, OH, OW});
    std::vector<T> patches(static_cast<size_t>(CKK) * OHW);
    for (int n = 0; n < N; ++n) {
        detail::gather_patches(x->value.data() + static_cast<size_t>(n) * C * H * W,
                               C, H, W, kh, kw, sh, sw, OH, OW, patches.data());
        T* o = out->value.data() + static_cast<size_t>(n) * O * OHW;
        for (int oc = 0; oc < O; ++oc)
            std::fill(o + static_cast<size_t>(oc) * OHW, o + static_cast<size_t>(oc + 1) * OHW,
                      b->value[oc]);
        detail::matmul_acc(w->value.data(), patches.data(), o, O, CKK, OHW);
    }

    if (detail::any_needs_grad<T>({&x, &w, &b})) {
        out->needs_grad = true;
        out->parents = {x, w, b};
        out->backprop = [N, C, H, W, O, kh, kw, sh, sw, OH, OW, CKK, OHW](Node<T>& nd) {
            auto& xn = *nd.parents[0];
            auto& wn = *nd.parents[1];
            auto& bn = *nd.parents[2];
            std::vector<T> patches(static_cast<size_t>(CKK) * OHW);
            for (int n = 0; n < N; ++n) {
                const T* g = nd.grad.data() + static_cast<size_t>(n) * O * OHW;
                if (wn.needs_grad || bn.needs_grad) {
                    detail::gather_patches(xn.value.data() + static_cast<size_t>(n) * C * H * W,
                                           C, H, W, kh, kw, sh, sw, OH, OW, patches.data());
                    if (wn.needs_grad)
                        detail::matmul_bt(g, patches.data(), wn.ensure_grad().data(), O, OHW, CKK);
                    if (bn.needs_grad) {
                        T* bg = bn.ensure_grad().data();
                        for (int oc = 0; oc < O; ++oc) {
                            T acc = 0;
                            const T* row = g + static_cast<size_t>(oc) * OHW;
                            for (int i = 0; i < OHW; ++i) acc += row[i];
                            bg[oc] += acc;
                        }
                    }
                }
                if (xn.needs_grad) {
                    std::fill(patches.begin(), patches.end(), T(0));
                    detail::matmul_at(wn.value.data(), g, patches.data(), CKK, O, OHW);
                    detail::scatter_patches(patches.data(), C, H, W, kh, kw, sh, sw, OH, OW,
                                            xn.ensure_grad().data() +
                                                static_cast<size_t>(n) * C * H * W);
                }
            }
        };
    }
    return out;
}

/// Transposed convolution. input [N,C,H,W], weight [C,O,kh,kw], bias [O];
/// output spatial dims are (H-1)*sh+kh by (W-1)*sw+kw. For fixed weights this
/// is the adjoint of conv2d with the same kernel/stride.
template <typename T>
NodePtr<T> tconv2d(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& b,
                   int sh, int sw) {
    detail::check_4d(x->value.shape(), "tconv2d input");
    detail::check_4d(w->value.shape(), "tconv2d weight");
    const int N = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2), W = x->value.dim(3);
    const int O = w->value.dim(1), kh = w->value.dim(2), kw = w->value.dim(3);
    if (w->value.dim(0) != C)
        throw DimensionError("tconv2d: input has " + std::to_string(C) + " channels, weight expects " +
                             std::to_string(w->value.dim(0)));
    if (b->value.size() != O)
        throw DimensionError("tconv2d: bias size mismatch");
    if (sh < 1 || sw < 1 || kh < 1 || kw < 1)
        throw DimensionError("tconv2d: kernel and stride must be >= 1");
    const int OH = (H - 1) * sh + kh, OW = (W - 1) * sw + kw;
    const int OKK = O * kh * kw, IHW = H * W;

    auto out = std::make_shared<Node<T>>();
    out->value = Tensor<T>({N, O, OH, OW});
    std::vector<T> cols(static_cast<size_t>(OKK) * IHW);
    for (int n = 0; n < N; ++n) {
        std::fill(cols.begin(), cols.end(), T(0));
        detail::matmul_at(w->value.data(), x->value.data() + static_cast<size_t>(n) * C * IHW,
                          cols.data(), OKK, C, IHW);
        T* o = out->value.data() + static_cast<size_t>(n) * O * OH * OW;
        for (int oc = 0; oc < O; ++oc)
            std::fill(o + static_cast<size_t>(oc) * OH * OW,
                      o + static_cast<size_t>(oc + 1) * OH * OW, b->value[oc]);
        detail::scatter_patches(cols.data(), O, OH, OW, kh, kw, sh, sw, H, W, o);
    }

    if (detail::any_needs_grad<T>({&x, &w, &b})) {
        out->needs_grad = true;
        out->parents = {x, w, b};
        out->backprop = [N, C, H, W, O, kh, kw, sh, sw, OH, OW, OKK, IHW](Node<T>& nd) {
            auto& xn = *nd.parents[0];
            auto& wn = *nd.parents[1];
            auto& bn = *nd.parents[2];
            std::vector<T> cols(static_cast<size_t>(OKK) * IHW);
            for (int n = 0; n < N; ++n) {
                const T* g = nd.grad.data() + static_cast<size_t>(n) * O * OH * OW;
                detail::gather_patches(g, O, OH, OW, kh, kw, sh, sw, H, W, cols.data());
                if (xn.needs_grad)
                    detail::matmul_acc(wn.value.data(), cols.data(),
                                       xn.ensure_grad().data() + static_cast<size_t>(n) * C * IHW,
                                       C, OKK, IHW);
                if (wn.needs_grad)
                    detail::matmul_bt(xn.value.data() + static_cast<size_t>(n) * C * IHW,
                                      cols.data(), wn.ensure_grad().data(), C, IHW, OKK);
                if (bn.needs_grad) {
                    T* bg = bn.ensure_grad().data();
                    for (int oc = 0; oc < O; ++oc) {
                        T acc = 0;
                        const T* row = g + static_cast<size_t>(oc) * OH * OW;
                        for (int i = 0; i < OH * OW; ++i) acc += row[i];
                        bg[oc] += acc;
                    }
                }
            }
        };
    }
    return out;
}

/// Non-overlapping max pooling; output dims are floor(H/wh) by floor(W/ww).
/// Trailing rows/columns that do not fill a window are dropped.
template <typename T>
NodePtr<T> maxpool2d(const NodePtr<T>& x, int wh, int ww) {
    detail::check_4d(x->value.shape(), "maxpool2d input");
    const int N = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2), W = x->value.dim(3);
    if (wh < 1 || ww < 1 || wh > H || ww > W)
        throw DimensionError("maxpool2d: window must fit the input");
    const int OH = H / wh, OW = W / ww;

    auto out = std::make_shared<Node<T>>();
    out->value = Tensor<T>({N, C, OH, OW});
    auto argmax = std::make_shared<std::vector<int>>(static_cast<size_t>(N) * C * OH * OW);
    size_t oidx = 0;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const T* plane = x->value.data() + (static_cast<size_t>(n) * C + c) * H * W;
            for (int oy = 0; oy < OH; ++oy)
                for (int ox = 0; ox < OW; ++ox, ++oidx) {
                    int best = (oy * wh) * W + ox * ww;
                    T bv = plane[best];
                    for (int i = 0; i < wh; ++i)
                        for (int j = 0; j < ww; ++j) {
                            const int idx = (oy * wh + i) * W + ox * ww + j;
                            if (plane[idx] > bv) {
                                bv = plane[idx];
                                best = idx;
                            }
                        }
                    out->value[static_cast<int>(oidx)] = bv;
                    (*argmax)[oidx] = best;
                }
        }

    if (x->needs_grad) {
        out->needs_grad = true;
        out->parents = {x};
        out->backprop = [N, C, H, W, OH, OW, argmax](Node<T>& nd) {
            auto& xn = *nd.parents[0];
            T* xg = xn.ensure_grad().data();
            size_t oidx = 0;
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    T* plane = xg + (static_cast<size_t>(n) * C + c) * H * W;
                    const size_t base = oidx;
                    for (int i = 0; i < OH * OW; ++i)
                        plane[(*argmax)[base + i]] += nd.grad[static_cast<int>(base + i)];
                    oidx += static_cast<size_t>(OH) * OW;
                }
        };
    }
    return out;
}

/// Affine map: input [N,D], weight [D,K], bias [K] -> [N,K].
template <typename T>
NodePtr<T> linear(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& b) {
    if (x->value.rank() != 2 || w->value.rank() != 2)
        throw DimensionError("linear expects 2-d input and weight");
    const int N = x->value.dim(0), D = x->value.dim(1), K = w->value.dim(1);
    if (w->value.dim(0) != D)
        throw DimensionError("linear: inner dimensions differ, input " + shape_str(x->value.shape()) +
                             " weight " + shape_str(w->value.shape()));
    if (b->value.size() != K)
        throw DimensionError("linear: bias size mismatch");

    auto out = std::make_shared<Node<T>>();
    out->value = Tensor<T>({N, K});
    for (int n = 0; n < N; ++n)
        std::copy(b->value.data(), b->value.data() + K, out->value.data() + static_cast<size_t>(n) * K);
    detail::matmul_acc(x->value.data(), w->value.data(), out->value.data(), N, D, K);

    if (detail::any_needs_grad<T>({&x, &w, &b})) {
        out->needs_grad = true;
        out->parents = {x, w, b};
        out->backprop = [N, D, K](Node<T>& nd) {
            auto& xn = *nd.parents[0];
            auto& wn = *nd.parents[1];
            auto& bn = *nd.parents[2];
            if (xn.needs_grad)
                detail::matmul_bt(nd.grad.data(), wn.value.data(), xn.ensure_grad().data(), N, K, D);
            if (wn.needs_grad)
                detail::matmul_at(xn.value.data(), nd.grad.data(), wn.ensure_grad().data(), D, N, K);
            if (bn.needs_grad) {
                T* bg = bn.ensure_grad().data();
                for (int n = 0; n < N; ++n)
                    for (int k = 0; k < K; ++k) bg[k] += nd.grad[n * K + k];
            }
        };
    }
    return out;
}

template <typename T>
NodePtr<T> relu(const NodePtr<T>& x) {
    auto out = std::make_shared<Node<T>>();
    out->value = Tensor<T>(x->value.shape());
    for (int i = 0; i < x->value.size(); ++i)
        out->value[i] = x->value[i] > T(0) ? x->value[i] : T(0);
    if (x->needs_grad) {
        out->needs_grad = true;
        out->parents = {x};
        out->backprop = [](Node<T>& nd) {
            auto& xn = *nd.parents[0];
            T* xg = xn.ensure_grad().data();
            for (int i = 0; i < nd.grad.size(); ++i)
                if (xn.value[i] > T(0)) xg[i] += nd.grad[i];
        };
    }
    return out;
}

template <typename T>
NodePtr<T> sigmoid(const NodePtr<T>& x) {
    auto out = std::make_shared<Node<T>>();
    out->value = Tensor<T>(x->value.shape());
    for (int i = 0; i < x->value.size(); ++i)
        out->value[i] = T(1) / (T(1) + std::exp(-x->value[i]));
    if (x->needs_grad) {
        out->needs_grad = true;
        out->parents = {x};
        out->backprop = [](Node<T>& nd) {
            auto& xn = *nd.parents[0];
            T* xg = xn.ensure_grad().data();
            for (int i = 0; i < nd.grad.size(); ++i) {
                const T y = nd.value[i];
                xg[i] += nd.grad[i] * y * (T(1) - y);
            }
        };
    }
    return out;
}

namespace detail {

template <typename T>
NodePtr<T> view_as(const NodePtr<T>& x, std::vector<int> shape) {
    auto out = std::make_shared<Node<T>>();
    out->value = x->value.reshaped(std::move(shape));
    if (x->needs_grad) {
        out->needs_grad = true;
        out->parents = {x};
        out->backprop = [](Node<T>& nd) {
            auto& xn = *nd.parents[0];
            T* xg = xn.ensure_grad().data();
            for (int i = 0; i < nd.grad.size(); ++i) xg[i] += nd.grad[i];
        };
    }
    return out;
}

} // namespace detail

/// [N,C,H,W] -> [N, C*H*W]
template <typename T>
NodePtr<T> flatten(const NodePtr<T>& x) {
    detail::check_4d(x->value.shape(), "flatten input");
    const auto& s = x->value.shape();
    return detail::view_as(x, {s[0], s[1] * s[2] * s[3]});
}

/// [N,D] -> [N,c,h,w] with c*h*w == D
template <typename T>
NodePtr<T> reshape(const NodePtr<T>& x, int c, int h, int w) {
    if (x->value.rank() != 2)
        throw DimensionError("reshape expects a 2-d input");
    return detail::view_as(x, {x->value.dim(0), c, h, w});
}

template <typename T>
NodePtr<T> add(const NodePtr<T>& a, const NodePtr<T>& b) {
    if (!a->value.same_shape(b->value))
        throw DimensionError("add: shape mismatch");
    auto out = std::make_shared<Node<T>>();
    out->value = Tensor<T>(a->value.shape());
    for (int i = 0; i < out->value.size(); ++i) out->value[i] = a->value[i] + b->value[i];
    if (detail::any_needs_grad<T>({&a, &b})) {
        out->needs_grad = true;
        out->parents = {a, b};
        out->backprop = [](Node<T>& nd) {
            for (auto& p : nd.parents)
                if (p->needs_grad) {
                    T* pg = p->ensure_grad().data();
                    for (int i = 0; i < nd.grad.size(); ++i) pg[i] += nd.grad[i];
                }
        };
    }
    return out;
}

template <typename T>
NodePtr<T> mul(const NodePtr<T>& a, const NodePtr<T>& b) {
    if (!a->value.same_shape(b->value))
        throw DimensionError("mul: shape mismatch");
    auto out = std::make_shared<Node<T>>();
    out->value = Tensor<T>(a->value.shape());
    for (int i = 0; i < out->value.size(); ++i) out->value[i] = a->value[i] * b->value[i];
    if (detail::any_needs_grad<T>({&a, &b})) {
        out->needs_grad = true;
        out->parents = {a, b};
        out->backprop = [](Node<T>& nd) {
            auto& an = *nd.parents[0];
            auto& bn = *nd.parents[1];
            if (an.needs_grad) {
                T* g = an.ensure_grad().data();
                for (int i = 0; i < nd.grad.size(); ++i) g[i] += nd.grad[i] * bn.value[i];
            }
            if (bn.needs_grad) {
                T* g = bn.ensure_grad().data();
                for (int i = 0; i < nd.grad.size(); ++i) g[i] += nd.grad[i] * an.value[i];
            }
        };
    }
    return out;
}

template <typename T>
NodePtr<T> scale(const NodePtr<T>& a, T c) {
    auto out = std::make_shared<Node<T>>();
    out->value = Tensor<T>(a->value.shape());
    for (int i = 0; i < out->value.size(); ++i) out->value[i] = a->value[i] * c;
    if (a->needs_grad) {
        out->needs_grad = true;
        out->parents = {a};
        out->backprop = [c](Node<T>& nd) {
            T* g = nd.parents[0]->ensure_grad().data();
            for (int i = 0; i < nd.grad.size(); ++i) g[i] += nd.grad[i] * c;
        };
    }
    return out;
}

template <typename T>
NodePtr<T> sum(const NodePtr<T>& a) {
    auto out = std::make_shared<Node<T>>();
    T acc = 0;
    for (int i = 0; i < a->value.size(); ++i) acc += a->value[i];
    out->value = Tensor<T>::scalar(acc);
    if (a->needs_grad) {
        out->needs_grad = true;
        out->parents = {a};
        out->backprop = [](Node<T>& nd) {
            T* g = nd.parents[0]->ensure_grad().data();
            const T gv = nd.grad[0];
            for (int i = 0; i < nd.parents[0]->value.size(); ++i) g[i] += gv;
        };
    }
    return out;
}

/// Summed binary cross-entropy against a constant target in [0,1].
/// Predictions are clamped to [1e-7, 1-1e-7] before the logs.
template <typename T>
NodePtr<T> bce_sum(const NodePtr<T>& pred, const Tensor<T>& target) {
    if (!pred->value.same_shape(target))
        throw DimensionError("bce_sum: prediction and target shapes differ");
    constexpr T kEps = T(1e-7);
    auto out = std::make_shared<Node<T>>();
    T acc = 0;
    for (int i = 0; i < pred->value.size(); ++i) {
        T p = std::min(std::max(pred->value[i], kEps), T(1) - kEps);
        acc += -(target[i] * std::log(p) + (T(1) - target[i]) * std::log(T(1) - p));
    }
    out->value = Tensor<T>::scalar(acc);
    if (pred->needs_grad) {
        out->needs_grad = true;
        out->parents = {pred};
        auto tgt = std::make_shared<Tensor<T>>(target);
        out->backprop = [tgt](Node<T>& nd) {
            constexpr T eps = T(1e-7);
            auto& pn = *nd.parents[0];
            T* g = pn.ensure_grad().data();
            const T gv = nd.grad[0];
            for (int i = 0; i < pn.value.size(); ++i) {
                T p = std::min(std::max(pn.value[i], eps), T(1) - eps);
                g[i] += gv * (p - (*tgt)[i]) / (p * (T(1) - p));
            }
        };
    }
    return out;
}

/// KL divergence of N(mean, exp(logvar)) from N(0, I), summed over all
/// entries: -0.5 * sum(1 + logvar - mean^2 - exp(logvar)).
template <typename T>
NodePtr<T> kl_gauss_sum(const NodePtr<T>& mean, const NodePtr<T>& logvar) {
    if (!mean->value.same_shape(logvar->value))
        throw DimensionError("kl_gauss_sum: mean and logvar shapes differ");
    auto out = std::make_shared<Node<T>>();
    T acc = 0;
    for (int i = 0; i < mean->value.size(); ++i)
        acc += T(-0.5) * (T(1) + logvar->value[i] - mean->value[i] * mean->value[i] -
                          std::exp(logvar->value[i]));
    out->value = Tensor<T>::scalar(acc);
    if (detail::any_needs_grad<T>({&mean, &logvar})) {
        out->needs_grad = true;
        out->parents = {mean, logvar};
        out->backprop = [](Node<T>& nd) {
            auto& mn = *nd.parents[0];
            auto& lv = *nd.parents[1];
            const T gv = nd.grad[0];
            if (mn.needs_grad) {
                T* g = mn.ensure_grad().data();
                for (int i = 0; i < mn.value.size(); ++i) g[i] += gv * mn.value[i];
            }
            if (lv.needs_grad) {
                T* g = lv.ensure_grad().data();
                for (int i = 0; i < lv.value.size(); ++i)
                    g[i] += gv * T(0.5) * (std::exp(lv.value[i]) - T(1));
            }
        };
    }
    return out;
}

/// z = mean + exp(0.5 * logvar) * eps, with eps a constant noise tensor.
template <typename T>
NodePtr<T> gauss_sample(const NodePtr<T>& mean, const NodePtr<T>& logvar, const Tensor<T>& eps) {
    if (!mean->value.same_shape(logvar->value) || !mean->value.same_shape(eps))
        throw DimensionError("gauss_sample: shape mismatch");
    auto out = std::make_shared<Node<T>>();
    out->value = Tensor<T>(mean->value.shape());
    for (int i = 0; i < out->value.size(); ++i)
        out->value[i] = mean->value[i] + std::exp(T(0.5) * logvar->value[i]) * eps[i];
    if (detail::any_needs_grad<T>({&mean, &logvar})) {
        out->needs_grad = true;
        out->parents = {mean, logvar};
        auto e = std::make_shared<Tensor<T>>(eps);
        out->backprop = [e](Node<T>& nd) {
            auto& mn = *nd.parents[0];
            auto& lv = *nd.parents[1];
            if (mn.needs_grad) {
                T* g = mn.ensure_grad().data();
                for (int i = 0; i < nd.grad.size(); ++i) g[i] += nd.grad[i];
            }
            if (lv.needs_grad) {
                T* g = lv.ensure_grad().data();
                for (int i = 0; i < nd.grad.size(); ++i)
                    g[i] += nd.grad[i] * T(0.5) * std::exp(T(0.5) * lv.value[i]) * (*e)[i];
            }
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reverse pass
// ---------------------------------------------------------------------------

/// Populate gradients of every reachable node that needs them.
/// The root must be a scalar produced by recorded ops.
template <typename T>
void backward(const NodePtr<T>& loss) {
    if (!loss || loss->value.size() != 1)
        throw ContractError("backward requires a scalar loss");

    // iterative post-order DFS
    std::vector<Node<T>*> topo;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, size_t>> stack;
    stack.emplace_back(loss.get(), 0);
    seen.insert(loss.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<T>* p = node->parents[next++].get();
            if (p->needs_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            topo.push_back(node);
            stack.pop_back();
        }
    }

    loss->ensure_grad()[0] = T(1);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        Node<T>* n = *it;
        if (n->backprop && n->needs_grad && !n->grad.empty()) n->backprop(*n);
    }
}

/// Uniform init in +-1/sqrt(fan_in); the layer-default weight scheme.
template <typename T>
void init_uniform_fan_in(Tensor<T>& t, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(-bound, bound));
}

} // namespace shapecx
