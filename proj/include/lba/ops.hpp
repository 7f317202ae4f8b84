#ifndef LBA_OPS_HPP_
#define LBA_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lba/rng.hpp"
#include "lba/tensor.hpp"

// Tensor operations used by the embedding model and loss, each paired with
// an analytic backward pass. All functions are pure; callers own all state.

namespace lba {

struct Conv3dSpec {
  int st = 1, sh = 1, sw = 1;  // stride
  int pt = 0, ph = 0, pw = 0;  // zero padding
};

struct Pool3dSpec {
  int wt = 1, wh = 1, ww = 1;  // window
  int st = 1, sh = 1, sw = 1;  // stride
};

inline int conv_out_extent(int in, int k, int stride, int pad, const char* axis) {
  int span = in + 2 * pad - k;
  if (span < 0)
    fail(Error::Kind::Shape, std::string("conv3d: kernel exceeds padded input on axis ") + axis);
  return span / stride + 1;
}

inline int pool_out_extent(int in, int w, int stride, const char* axis) {
  if (w > in)
    fail(Error::Kind::Shape, std::string("maxpool3d: window exceeds input on axis ") + axis);
  return (in - w) / stride + 1;  // trailing remainder dropped
}

// Output index range [lo, hi] for which in-index = out*stride - pad + k stays
// inside [0, in).
inline void valid_out_range(int in, int out, int stride, int pad, int k, int& lo, int& hi) {
  int lo_num = pad - k;
  lo = lo_num <= 0 ? 0 : (lo_num + stride - 1) / stride;
  int hi_num = in - 1 + pad - k;
  hi = hi_num < 0 ? -1 : hi_num / stride;
  if (hi > out - 1) hi = out - 1;
}

// ---------------------------------------------------------------------------
// conv3d: input B x Cin x T x H x W, kernel Cout x Cin x kT x kH x kW.

template <class T>
Tensor<T> conv3d_forward(const Tensor<T>& x, const Tensor<T>& k, const Tensor<T>& bias,
                         const Conv3dSpec& sp) {
  if (x.ndim() != 5 || k.ndim() != 5 || bias.ndim() != 1)
    fail(Error::Kind::Shape, "conv3d: expected 5-d input, 5-d kernel, 1-d bias");
  if (x.dim(1) != k.dim(1))
    fail(Error::Kind::Shape, "conv3d: input channels " + std::to_string(x.dim(1)) +
                                 " != kernel channels " + std::to_string(k.dim(1)));
  if (bias.dim(0) != k.dim(0))
    fail(Error::Kind::Shape, "conv3d: bias length != output channels");

  const int B = x.dim(0), Ci = x.dim(1), Ti = x.dim(2), Hi = x.dim(3), Wi = x.dim(4);
  const int Co = k.dim(0), kT = k.dim(2), kH = k.dim(3), kW = k.dim(4);
  const int To = conv_out_extent(Ti, kT, sp.st, sp.pt, "T");
  const int Ho = conv_out_extent(Hi, kH, sp.sh, sp.ph, "H");
  const int Wo = conv_out_extent(Wi, kW, sp.sw, sp.pw, "W");

  Tensor<T> y({B, Co, To, Ho, Wo});
  const int64_t x_c = static_cast<int64_t>(Ti) * Hi * Wi;
  const int64_t y_c = static_cast<int64_t>(To) * Ho * Wo;

  for (int b = 0; b < B; ++b) {
    for (int co = 0; co < Co; ++co) {
      T* yb = y.ptr() + (static_cast<int64_t>(b) * Co + co) * y_c;
      const T bv = bias[co];
      for (int64_t i = 0; i < y_c; ++i) yb[i] = bv;
      for (int ci = 0; ci < Ci; ++ci) {
        const T* xb = x.ptr() + (static_cast<int64_t>(b) * Ci + ci) * x_c;
        const T* kb = k.ptr() + ((static_cast<int64_t>(co) * Ci + ci) * kT) * kH * kW;
        for (int kt = 0; kt < kT; ++kt) {
          int t0, t1;
          valid_out_range(Ti, To, sp.st, sp.pt, kt, t0, t1);
          for (int kh = 0; kh < kH; ++kh) {
            int h0, h1;
            valid_out_range(Hi, Ho, sp.sh, sp.ph, kh, h0, h1);
            for (int kw = 0; kw < kW; ++kw) {
              int w0, w1;
              valid_out_range(Wi, Wo, sp.sw, sp.pw, kw, w0, w1);
              const T wv = kb[(kt * kH + kh) * kW + kw];
              if (wv == T(0)) continue;
              for (int t = t0; t <= t1; ++t) {
                const int it = t * sp.st - sp.pt + kt;
                for (int h = h0; h <= h1; ++h) {
                  const int ih = h * sp.sh - sp.ph + kh;
                  const T* xr = xb + (static_cast<int64_t>(it) * Hi + ih) * Wi - sp.pw + kw;
                  T* yr = yb + (static_cast<int64_t>(t) * Ho + h) * Wo;
                  for (int w = w0; w <= w1; ++w) yr[w] += wv * xr[w * sp.sw];
                }
              }
            }
          }
        }
      }
    }
  }
  return y;
}

template <class T>
struct Conv3dGrads {
  Tensor<T> gx, gk, gb;
};

template <class T>
Conv3dGrads<T> conv3d_backward(const Tensor<T>& x, const Tensor<T>& k, const Conv3dSpec& sp,
                               const Tensor<T>& gy, bool need_gx = true) {
  const int B = x.dim(0), Ci = x.dim(1), Ti = x.dim(2), Hi = x.dim(3), Wi = x.dim(4);
  const int Co = k.dim(0), kT = k.dim(2), kH = k.dim(3), kW = k.dim(4);
  const int To = gy.dim(2), Ho = gy.dim(3), Wo = gy.dim(4);

  Conv3dGrads<T> g;
  if (need_gx) g.gx = Tensor<T>(x.shape);
  g.gk = Tensor<T>(k.shape);
  g.gb = Tensor<T>(std::vector<int>{Co});

  const int64_t x_c = static_cast<int64_t>(Ti) * Hi * Wi;
  const int64_t y_c = static_cast<int64_t>(To) * Ho * Wo;

  for (int b = 0; b < B; ++b) {
    for (int co = 0; co < Co; ++co) {
      const T* gyb = gy.ptr() + (static_cast<int64_t>(b) * Co + co) * y_c;
      T acc = 0;
      for (int64_t i = 0; i < y_c; ++i) acc += gyb[i];
      g.gb[co] += acc;
      for (int ci = 0; ci < Ci; ++ci) {
        const T* xb = x.ptr() + (static_cast<int64_t>(b) * Ci + ci) * x_c;
        T* gxb = need_gx ? g.gx.ptr() + (static_cast<int64_t>(b) * Ci + ci) * x_c : nullptr;
        const int64_t k_base = ((static_cast<int64_t>(co) * Ci + ci) * kT) * kH * kW;
        for (int kt = 0; kt < kT; ++kt) {
          int t0, t1;
          valid_out_range(Ti, To, sp.st, sp.pt, kt, t0, t1);
          for (int kh = 0; kh < kH; ++kh) {
            int h0, h1;
            valid_out_range(Hi, Ho, sp.sh, sp.ph, kh, h0, h1);
            for (int kw = 0; kw < kW; ++kw) {
              int w0, w1;
              valid_out_range(Wi, Wo, sp.sw, sp.pw, kw, w0, w1);
              const T wv = k[k_base + (kt * kH + kh) * kW + kw];
              T kacc = 0;
              for (int t = t0; t <= t1; ++t) {
                const int it = t * sp.st - sp.pt + kt;
                for (int h = h0; h <= h1; ++h) {
                  const int ih = h * sp.sh - sp.ph + kh;
                  const int64_t xoff = (static_cast<int64_t>(it) * Hi + ih) * Wi - sp.pw + kw;
                  const T* gyr = gyb + (static_cast<int64_t>(t) * Ho + h) * Wo;
                  const T* xr = xb + xoff;
                  for (int w = w0; w <= w1; ++w) kacc += xr[w * sp.sw] * gyr[w];
                  if (need_gx) {
                    T* gxr = gxb + xoff;
                    for (int w = w0; w <= w1; ++w) gxr[w * sp.sw] += wv * gyr[w];
                  }
                }
              }
              g.gk[k_base + (kt * kH + kh) * kW + kw] += kacc;
            }
          }
        }
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// relu

template <class T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.data) v = v > T(0) ? v : T(0);
  return y;
}

template <class T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& gy) {
  if (!same_shape(x, gy)) fail(Error::Kind::Shape, "relu backward: shape mismatch");
  Tensor<T> gx(x.shape);
  for (int64_t i = 0; i < x.numel(); ++i) gx[i] = x[i] > T(0) ? gy[i] : T(0);
  return gx;
}

// ---------------------------------------------------------------------------
// maxpool3d over B x C x T x H x W; argmax recorded as flat input offsets.

template <class T>
struct Pool3dResult {
  Tensor<T> y;
  std::vector<int64_t> argmax;  // one flat x-offset per output element
};

template <class T>
Pool3dResult<T> maxpool3d_forward(const Tensor<T>& x, const Pool3dSpec& sp) {
  if (x.ndim() != 5) fail(Error::Kind::Shape, "maxpool3d: expected 5-d input");
  const int B = x.dim(0), C = x.dim(1), Ti = x.dim(2), Hi = x.dim(3), Wi = x.dim(4);
  const int To = pool_out_extent(Ti, sp.wt, sp.st, "T");
  const int Ho = pool_out_extent(Hi, sp.wh, sp.sh, "H");
  const int Wo = pool_out_extent(Wi, sp.ww, sp.sw, "W");

  Pool3dResult<T> r;
  r.y = Tensor<T>({B, C, To, Ho, Wo});
  r.argmax.resize(static_cast<size_t>(r.y.numel()));

  int64_t o = 0;
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      const int64_t base = (static_cast<int64_t>(b) * C + c) * Ti * Hi * Wi;
      for (int t = 0; t < To; ++t)
        for (int h = 0; h < Ho; ++h)
          for (int w = 0; w < Wo; ++w, ++o) {
            const int it0 = t * sp.st, ih0 = h * sp.sh, iw0 = w * sp.sw;
            T best = x[base + (static_cast<int64_t>(it0) * Hi + ih0) * Wi + iw0];
            int64_t best_off = base + (static_cast<int64_t>(it0) * Hi + ih0) * Wi + iw0;
            for (int dt = 0; dt < sp.wt; ++dt)
              for (int dh = 0; dh < sp.wh; ++dh)
                for (int dw = 0; dw < sp.ww; ++dw) {
                  const int64_t off =
                      base + (static_cast<int64_t>(it0 + dt) * Hi + (ih0 + dh)) * Wi + (iw0 + dw);
                  if (x[off] > best) {  // first index wins ties
                    best = x[off];
                    best_off = off;
                  }
                }
            r.y[o] = best;
            r.argmax[static_cast<size_t>(o)] = best_off;
          }
    }
  return r;
}

template <class T>
Tensor<T> maxpool3d_backward(const std::vector<int>& x_shape, const std::vector<int64_t>& argmax,
                             const Tensor<T>& gy) {
  Tensor<T> gx(x_shape);
  for (int64_t o = 0; o < gy.numel(); ++o) gx[argmax[static_cast<size_t>(o)]] += gy[o];
  return gx;
}

// ---------------------------------------------------------------------------
// matmul family. Inner loops run over the contiguous trailing axis.

template <class T>
void gemm_acc(const T* a, const T* b, T* c, int n, int k, int m) {
  // c (n x m) += a (n x k) * b (k x m)
  for (int i = 0; i < n; ++i) {
    const T* ar = a + static_cast<int64_t>(i) * k;
    T* cr = c + static_cast<int64_t>(i) * m;
    for (int l = 0; l < k; ++l) {
      const T av = ar[l];
      if (av == T(0)) continue;
      const T* br = b + static_cast<int64_t>(l) * m;
      for (int j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0))
    fail(Error::Kind::Shape, "matmul: " + shape_str(a.shape) + " x " + shape_str(b.shape));
  Tensor<T> c({a.dim(0), b.dim(1)});
  gemm_acc(a.ptr(), b.ptr(), c.ptr(), a.dim(0), a.dim(1), b.dim(1));
  return c;
}

// a (n x k) * b^T where b is (m x k)
template <class T>
Tensor<T> matmul_abt(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(1))
    fail(Error::Kind::Shape, "matmul_abt: " + shape_str(a.shape) + " x " + shape_str(b.shape));
  const int n = a.dim(0), k = a.dim(1), m = b.dim(0);
  Tensor<T> c({n, m});
  for (int i = 0; i < n; ++i) {
    const T* ar = a.ptr() + static_cast<int64_t>(i) * k;
    T* cr = c.ptr() + static_cast<int64_t>(i) * m;
    for (int j = 0; j < m; ++j) {
      const T* br = b.ptr() + static_cast<int64_t>(j) * k;
      T s = 0;
      for (int l = 0; l < k; ++l) s += ar[l] * br[l];
      cr[j] = s;
    }
  }
  return c;
}

// a^T * b where a is (k x n), b is (k x m)
template <class T>
Tensor<T> matmul_atb(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(0) != b.dim(0))
    fail(Error::Kind::Shape, "matmul_atb: " + shape_str(a.shape) + " x " + shape_str(b.shape));
  const int k = a.dim(0), n = a.dim(1), m = b.dim(1);
  Tensor<T> c({n, m});
  for (int l = 0; l < k; ++l) {
    const T* ar = a.ptr() + static_cast<int64_t>(l) * n;
    const T* br = b.ptr() + static_cast<int64_t>(l) * m;
    for (int i = 0; i < n; ++i) {
      const T av = ar[i];
      if (av == T(0)) continue;
      T* cr = c.ptr() + static_cast<int64_t>(i) * m;
      for (int j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// affine: y = x W + b with x (B x F), W (F x O), b (O)

template <class T>
Tensor<T> affine_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  if (x.ndim() != 2 || w.ndim() != 2 || b.ndim() != 1 || x.dim(1) != w.dim(0) ||
      b.dim(0) != w.dim(1))
    fail(Error::Kind::Shape, "affine: " + shape_str(x.shape) + " x " + shape_str(w.shape));
  Tensor<T> y({x.dim(0), w.dim(1)});
  for (int i = 0; i < x.dim(0); ++i)
    std::copy(b.ptr(), b.ptr() + b.dim(0), y.ptr() + static_cast<int64_t>(i) * w.dim(1));
  gemm_acc(x.ptr(), w.ptr(), y.ptr(), x.dim(0), x.dim(1), w.dim(1));
  return y;
}

template <class T>
struct AffineGrads {
  Tensor<T> gx, gw, gb;
};

template <class T>
AffineGrads<T> affine_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& gy) {
  AffineGrads<T> g;
  g.gx = matmul_abt(gy, w);   // (B,O) * (F,O)^T
  g.gw = matmul_atb(x, gy);   // (B,F)^T * (B,O)
  g.gb = Tensor<T>(std::vector<int>{w.dim(1)});
  for (int i = 0; i < gy.dim(0); ++i)
    for (int j = 0; j < gy.dim(1); ++j) g.gb[j] += gy[static_cast<int64_t>(i) * gy.dim(1) + j];
  return g;
}

// ---------------------------------------------------------------------------
// Row-wise L2 normalization with epsilon guard; zero rows pass through.

inline constexpr double kL2NormEps = 1e-12;

template <class T>
Tensor<T> l2_normalize_forward(const Tensor<T>& x) {
  if (x.ndim() != 2) fail(Error::Kind::Shape, "l2_normalize: expected 2-d input");
  Tensor<T> y(x.shape);
  const int B = x.dim(0), E = x.dim(1);
  for (int i = 0; i < B; ++i) {
    const T* xr = x.ptr() + static_cast<int64_t>(i) * E;
    T* yr = y.ptr() + static_cast<int64_t>(i) * E;
    T nsq = 0;
    for (int j = 0; j < E; ++j) nsq += xr[j] * xr[j];
    const T d = std::max(std::sqrt(nsq), static_cast<T>(kL2NormEps));
    for (int j = 0; j < E; ++j) yr[j] = xr[j] / d;
  }
  return y;
}

template <class T>
Tensor<T> l2_normalize_backward(const Tensor<T>& x, const Tensor<T>& gy) {
  Tensor<T> gx(x.shape);
  const int B = x.dim(0), E = x.dim(1);
  for (int i = 0; i < B; ++i) {
    const T* xr = x.ptr() + static_cast<int64_t>(i) * E;
    const T* gr = gy.ptr() + static_cast<int64_t>(i) * E;
    T* or_ = gx.ptr() + static_cast<int64_t>(i) * E;
    T nsq = 0;
    for (int j = 0; j < E; ++j) nsq += xr[j] * xr[j];
    const T n = std::sqrt(nsq);
    if (n > static_cast<T>(kL2NormEps)) {
      T dot = 0;
      for (int j = 0; j < E; ++j) dot += gr[j] * xr[j];
      const T k = dot / nsq;
      for (int j = 0; j < E; ++j) or_[j] = (gr[j] - k * xr[j]) / n;
    } else {
      for (int j = 0; j < E; ++j) or_[j] = gr[j] / static_cast<T>(kL2NormEps);
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Temporal mean/max head: input T x B x G, output B x 2G (mean | max).

template <class T>
struct AvgMaxResult {
  Tensor<T> y;
  std::vector<int> argmax;  // winning timestep per (b, g); first index on ties
};

template <class T>
AvgMaxResult<T> temporal_avgmax_forward(const Tensor<T>& x) {
  if (x.ndim() != 3) fail(Error::Kind::Shape, "temporal_avgmax: expected T x B x G input");
  const int Tn = x.dim(0), B = x.dim(1), G = x.dim(2);
  if (Tn < 1) fail(Error::Kind::Shape, "temporal_avgmax: empty sequence");
  AvgMaxResult<T> r;
  r.y = Tensor<T>({B, 2 * G});
  r.argmax.assign(static_cast<size_t>(B) * G, 0);
  for (int b = 0; b < B; ++b) {
    for (int g = 0; g < G; ++g) {
      T sum = 0;
      T best = x[(static_cast<int64_t>(0) * B + b) * G + g];
      int best_t = 0;
      for (int t = 0; t < Tn; ++t) {
        const T v = x[(static_cast<int64_t>(t) * B + b) * G + g];
        sum += v;
        if (v > best) {
          best = v;
          best_t = t;
        }
      }
      r.y[static_cast<int64_t>(b) * 2 * G + g] = sum / static_cast<T>(Tn);
      r.y[static_cast<int64_t>(b) * 2 * G + G + g] = best;
      r.argmax[static_cast<size_t>(b) * G + g] = best_t;
    }
  }
  return r;
}

template <class T>
Tensor<T> temporal_avgmax_backward(const std::vector<int>& x_shape, const std::vector<int>& argmax,
                                   const Tensor<T>& gy) {
  const int Tn = x_shape[0], B = x_shape[1], G = x_shape[2];
  Tensor<T> gx(x_shape);
  for (int b = 0; b < B; ++b)
    for (int g = 0; g < G; ++g) {
      const T gmean = gy[static_cast<int64_t>(b) * 2 * G + g] / static_cast<T>(Tn);
      for (int t = 0; t < Tn; ++t) gx[(static_cast<int64_t>(t) * B + b) * G + g] += gmean;
      const int bt = argmax[static_cast<size_t>(b) * G + g];
      gx[(static_cast<int64_t>(bt) * B + b) * G + g] +=
          gy[static_cast<int64_t>(b) * 2 * G + G + g];
    }
  return gx;
}

// ---------------------------------------------------------------------------
// Inverted dropout. p = 0 is a passthrough and consumes no randomness.

template <class T>
struct DropoutResult {
  Tensor<T> y;
  std::vector<uint8_t> mask;
};

template <class T>
DropoutResult<T> dropout_forward(const Tensor<T>& x, double p, Rng& rng) {
  DropoutResult<T> r;
  if (p <= 0.0) {
    r.y = x;
    return r;
  }
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  r.y = Tensor<T>(x.shape);
  r.mask.resize(static_cast<size_t>(x.numel()));
  for (int64_t i = 0; i < x.numel(); ++i) {
    const bool keep = rng.uniform01() >= p;
    r.mask[static_cast<size_t>(i)] = keep ? 1 : 0;
    r.y[i] = keep ? x[i] * scale : T(0);
  }
  return r;
}

template <class T>
Tensor<T> dropout_backward(const DropoutResult<T>& fwd, double p, const Tensor<T>& gy) {
  if (p <= 0.0) return gy;
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  Tensor<T> gx(gy.shape);
  for (int64_t i = 0; i < gy.numel(); ++i)
    gx[i] = fwd.mask[static_cast<size_t>(i)] ? gy[i] * scale : T(0);
  return gx;
}

// ---------------------------------------------------------------------------
// Time-major sequence reversal (T x B x F).

template <class T>
Tensor<T> reverse_time(const Tensor<T>& x) {
  const int Tn = x.dim(0);
  const int64_t step = x.numel() / Tn;
  Tensor<T> y(x.shape);
  for (int t = 0; t < Tn; ++t)
    std::copy(x.ptr() + static_cast<int64_t>(t) * step, x.ptr() + (static_cast<int64_t>(t) + 1) * step,
              y.ptr() + static_cast<int64_t>(Tn - 1 - t) * step);
  return y;
}

}  // namespace lba

#endif  // LBA_OPS_HPP_
