#ifndef LBA_GRU_HPP_
#define LBA_GRU_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "lba/ops.hpp"
#include "lba/tensor.hpp"

// Gated recurrent layer, one direction at a time. Gate formulation:
//   z_t = sigmoid(x_t Wz + h_{t-1} Uz + bz)
//   r_t = sigmoid(x_t Wr + h_{t-1} Ur + br)
//   n_t = tanh(x_t Wn + r_t .* (h_{t-1} Un) + bn)
//   h_t = (1 - z_t) .* h_{t-1} + z_t .* n_t
// with h_0 = 0. The reset gate scales the recurrent candidate term.

namespace lba {

template <class T>
struct GruParams {
  Tensor<T> wz, wr, wn;  // F x H
  Tensor<T> uz, ur, un;  // H x H
  Tensor<T> bz, br, bn;  // H

  static GruParams sized(int f, int h) {
    GruParams p;
    p.wz = Tensor<T>({f, h});
    p.wr = Tensor<T>({f, h});
    p.wn = Tensor<T>({f, h});
    p.uz = Tensor<T>({h, h});
    p.ur = Tensor<T>({h, h});
    p.un = Tensor<T>({h, h});
    p.bz = Tensor<T>({h});
    p.br = Tensor<T>({h});
    p.bn = Tensor<T>({h});
    return p;
  }
  int input_size() const { return wz.dim(0); }
  int hidden_size() const { return wz.dim(1); }
};

template <class T>
struct GruCache {
  // Per-timestep gate activations and hidden states; hs holds T+1 states
  // (hs[0] = 0) laid out (T+1) x B x H.
  Tensor<T> hs, z, r, n, c;  // c = h_{t-1} Un
};

template <class T>
inline T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

template <class T>
Tensor<T> gru_forward(const Tensor<T>& x, const GruParams<T>& p, GruCache<T>* cache) {
  if (x.ndim() != 3) fail(Error::Kind::Shape, "gru: expected T x B x F input");
  const int Tn = x.dim(0), B = x.dim(1), F = x.dim(2), H = p.hidden_size();
  if (F != p.input_size())
    fail(Error::Kind::Shape, "gru: input width " + std::to_string(F) + " != parameter width " +
                                 std::to_string(p.input_size()));

  // Input projections for all timesteps at once.
  const Tensor<T> x2 = x.reshaped({Tn * B, F});
  const Tensor<T> xz = matmul(x2, p.wz), xr = matmul(x2, p.wr), xn = matmul(x2, p.wn);

  GruCache<T> local;
  GruCache<T>& cc = cache ? *cache : local;
  cc.hs = Tensor<T>({Tn + 1, B, H});
  cc.z = Tensor<T>({Tn, B, H});
  cc.r = Tensor<T>({Tn, B, H});
  cc.n = Tensor<T>({Tn, B, H});
  cc.c = Tensor<T>({Tn, B, H});

  const int64_t bh = static_cast<int64_t>(B) * H;
  std::vector<T> az(static_cast<size_t>(bh)), ar(static_cast<size_t>(bh));
  for (int t = 0; t < Tn; ++t) {
    const T* hprev = cc.hs.ptr() + static_cast<int64_t>(t) * bh;
    T* hnext = cc.hs.ptr() + static_cast<int64_t>(t + 1) * bh;
    T* zt = cc.z.ptr() + static_cast<int64_t>(t) * bh;
    T* rt = cc.r.ptr() + static_cast<int64_t>(t) * bh;
    T* nt = cc.n.ptr() + static_cast<int64_t>(t) * bh;
    T* ct = cc.c.ptr() + static_cast<int64_t>(t) * bh;

    // az = xz_t + h Uz + bz ; ar likewise ; ct = h Un
    for (int b = 0; b < B; ++b)
      for (int j = 0; j < H; ++j) {
        az[static_cast<size_t>(b) * H + j] = xz[(static_cast<int64_t>(t) * B + b) * H + j] + p.bz[j];
        ar[static_cast<size_t>(b) * H + j] = xr[(static_cast<int64_t>(t) * B + b) * H + j] + p.br[j];
      }
    std::fill(ct, ct + bh, T(0));
    gemm_acc(hprev, p.uz.ptr(), az.data(), B, H, H);
    gemm_acc(hprev, p.ur.ptr(), ar.data(), B, H, H);
    gemm_acc(hprev, p.un.ptr(), ct, B, H, H);

    for (int64_t i = 0; i < bh; ++i) {
      const T zv = sigmoid(az[static_cast<size_t>(i)]);
      const T rv = sigmoid(ar[static_cast<size_t>(i)]);
      const int j = static_cast<int>(i % H);
      const T nv = std::tanh(xn[static_cast<int64_t>(t) * bh + i] + rv * ct[i] + p.bn[j]);
      zt[i] = zv;
      rt[i] = rv;
      nt[i] = nv;
      hnext[i] = (T(1) - zv) * hprev[i] + zv * nv;
    }
  }

  // Stack h_1..h_T as the output sequence.
  Tensor<T> y({Tn, B, H});
  std::copy(cc.hs.ptr() + bh, cc.hs.ptr() + static_cast<int64_t>(Tn + 1) * bh, y.ptr());
  return y;
}

template <class T>
struct GruGrads {
  Tensor<T> gx;
  GruParams<T> gp;
};

template <class T>
GruGrads<T> gru_backward(const Tensor<T>& x, const GruParams<T>& p, const GruCache<T>& cc,
                         const Tensor<T>& gy) {
  const int Tn = x.dim(0), B = x.dim(1), F = x.dim(2), H = p.hidden_size();
  const int64_t bh = static_cast<int64_t>(B) * H;

  GruGrads<T> g;
  g.gx = Tensor<T>(x.shape);
  g.gp = GruParams<T>::sized(F, H);

  Tensor<T> gaz_all({Tn, B, H}), gar_all({Tn, B, H}), gan_all({Tn, B, H}), gc_all({Tn, B, H});
  std::vector<T> dh(static_cast<size_t>(bh), T(0));

  for (int t = Tn - 1; t >= 0; --t) {
    const T* hprev = cc.hs.ptr() + static_cast<int64_t>(t) * bh;
    const T* zt = cc.z.ptr() + static_cast<int64_t>(t) * bh;
    const T* rt = cc.r.ptr() + static_cast<int64_t>(t) * bh;
    const T* nt = cc.n.ptr() + static_cast<int64_t>(t) * bh;
    const T* ct = cc.c.ptr() + static_cast<int64_t>(t) * bh;
    T* gaz = gaz_all.ptr() + static_cast<int64_t>(t) * bh;
    T* gar = gar_all.ptr() + static_cast<int64_t>(t) * bh;
    T* gan = gan_all.ptr() + static_cast<int64_t>(t) * bh;
    T* gc = gc_all.ptr() + static_cast<int64_t>(t) * bh;

    for (int64_t i = 0; i < bh; ++i) {
      const T gh = gy[static_cast<int64_t>(t) * bh + i] + dh[static_cast<size_t>(i)];
      const T zv = zt[i], rv = rt[i], nv = nt[i];
      const T gz = gh * (nv - hprev[i]);
      const T gn = gh * zv;
      gaz[i] = gz * zv * (T(1) - zv);
      gan[i] = gn * (T(1) - nv * nv);
      const T gr = gan[i] * ct[i];
      gar[i] = gr * rv * (T(1) - rv);
      gc[i] = gan[i] * rv;
      dh[static_cast<size_t>(i)] = gh * (T(1) - zv);
    }
    // dh[b,i] += sum_j (gaz[b,j] Uz[i,j] + gar[b,j] Ur[i,j] + gc[b,j] Un[i,j])
    for (int b = 0; b < B; ++b) {
      const T* gazr = gaz + static_cast<int64_t>(b) * H;
      const T* garr = gar + static_cast<int64_t>(b) * H;
      const T* gcr = gc + static_cast<int64_t>(b) * H;
      T* dhr = dh.data() + static_cast<size_t>(b) * H;
      for (int i = 0; i < H; ++i) {
        const T* uzr = p.uz.ptr() + static_cast<int64_t>(i) * H;
        const T* urr = p.ur.ptr() + static_cast<int64_t>(i) * H;
        const T* unr = p.un.ptr() + static_cast<int64_t>(i) * H;
        T s = 0;
        for (int j = 0; j < H; ++j) s += gazr[j] * uzr[j] + garr[j] * urr[j] + gcr[j] * unr[j];
        dhr[i] += s;
      }
    }
    // Recurrent weight grads: U* += hprev^T ga*
    for (int b = 0; b < B; ++b) {
      const T* hp = hprev + static_cast<int64_t>(b) * H;
      const T* gazr = gaz + static_cast<int64_t>(b) * H;
      const T* garr = gar + static_cast<int64_t>(b) * H;
      const T* gcr = gc + static_cast<int64_t>(b) * H;
      for (int i = 0; i < H; ++i) {
        const T hv = hp[i];
        if (hv == T(0)) continue;
        T* uzg = g.gp.uz.ptr() + static_cast<int64_t>(i) * H;
        T* urg = g.gp.ur.ptr() + static_cast<int64_t>(i) * H;
        T* ung = g.gp.un.ptr() + static_cast<int64_t>(i) * H;
        for (int j = 0; j < H; ++j) {
          uzg[j] += hv * gazr[j];
          urg[j] += hv * garr[j];
          ung[j] += hv * gcr[j];
        }
      }
    }
    for (int64_t i = 0; i < bh; ++i) {
      const int j = static_cast<int>(i % H);
      g.gp.bz[j] += gaz[i];
      g.gp.br[j] += gar[i];
      g.gp.bn[j] += gan[i];
    }
  }

  // Input-side grads for all timesteps at once.
  const Tensor<T> x2 = x.reshaped({Tn * B, F});
  const Tensor<T> gaz2 = gaz_all.reshaped({Tn * B, H});
  const Tensor<T> gar2 = gar_all.reshaped({Tn * B, H});
  const Tensor<T> gan2 = gan_all.reshaped({Tn * B, H});
  Tensor<T> gx2({Tn * B, F});
  // gx = gaz Wz^T + gar Wr^T + gan Wn^T
  {
    const Tensor<T> a = matmul_abt(gaz2, p.wz);
    const Tensor<T> b = matmul_abt(gar2, p.wr);
    const Tensor<T> c = matmul_abt(gan2, p.wn);
    for (int64_t i = 0; i < gx2.numel(); ++i) gx2[i] = a[i] + b[i] + c[i];
  }
  g.gx = gx2.reshaped({Tn, B, F});
  {
    Tensor<T> gw = matmul_atb(x2, gaz2);
    for (int64_t i = 0; i < gw.numel(); ++i) g.gp.wz[i] += gw[i];
    gw = matmul_atb(x2, gar2);
    for (int64_t i = 0; i < gw.numel(); ++i) g.gp.wr[i] += gw[i];
    gw = matmul_atb(x2, gan2);
    for (int64_t i = 0; i < gw.numel(); ++i) g.gp.wn[i] += gw[i];
  }
  return g;
}

// ---------------------------------------------------------------------------
// Bidirectional wrapper: independent forward and time-reversed passes,
// concatenated per timestep to T x B x 2H.

template <class T>
struct BiGruParams {
  GruParams<T> fwd, bwd;
  static BiGruParams sized(int f, int h) { return {GruParams<T>::sized(f, h), GruParams<T>::sized(f, h)}; }
};

template <class T>
struct BiGruCache {
  GruCache<T> fwd, bwd;
  Tensor<T> x_rev;
};

template <class T>
Tensor<T> bigru_forward(const Tensor<T>& x, const BiGruParams<T>& p, BiGruCache<T>* cache) {
  const int Tn = x.dim(0), B = x.dim(1);
  const int H = p.fwd.hidden_size();
  BiGruCache<T> local;
  BiGruCache<T>& cc = cache ? *cache : local;

  const Tensor<T> yf = gru_forward(x, p.fwd, &cc.fwd);
  cc.x_rev = reverse_time(x);
  const Tensor<T> yb_rev = gru_forward(cc.x_rev, p.bwd, &cc.bwd);

  Tensor<T> y({Tn, B, 2 * H});
  for (int t = 0; t < Tn; ++t)
    for (int b = 0; b < B; ++b) {
      const T* f = yf.ptr() + (static_cast<int64_t>(t) * B + b) * H;
      const T* r = yb_rev.ptr() + (static_cast<int64_t>(Tn - 1 - t) * B + b) * H;
      T* o = y.ptr() + (static_cast<int64_t>(t) * B + b) * 2 * H;
      std::copy(f, f + H, o);
      std::copy(r, r + H, o + H);
    }
  return y;
}

template <class T>
struct BiGruGrads {
  Tensor<T> gx;
  BiGruParams<T> gp;
};

template <class T>
BiGruGrads<T> bigru_backward(const Tensor<T>& x, const BiGruParams<T>& p, const BiGruCache<T>& cc,
                             const Tensor<T>& gy) {
  const int Tn = x.dim(0), B = x.dim(1);
  const int H = p.fwd.hidden_size();

  Tensor<T> gyf({Tn, B, H}), gyb_rev({Tn, B, H});
  for (int t = 0; t < Tn; ++t)
    for (int b = 0; b < B; ++b) {
      const T* o = gy.ptr() + (static_cast<int64_t>(t) * B + b) * 2 * H;
      std::copy(o, o + H, gyf.ptr() + (static_cast<int64_t>(t) * B + b) * H);
      std::copy(o + H, o + 2 * H,
                gyb_rev.ptr() + (static_cast<int64_t>(Tn - 1 - t) * B + b) * H);
    }

  GruGrads<T> gf = gru_backward(x, p.fwd, cc.fwd, gyf);
  GruGrads<T> gb = gru_backward(cc.x_rev, p.bwd, cc.bwd, gyb_rev);

  BiGruGrads<T> g;
  g.gp.fwd = std::move(gf.gp);
  g.gp.bwd = std::move(gb.gp);
  g.gx = std::move(gf.gx);
  const Tensor<T> gxb = reverse_time(gb.gx);
  for (int64_t i = 0; i < g.gx.numel(); ++i) g.gx[i] += gxb[i];
  return g;
}

}  // namespace lba

#endif  // LBA_GRU_HPP_
