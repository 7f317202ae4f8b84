#ifndef LBA_ADAM_HPP_
#define LBA_ADAM_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lba/tensor.hpp"

namespace lba {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over an ordered parameter list. The moment buffers are
// indexed positionally, so the caller must pass the same parameter order on
// every step.
template <class T>
struct AdamState {
  AdamConfig cfg;
  int64_t step = 0;
  std::vector<Tensor<T>> m, v;

  AdamState() = default;
  AdamState(const AdamConfig& c, const std::vector<Tensor<T>*>& params) : cfg(c) {
    m.reserve(params.size());
    v.reserve(params.size());
    for (const Tensor<T>* p : params) {
      m.emplace_back(p->shape);
      v.emplace_back(p->shape);
    }
  }
};

// One update. A non-finite gradient aborts before any state is touched.
template <class T>
void adam_step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
               AdamState<T>& st) {
  if (params.size() != grads.size() || params.size() != st.m.size())
    fail(Error::Kind::Shape, "adam: parameter/gradient/state count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    if (!same_shape(*params[i], *grads[i]) || !same_shape(*params[i], st.m[i]))
      fail(Error::Kind::Shape, "adam: shape mismatch at parameter " + std::to_string(i));
    if (!all_finite(*grads[i]))
      fail(Error::Kind::NonFinite, "adam: non-finite gradient at parameter " + std::to_string(i) +
                                       "; step aborted");
  }

  st.step += 1;
  const double b1 = st.cfg.beta1, b2 = st.cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    const Tensor<T>& g = *grads[i];
    Tensor<T>& mi = st.m[i];
    Tensor<T>& vi = st.v[i];
    for (int64_t j = 0; j < p.numel(); ++j) {
      const double gj = static_cast<double>(g[j]);
      const double mj = b1 * static_cast<double>(mi[j]) + (1.0 - b1) * gj;
      const double vj = b2 * static_cast<double>(vi[j]) + (1.0 - b2) * gj * gj;
      mi[j] = static_cast<T>(mj);
      vi[j] = static_cast<T>(vj);
      const double mhat = mj / bc1;
      const double vhat = vj / bc2;
      p[j] = static_cast<T>(static_cast<double>(p[j]) -
                            st.cfg.lr * mhat / (std::sqrt(vhat) + st.cfg.eps));
    }
  }
}

}  // namespace lba

#endif  // LBA_ADAM_HPP_
