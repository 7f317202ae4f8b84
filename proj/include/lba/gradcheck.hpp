#ifndef LBA_GRADCHECK_HPP_
#define LBA_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lba/rng.hpp"
#include "lba/tensor.hpp"

// Central finite-difference verification of analytic gradients. Checks run in
// double precision; float32 rounding swamps the h^2 truncation term.

namespace lba {

struct GradCheckOptions {
  double step = 1e-5;
  int max_coords_per_tensor = 0;  // 0 = check every coordinate
  uint64_t coord_seed = 17;
};

// `loss` re-evaluates the scalar objective from the current tensor contents.
// `analytic` holds d(loss)/d(input) per input, same order.
inline double grad_check(const std::function<double()>& loss,
                         const std::vector<Tensor<double>*>& inputs,
                         const std::vector<const Tensor<double>*>& analytic,
                         const GradCheckOptions& opt = {}) {
  double worst = 0.0;
  Rng pick(opt.coord_seed);
  for (size_t k = 0; k < inputs.size(); ++k) {
    Tensor<double>& x = *inputs[k];
    const Tensor<double>& g = *analytic[k];
    std::vector<int64_t> coords;
    if (opt.max_coords_per_tensor > 0 && x.numel() > opt.max_coords_per_tensor) {
      for (int i = 0; i < opt.max_coords_per_tensor; ++i)
        coords.push_back(static_cast<int64_t>(pick.below(static_cast<uint64_t>(x.numel()))));
    } else {
      for (int64_t i = 0; i < x.numel(); ++i) coords.push_back(i);
    }
    for (int64_t i : coords) {
      const double orig = x[i];
      x[i] = orig + opt.step;
      const double up = loss();
      x[i] = orig - opt.step;
      const double down = loss();
      x[i] = orig;
      const double numeric = (up - down) / (2.0 * opt.step);
      const double a = g[i];
      const double rel = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      if (rel > worst) worst = rel;
    }
  }
  return worst;
}

// Push values away from a kink so the two-sided difference stays on one side.
inline void nudge_from(Tensor<double>& t, double kink, double margin) {
  for (auto& v : t.data)
    if (std::abs(v - kink) < margin) v = kink + (v >= kink ? margin : -margin);
}

// Separate near-ties so max selections are stable under +/- step perturbation.
inline void separate_ties(Tensor<double>& t, double margin) {
  std::vector<double> sorted(t.data);
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] - sorted[i - 1] < margin) {
      // spread every value by a rank-proportional offset
      for (size_t j = 0; j < t.data.size(); ++j) t.data[j] += static_cast<double>(j) * margin * 2;
      return;
    }
}

}  // namespace lba

#endif  // LBA_GRADCHECK_HPP_
