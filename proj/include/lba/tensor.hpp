#ifndef LBA_TENSOR_HPP_
#define LBA_TENSOR_HPP_

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lba/error.hpp"

namespace lba {

inline std::string shape_str(const std::vector<int>& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ")";
  return os.str();
}

// Dense row-major tensor. Precision is a template parameter: float for
// training, double for finite-difference gradient checks.
template <class T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;

  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(numel_of(shape)), T(0));
  }

  Tensor(std::vector<int> s, std::vector<T> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != numel_of(shape))
      fail(Error::Kind::Shape, "tensor: data length " +
                                   std::to_string(data.size()) +
                                   " does not match shape " + shape_str(shape));
  }

  static int64_t numel_of(const std::vector<int>& s) {
    int64_t n = 1;
    for (int e : s) {
      if (e <= 0) fail(Error::Kind::Shape, "tensor: non-positive extent in " + shape_str(s));
      n *= e;
    }
    return n;
  }

  static Tensor full(std::vector<int> s, T value) {
    Tensor t(std::move(s));
    for (auto& v : t.data) v = value;
    return t;
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  // Shape reinterpretation; element count must be preserved.
  Tensor reshaped(std::vector<int> s) const {
    if (numel_of(s) != numel())
      fail(Error::Kind::Shape, "reshape: " + shape_str(shape) + " -> " + shape_str(s));
    Tensor t;
    t.shape = std::move(s);
    t.data = data;
    return t;
  }

  void fill(T value) {
    for (auto& v : data) v = value;
  }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <class T>
bool same_shape(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape == b.shape;
}

template <class T>
bool all_finite(const Tensor<T>& t) {
  for (T v : t.data)
    if (!std::isfinite(static_cast<double>(v))) return false;
  return true;
}

template <class U, class T>
Tensor<U> cast_tensor(const Tensor<T>& t) {
  Tensor<U> out;
  out.shape = t.shape;
  out.data.resize(t.data.size());
  for (size_t i = 0; i < t.data.size(); ++i) out.data[i] = static_cast<U>(t.data[i]);
  return out;
}

}  // namespace lba

#endif  // LBA_TENSOR_HPP_
