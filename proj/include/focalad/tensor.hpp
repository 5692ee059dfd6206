#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace focalad {

// Dense row-major tensor of doubles. Rank 0 is a scalar (one element).
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != element_count(shape)) {
      throw std::invalid_argument("tensor: data length does not match shape");
    }
  }

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
  }

  static Tensor zeros(std::vector<std::size_t> s) {
    std::size_t n = element_count(s);
    return Tensor(std::move(s), std::vector<double>(n, 0.0));
  }

  static Tensor scalar(double v) { return Tensor({}, {v}); }

  static Tensor vector(std::vector<double> d) {
    std::size_t n = d.size();
    return Tensor({n}, std::move(d));
  }

  std::size_t size() const { return data.size(); }
  bool is_scalar() const { return data.size() == 1 && shape.empty(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool operator==(const Tensor& o) const = default;
};

inline bool all_finite(const Tensor& t) {
  for (double v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline std::string shape_str(const std::vector<std::size_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

}  // namespace focalad
