#pragma once

#include <cstddef>
#include <span>

#include "recnet/dense.hpp"
#include "recnet/linalg.hpp"

namespace recnet {

// width x height x depth, stored with index (z * height + y) * width + x.
class Tensor3 {
 public:
  Tensor3(std::size_t width, std::size_t height, std::size_t depth, double fill = 0.0);
  Tensor3(std::size_t width, std::size_t height, std::size_t depth, Vector values);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t depth() const { return depth_; }
  std::size_t size() const { return values_.size(); }

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const { return (z * height_ + y) * width_ + x; }
  double operator()(std::size_t x, std::size_t y, std::size_t z) const { return values_[index(x, y, z)]; }
  double& operator()(std::size_t x, std::size_t y, std::size_t z) { return values_[index(x, y, z)]; }

  const Vector& values() const { return values_; }
  bool same_dims(const Tensor3& other) const {
    return width_ == other.width_ && height_ == other.height_ && depth_ == other.depth_;
  }

  bool operator==(const Tensor3&) const = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::size_t depth_;
  Vector values_;
};

// A dense layer reads a tensor flattened and emits an n x 1 x 1 column.
template <>
struct activation_traits<Tensor3> {
  static std::span<const double> flat(const Tensor3& t) { return t.values(); }
  static Tensor3 from_flat(Vector v) {
    const std::size_t n = v.size();
    return Tensor3(n, 1, 1, std::move(v));
  }
};

}  // namespace recnet
