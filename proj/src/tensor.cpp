#include "recnet/tensor.hpp"

#include <string>

#include "recnet/errors.hpp"

namespace recnet {

Tensor3::Tensor3(std::size_t width, std::size_t height, std::size_t depth, double fill)
    : Tensor3(width, height, depth, Vector(width * height * depth, fill)) {}

Tensor3::Tensor3(std::size_t width, std::size_t height, std::size_t depth, Vector values)
    : width_(width), height_(height), depth_(depth), values_(std::move(values)) {
  if (width == 0 || height == 0 || depth == 0) throw EmptyOperand("tensor dimensions must be positive");
  if (values_.size() != width * height * depth) {
    throw DimensionMismatch("tensor data holds " + std::to_string(values_.size()) + " entries, expected " +
                            std::to_string(width * height * depth));
  }
}

}  // namespace recnet
