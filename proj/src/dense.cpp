#include "recnet/dense.hpp"

#include <string>

namespace recnet {

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) {
    throw DomainError("learning rate must be positive, got " +
                                std::to_string(cfg.learning_rate));
  }
}

Vector output_gradient(std::span<const double> output, const std::optional<Matrix>& next_weights,
                       const std::optional<Vector>& next_delta, const Vector& desired) {
  if (!next_delta) return vec_sub(output, desired);
  if (!next_weights) {
    if (next_delta->size() != output.size()) {
      throw DimensionMismatch("passed-back gradient has " + std::to_string(next_delta->size()) +
                              " entries for an output of " + std::to_string(output.size()));
    }
    return *next_delta;
  }
  Vector g = mat_vec(transpose(*next_weights), *next_delta);
  if (g.size() != output.size()) {
    throw DimensionMismatch("next layer expects " + std::to_string(g.size()) +
                            " inputs but this layer produced " + std::to_string(output.size()));
  }
  return g;
}

DenseUpdate dense_backward(const Matrix& weights, const Vector& biases, std::span<const double> output,
                           std::span<const double> input, const std::optional<Matrix>& next_weights,
                           const std::optional<Vector>& next_delta, const Vector& desired,
                           const TrainConfig& cfg) {
  const double lr = cfg.learning_rate;
  if (cfg.mode == BackpropMode::Standard) {
    Vector delta = vec_mul(output_gradient(output, next_weights, next_delta, desired),
                           sigmoid_prime(output, BackpropMode::Standard));
    Matrix new_weights = mat_sub(weights, scale(lr, outer(delta, input)));
    Vector new_biases = vec_sub(biases, scale(lr, delta));
    return {std::move(delta), std::move(new_weights), std::move(new_biases)};
  }

  // Exactly as printed: truncating zips, sigma' on the layer input, and the
  // input (x) delta orientation.
  constexpr ZipMode zip = ZipMode::Truncate;
  Vector error;
  if (!next_delta) {
    error = vec_sub(output, desired, zip);
  } else if (next_weights) {
    error = mat_vec(transpose(*next_weights), *next_delta, zip);
  } else {
    error = *next_delta;
  }
  Vector delta = vec_mul(error, sigmoid_prime(input, BackpropMode::PaperVerbatim), zip);
  Matrix new_weights = mat_sub(weights, scale(lr, outer(input, delta)), zip);
  Vector new_biases = vec_sub(biases, scale(lr, delta), zip);
  return {std::move(delta), std::move(new_weights), std::move(new_biases)};
}

Matrix random_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng, InitRange range) {
  Vector data(rows * cols);
  for (double& v : data) v = rng.uniform(range.lo, range.hi);
  return Matrix(rows, cols, std::move(data));
}

Vector random_vector(std::size_t n, SplitMix64& rng, InitRange range) {
  Vector v(n);
  for (double& x : v) x = rng.uniform(range.lo, range.hi);
  return v;
}

DenseNetwork fc_network(SplitMix64& rng, InitRange range) {
  struct Spec {
    std::size_t out, in;
  };
  constexpr Spec specs[] = {{1, 3}, {3, 3}, {3, 3}, {3, 1}};
  DenseNetwork net = inputlayer<FullyConnected>();
  std::vector<DenseNetwork> layers;
  for (const auto& s : specs) {
    Matrix w = random_matrix(s.out, s.in, rng, range);
    Vector b = random_vector(s.out, rng, range);
    layers.push_back(denselayer<FullyConnected>(std::move(w), std::move(b)));
  }
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) net = then(*it, net);
  return net;
}

}  // namespace recnet
