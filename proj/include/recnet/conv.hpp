#pragma once

// Convolutional layers as further coproduct summands. Forward and backward
// instances below plug into the algebras of dense.hpp; no new recursion.
//
// Conv: valid cross-correlation, stride 1, no padding.
// Pool: max over window x window patches at the given stride; ties go to
//       the first cell in row-major order.
// ReLU: max(0, x), derivative 0 at 0.
//
// These layers always use the conventional gradient, whatever the
// BackpropMode; they pass back the loss gradient with respect to their input
// (next_weights absent, next_delta set).

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "recnet/dense.hpp"
#include "recnet/layers.hpp"
#include "recnet/recursion.hpp"
#include "recnet/rng.hpp"
#include "recnet/tensor.hpp"

namespace recnet {

// n_filters filters of filter_w x filter_h x in_depth, one bias each.
// Weight (f, d, j, i) lives at ((f * in_depth + d) * filter_h + j) * filter_w + i.
struct FilterBank {
  std::size_t filter_w = 0;
  std::size_t filter_h = 0;
  std::size_t in_depth = 0;
  std::size_t n_filters = 0;
  Vector weights;
  Vector biases;

  FilterBank(std::size_t filter_w, std::size_t filter_h, std::size_t in_depth, std::size_t n_filters,
             Vector weights, Vector biases);

  std::size_t index(std::size_t f, std::size_t d, std::size_t j, std::size_t i) const {
    return ((f * in_depth + d) * filter_h + j) * filter_w + i;
  }
  double weight(std::size_t f, std::size_t d, std::size_t j, std::size_t i) const {
    return weights[index(f, d, j, i)];
  }

  bool operator==(const FilterBank&) const = default;
};

Tensor3 conv_forward(const FilterBank& bank, const Tensor3& input);

struct ConvUpdate {
  FilterBank bank;
  Tensor3 input_grad;
};

// bank - lr * dL/dbank, and dL/dinput, given dL/doutput.
ConvUpdate conv_backward(const FilterBank& bank, const Tensor3& input, const Tensor3& upstream,
                         double learning_rate);

// For each output cell, the flat input index that won the max.
struct PoolMap {
  std::size_t in_width = 0;
  std::size_t in_height = 0;
  std::size_t in_depth = 0;
  std::vector<std::size_t> source;
};

std::pair<Tensor3, PoolMap> pool_forward(std::size_t window, std::size_t stride, const Tensor3& input);

// Routes each upstream entry to its winning input cell, summing collisions.
Tensor3 pool_backward(const PoolMap& map, const Tensor3& upstream);

Tensor3 relu_forward(const Tensor3& input);
Tensor3 relu_backward(const Tensor3& input, const Tensor3& upstream);

// ---------------------------------------------------------------------------
// Shapes

template <class K>
struct ConvLayer {
  FilterBank bank;
  K rest;
  bool operator==(const ConvLayer&) const = default;
};

template <class K>
struct PoolLayer {
  std::size_t window = 0;
  std::size_t stride = 0;
  K rest;
  bool operator==(const PoolLayer&) const = default;
};

template <class K>
struct ReluLayer {
  K rest;
  bool operator==(const ReluLayer&) const = default;
};

template <class K, class Fn>
ConvLayer<std::invoke_result_t<Fn&, const K&>> fmap(Fn&& f, const ConvLayer<K>& layer) {
  return {layer.bank, f(layer.rest)};
}
template <class K, class Fn>
void for_each_slot(Fn&& f, const ConvLayer<K>& layer) {
  f(layer.rest);
}

template <class K, class Fn>
PoolLayer<std::invoke_result_t<Fn&, const K&>> fmap(Fn&& f, const PoolLayer<K>& layer) {
  return {layer.window, layer.stride, f(layer.rest)};
}
template <class K, class Fn>
void for_each_slot(Fn&& f, const PoolLayer<K>& layer) {
  f(layer.rest);
}

template <class K, class Fn>
ReluLayer<std::invoke_result_t<Fn&, const K&>> fmap(Fn&& f, const ReluLayer<K>& layer) {
  return {f(layer.rest)};
}
template <class K, class Fn>
void for_each_slot(Fn&& f, const ReluLayer<K>& layer) {
  f(layer.rest);
}

// InputLayer :+: DenseLayer :+: ConvLayer :+: PoolLayer :+: ReluLayer
template <class K>
using ConvShape = Sum<InputLayer, DenseLayer, ConvLayer, PoolLayer, ReluLayer>::type<K>;

using ConvNetwork = Program<ConvShape, Unit>;

template <template <class> class S>
  requires MemberOf<ConvLayer<Program<S, Unit>>, S<Program<S, Unit>>>
Program<S, Unit> convlayer(FilterBank bank) {
  using P = Program<S, Unit>;
  return embed<P>(ConvLayer<P>{std::move(bank), P::pure(Unit{})});
}

template <template <class> class S>
  requires MemberOf<PoolLayer<Program<S, Unit>>, S<Program<S, Unit>>>
Program<S, Unit> poollayer(std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0) throw DimensionMismatch("pool window and stride must be positive");
  using P = Program<S, Unit>;
  return embed<P>(PoolLayer<P>{window, stride, P::pure(Unit{})});
}

template <template <class> class S>
  requires MemberOf<ReluLayer<Program<S, Unit>>, S<Program<S, Unit>>>
Program<S, Unit> relulayer() {
  using P = Program<S, Unit>;
  return embed<P>(ReluLayer<P>{P::pure(Unit{})});
}

// ---------------------------------------------------------------------------
// Forward instances

namespace detail {
template <class Step>
ForwardPass<Tensor3> extend(ForwardPass<Tensor3> previous, Step step) {
  return [previous = std::move(previous), step = std::move(step)](const Tensor3& input) {
    Activations<Tensor3> as = previous(input);
    Tensor3 out = step(as.front());
    as.insert(as.begin(), std::move(out));
    return as;
  };
}
}  // namespace detail

inline ForwardPass<Tensor3> forward_layer(const ConvLayer<ForwardPass<Tensor3>>& layer, const TrainConfig&) {
  return detail::extend(layer.rest, [bank = layer.bank](const Tensor3& in) { return conv_forward(bank, in); });
}

inline ForwardPass<Tensor3> forward_layer(const PoolLayer<ForwardPass<Tensor3>>& layer, const TrainConfig&) {
  return detail::extend(layer.rest, [w = layer.window, s = layer.stride](const Tensor3& in) {
    return pool_forward(w, s, in).first;
  });
}

inline ForwardPass<Tensor3> forward_layer(const ReluLayer<ForwardPass<Tensor3>>& layer, const TrainConfig&) {
  return detail::extend(layer.rest, [](const Tensor3& in) { return relu_forward(in); });
}

// ---------------------------------------------------------------------------
// Backward: the upstream gradient as a tensor shaped like the layer output.

Tensor3 upstream_gradient(const BackProp<Tensor3>& bp);

ConvUpdate conv_step(const FilterBank& bank, const BackProp<Tensor3>& bp, const TrainConfig& cfg);
Tensor3 pool_step(std::size_t window, std::size_t stride, const BackProp<Tensor3>& bp);
Tensor3 relu_step(const BackProp<Tensor3>& bp);

template <class T>
ConvLayer<BackwardSeed<T, Tensor3>> backward_coalgebra_layer(const ConvLayer<T>& layer,
                                                             const BackProp<Tensor3>& bp,
                                                             const TrainConfig& cfg) {
  auto [bank, grad] = conv_step(layer.bank, bp, cfg);
  return {std::move(bank), {layer.rest, pass_back(bp, std::nullopt, grad.values())}};
}

template <class T>
PoolLayer<BackwardSeed<T, Tensor3>> backward_coalgebra_layer(const PoolLayer<T>& layer,
                                                             const BackProp<Tensor3>& bp,
                                                             const TrainConfig&) {
  Tensor3 grad = pool_step(layer.window, layer.stride, bp);
  return {layer.window, layer.stride, {layer.rest, pass_back(bp, std::nullopt, grad.values())}};
}

template <class T>
ReluLayer<BackwardSeed<T, Tensor3>> backward_coalgebra_layer(const ReluLayer<T>& layer,
                                                             const BackProp<Tensor3>& bp,
                                                             const TrainConfig&) {
  Tensor3 grad = relu_step(bp);
  return {{layer.rest, pass_back(bp, std::nullopt, grad.values())}};
}

template <class Net>
BackwardPass<Net, Tensor3> backward_layer(const ConvLayer<BackwardPass<Net, Tensor3>>& layer,
                                          const TrainConfig& cfg) {
  return [bank = layer.bank, previous = layer.rest, cfg](const BackProp<Tensor3>& bp) {
    auto [updated, grad] = conv_step(bank, bp, cfg);
    Net inner = previous(pass_back(bp, std::nullopt, grad.values()));
    return embed<Net>(ConvLayer<Net>{std::move(updated), std::move(inner)});
  };
}

template <class Net>
BackwardPass<Net, Tensor3> backward_layer(const PoolLayer<BackwardPass<Net, Tensor3>>& layer,
                                          const TrainConfig&) {
  return [w = layer.window, s = layer.stride, previous = layer.rest](const BackProp<Tensor3>& bp) {
    Tensor3 grad = pool_step(w, s, bp);
    Net inner = previous(pass_back(bp, std::nullopt, grad.values()));
    return embed<Net>(PoolLayer<Net>{w, s, std::move(inner)});
  };
}

template <class Net>
BackwardPass<Net, Tensor3> backward_layer(const ReluLayer<BackwardPass<Net, Tensor3>>& layer,
                                          const TrainConfig&) {
  return [previous = layer.rest](const BackProp<Tensor3>& bp) {
    Tensor3 grad = relu_step(bp);
    Net inner = previous(pass_back(bp, std::nullopt, grad.values()));
    return embed<Net>(ReluLayer<Net>{std::move(inner)});
  };
}

// ---------------------------------------------------------------------------
// The X/O network and data

// dense 2x8 . conv(2,2,1,2) . conv(2,2,4,1) . pool(2,1) . conv(3,3,1,4) . input,
// taking 7x7x1 to 2. Weights drawn outermost layer first; all biases zero.
ConvNetwork conv_network(SplitMix64& rng, InitRange range = {});

// 7x7 masks: X sets both diagonals, O the border ring.
Tensor3 x_mask();
Tensor3 o_mask();

// n samples drawn from rng: class X when a draw falls below 0.5, then each
// pixel gets mask + noise * (2u - 1). Labels [1, 0] for X, [0, 1] for O.
std::vector<Sample<Tensor3>> xo_dataset(std::size_t n, SplitMix64& rng, double noise = 0.1);
std::vector<Sample<Tensor3>> xo_dataset(std::size_t n, std::uint64_t seed, double noise = 0.1);

}  // namespace recnet
