#pragma once

// Layer shapes of a fully connected network. The slot `rest` holds the
// previous layer, i.e. everything between this layer and the input.

#include <type_traits>
#include <utility>

#include "recnet/linalg.hpp"
#include "recnet/recursion.hpp"

namespace recnet {

// The zero-slot base shape terminating every well-formed network.
template <class K>
struct InputLayer {
  bool operator==(const InputLayer&) const = default;
};

template <class K>
struct DenseLayer {
  Matrix weights;  // out x in
  Vector biases;   // length out
  K rest;

  bool operator==(const DenseLayer&) const = default;
};

template <class K, class Fn>
InputLayer<std::invoke_result_t<Fn&, const K&>> fmap(Fn&&, const InputLayer<K>&) {
  return {};
}

template <class K, class Fn>
void for_each_slot(Fn&&, const InputLayer<K>&) {}

template <class K, class Fn>
DenseLayer<std::invoke_result_t<Fn&, const K&>> fmap(Fn&& f, const DenseLayer<K>& layer) {
  return {layer.weights, layer.biases, f(layer.rest)};
}

template <class K, class Fn>
void for_each_slot(Fn&& f, const DenseLayer<K>& layer) {
  f(layer.rest);
}

// InputLayer :+: DenseLayer
template <class K>
using FullyConnected = Coproduct<InputLayer, DenseLayer, K>;

using DenseNetwork = Program<FullyConnected, Unit>;

// Smart constructors. denselayer yields one layer with a Pure () slot, so
// sequencing appends whatever comes next; inputlayer has no slot and ends
// the program.
template <template <class> class S>
  requires MemberOf<DenseLayer<Program<S, Unit>>, S<Program<S, Unit>>>
Program<S, Unit> denselayer(Matrix weights, Vector biases) {
  if (weights.rows() != biases.size()) {
    throw DimensionMismatch("dense layer with " + std::to_string(weights.rows()) +
                            " weight rows but " + std::to_string(biases.size()) + " biases");
  }
  using P = Program<S, Unit>;
  return embed<P>(DenseLayer<P>{std::move(weights), std::move(biases), P::pure(Unit{})});
}

template <template <class> class S, class A = Unit>
  requires MemberOf<InputLayer<Program<S, A>>, S<Program<S, A>>>
Program<S, A> inputlayer() {
  using P = Program<S, A>;
  return embed<P>(InputLayer<P>{});
}

}  // namespace recnet
