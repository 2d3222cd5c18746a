#pragma once

// Forward propagation as a fold, back propagation as an unfold or as a fold,
// and the training paths built from them.
//
// Both network encodings are supported: Fix<S> (fold/unfold) and
// Program<S, A> (eval/build). S is any coproduct of layer shapes whose
// members provide forward_layer, backward_layer and backward_coalgebra_layer
// overloads (see below for the dense instances and conv.hpp for the
// convolutional ones).
//
// The activation type V is Vector for fully connected networks and Tensor3
// for convolutional ones; a dense layer always reads its input flattened.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "recnet/errors.hpp"
#include "recnet/layers.hpp"
#include "recnet/linalg.hpp"
#include "recnet/recursion.hpp"
#include "recnet/rng.hpp"

namespace recnet {

struct TrainConfig {
  double learning_rate = 1.0;
  BackpropMode mode = BackpropMode::Standard;
  ZipMode zip = ZipMode::Strict;  // forward pass only; backprop picks its own per mode
  std::uint64_t seed = 0;
};

// DomainError unless learning_rate > 0.
void validate(const TrainConfig& cfg);

template <class V>
struct activation_traits;

template <>
struct activation_traits<Vector> {
  static std::span<const double> flat(const Vector& v) { return v; }
  static Vector from_flat(Vector v) { return v; }
};

// Outputs of every layer, newest first; the last entry is the network input.
template <class V>
using Activations = std::vector<V>;

template <class V>
using ForwardPass = std::function<Activations<V>(const V&)>;

template <class V>
struct Sample {
  V input;
  Vector desired;

  bool operator==(const Sample&) const = default;
};

// State flowing backwards through the network. Absent next_delta marks the
// final layer. A dense layer passes its old weights and its delta; a layer
// without weights passes next_weights absent and next_delta holding the
// loss gradient with respect to its input.
template <class V>
struct BackProp {
  Activations<V> outputs;
  std::optional<Matrix> next_weights;
  std::optional<Vector> next_delta;
  Vector desired;
};

template <class Net, class V>
using BackwardPass = std::function<Net(const BackProp<V>&)>;

template <class Net, class V>
using BackwardSeed = std::pair<Net, BackProp<V>>;

struct DenseUpdate {
  Vector delta;
  Matrix weights;
  Vector biases;
};

// One dense layer's delta and parameter update, given its output, its input,
// and what the next layer passed back.
//
// Standard:      delta = g * out * (1 - out), with g the loss gradient at the
//                output; W -= lr * (delta outer in); b -= lr * delta. Strict.
// PaperVerbatim: delta = g' * logit'(in) where g' is (out - desired) or
//                (W_next^T delta_next); W -= lr * (in outer delta);
//                b -= lr * delta. Every zip truncates, so parameters may
//                shrink when dimensions disagree.
DenseUpdate dense_backward(const Matrix& weights, const Vector& biases, std::span<const double> output,
                           std::span<const double> input, const std::optional<Matrix>& next_weights,
                           const std::optional<Vector>& next_delta, const Vector& desired,
                           const TrainConfig& cfg);

// Gradient of 1/2 |out - desired|^2 with respect to a layer's output, from
// what the next layer passed back. Strict dimensions.
Vector output_gradient(std::span<const double> output, const std::optional<Matrix>& next_weights,
                       const std::optional<Vector>& next_delta, const Vector& desired);

template <class V>
void require_stack(const BackProp<V>& bp) {
  if (bp.outputs.size() < 2) {
    throw MalformedStack("activation stack exhausted before the input layer");
  }
}

template <class V>
DenseUpdate backward(const Matrix& weights, const Vector& biases, const BackProp<V>& bp,
                     const TrainConfig& cfg) {
  require_stack(bp);
  using AT = activation_traits<V>;
  return dense_backward(weights, biases, AT::flat(bp.outputs[0]), AT::flat(bp.outputs[1]),
                        bp.next_weights, bp.next_delta, bp.desired, cfg);
}

// The BackProp handed to the previous layer: the stack loses its head.
template <class V>
BackProp<V> pass_back(const BackProp<V>& bp, std::optional<Matrix> weights, Vector delta) {
  return {Activations<V>(bp.outputs.begin() + 1, bp.outputs.end()), std::move(weights),
          std::move(delta), bp.desired};
}

template <class V>
V dense_activation(const Matrix& weights, const Vector& biases, const V& input, ZipMode zip) {
  using AT = activation_traits<V>;
  return AT::from_flat(sigmoid(vec_add(mat_vec(weights, AT::flat(input), zip), biases, zip)));
}

// ---------------------------------------------------------------------------
// Forward algebra instances

template <class V>
ForwardPass<V> forward_layer(const InputLayer<ForwardPass<V>>&, const TrainConfig&) {
  return [](const V& input) { return Activations<V>{input}; };
}

template <class V>
ForwardPass<V> forward_layer(const DenseLayer<ForwardPass<V>>& layer, const TrainConfig& cfg) {
  return [w = layer.weights, b = layer.biases, previous = layer.rest, zip = cfg.zip](const V& input) {
    Activations<V> as = previous(input);
    V out = dense_activation(w, b, as.front(), zip);
    as.insert(as.begin(), std::move(out));
    return as;
  };
}

template <template <class> class F, template <class> class G, class V>
ForwardPass<V> forward_layer(const Coproduct<F, G, ForwardPass<V>>& layer, const TrainConfig& cfg) {
  return std::visit([&cfg](const auto& alt) { return forward_layer(alt, cfg); }, layer.alt);
}

struct ForwardAlgebra {
  TrainConfig cfg;
  template <class Layer>
  auto operator()(const Layer& layer) const {
    return forward_layer(layer, cfg);
  }
};

// A Pure leaf forwards its input untouched, like an input layer.
template <class V>
struct ForwardGenerator {
  template <class A>
  ForwardPass<V> operator()(const A&) const {
    return [](const V& input) { return Activations<V>{input}; };
  }
};

// ---------------------------------------------------------------------------
// Backward coalgebra instances (unfold path)

template <class T, class V>
InputLayer<BackwardSeed<T, V>> backward_coalgebra_layer(const InputLayer<T>&, const BackProp<V>&,
                                                        const TrainConfig&) {
  return {};
}

template <class T, class V>
DenseLayer<BackwardSeed<T, V>> backward_coalgebra_layer(const DenseLayer<T>& layer,
                                                        const BackProp<V>& bp,
                                                        const TrainConfig& cfg) {
  auto [delta, weights, biases] = backward(layer.weights, layer.biases, bp, cfg);
  return {std::move(weights), std::move(biases),
          BackwardSeed<T, V>{layer.rest, pass_back(bp, layer.weights, std::move(delta))}};
}

template <template <class> class F, template <class> class G, class T, class V>
Coproduct<F, G, BackwardSeed<T, V>> backward_coalgebra_layer(const Coproduct<F, G, T>& layer,
                                                             const BackProp<V>& bp,
                                                             const TrainConfig& cfg) {
  return map_summand<BackwardSeed<T, V>>(
      layer, [&](const auto& alt) { return backward_coalgebra_layer(alt, bp, cfg); });
}

// (network, BackProp) -> one layer of the updated network. A Pure leaf is
// treated as an input layer.
template <class Net, class V>
struct BackwardCoalgebra {
  using Seed = BackwardSeed<Net, V>;
  using Layer = typename Net::template Shape<Seed>;

  TrainConfig cfg;

  Layer operator()(const Seed& seed) const {
    if (const auto* node = seed.first.node()) return backward_coalgebra_layer(*node, seed.second, cfg);
    return inject<Layer>(InputLayer<Seed>{});
  }
};

// ---------------------------------------------------------------------------
// Backward algebra instances (fold path)

template <class Net, class V>
BackwardPass<Net, V> backward_layer(const InputLayer<BackwardPass<Net, V>>&, const TrainConfig&) {
  return [](const BackProp<V>&) { return embed<Net>(InputLayer<Net>{}); };
}

template <class Net, class V>
BackwardPass<Net, V> backward_layer(const DenseLayer<BackwardPass<Net, V>>& layer,
                                    const TrainConfig& cfg) {
  return [w = layer.weights, b = layer.biases, previous = layer.rest, cfg](const BackProp<V>& bp) {
    auto [delta, weights, biases] = backward(w, b, bp, cfg);
    Net updated_previous = previous(pass_back(bp, w, std::move(delta)));
    return embed<Net>(DenseLayer<Net>{std::move(weights), std::move(biases), std::move(updated_previous)});
  };
}

template <template <class> class F, template <class> class G, class Net, class V>
BackwardPass<Net, V> backward_layer(const Coproduct<F, G, BackwardPass<Net, V>>& layer,
                                    const TrainConfig& cfg) {
  return std::visit([&cfg](const auto& alt) { return backward_layer(alt, cfg); }, layer.alt);
}

struct BackwardAlgebra {
  TrainConfig cfg;
  template <class Layer>
  auto operator()(const Layer& layer) const {
    return backward_layer(layer, cfg);
  }
};

template <class Net, class V>
struct BackwardGenerator {
  template <class A>
  BackwardPass<Net, V> operator()(const A&) const {
    return [](const BackProp<V>&) { return embed<Net>(InputLayer<Net>{}); };
  }
};

// ---------------------------------------------------------------------------
// Forward propagation

template <class V, template <class> class S, class A>
ForwardPass<V> forward_pass(const Program<S, A>& network, const TrainConfig& cfg) {
  return eval<ForwardPass<V>>(ForwardAlgebra{cfg}, ForwardGenerator<V>{}, network);
}

template <class V, template <class> class S>
ForwardPass<V> forward_pass(const Fix<S>& network, const TrainConfig& cfg) {
  return fold<ForwardPass<V>>(ForwardAlgebra{cfg}, network);
}

// Every layer's output, newest first; the last element is `input`.
template <class Net, class V>
Activations<V> forward(const Net& network, const V& input, const TrainConfig& cfg = {}) {
  return forward_pass<V>(network, cfg)(input);
}

// ---------------------------------------------------------------------------
// Training

namespace detail {
template <class V>
BackProp<V> initial_backprop(Activations<V> outputs, const Vector& desired) {
  return {std::move(outputs), std::nullopt, std::nullopt, desired};
}
}  // namespace detail

// Metamorphism: unfold(coalg_bwd) . h . fold(alg_fwd).
template <template <class> class S, class V>
Fix<S> train_meta(const Sample<V>& sample, const Fix<S>& network, const TrainConfig& cfg) {
  validate(cfg);
  ForwardPass<V> pass = forward_pass<V>(network, cfg);
  BackwardSeed<Fix<S>, V> seed{network, detail::initial_backprop(pass(sample.input), sample.desired)};
  return unfold<S>(BackwardCoalgebra<Fix<S>, V>{cfg}, std::move(seed));
}

// The same metamorphism over programs: build(coalg_bwd) . h . eval(alg_fwd).
template <template <class> class S, class A, class V>
Program<S, A> train_meta(const Sample<V>& sample, const Program<S, A>& network,
                         const TrainConfig& cfg) {
  validate(cfg);
  using Net = Program<S, A>;
  ForwardPass<V> pass = forward_pass<V>(network, cfg);
  BackwardSeed<Net, V> seed{network, detail::initial_backprop(pass(sample.input), sample.desired)};
  return build<S, A>(BackwardCoalgebra<Net, V>{cfg}, std::move(seed));
}

// A single fold: pair the forward and backward algebras, then run
// (backwardPass . h . forwardPass) on the sample input.
template <template <class> class S, class A, class V>
Program<S, A> train_fold(const Sample<V>& sample, const Program<S, A>& network,
                         const TrainConfig& cfg) {
  validate(cfg);
  using Net = Program<S, A>;
  using Carrier = std::pair<ForwardPass<V>, BackwardPass<Net, V>>;
  auto algebra = pair_algebra<S>(ForwardAlgebra{cfg}, BackwardAlgebra{cfg});
  auto generator = pair_generator(ForwardGenerator<V>{}, BackwardGenerator<Net, V>{});
  auto [forward_fn, backward_fn] = eval<Carrier>(algebra, generator, network);
  return backward_fn(detail::initial_backprop(forward_fn(sample.input), sample.desired));
}

template <template <class> class S, class V>
Fix<S> train_fold(const Sample<V>& sample, const Fix<S>& network, const TrainConfig& cfg) {
  validate(cfg);
  using Net = Fix<S>;
  using Carrier = std::pair<ForwardPass<V>, BackwardPass<Net, V>>;
  auto algebra = pair_algebra<S>(ForwardAlgebra{cfg}, BackwardAlgebra{cfg});
  auto [forward_fn, backward_fn] = fold<Carrier>(algebra, network);
  return backward_fn(detail::initial_backprop(forward_fn(sample.input), sample.desired));
}

// Called before each update with the dataset position about to be trained
// and the network as it stands.
template <class Net, class V>
using TrainObserver = std::function<void(std::size_t, const Net&, const Sample<V>&)>;

// foldr train nn dataset: a right fold, so the LAST sample is applied first
// and dataset[0] last. Reverse the dataset first for chronological order.
template <class Net, class V>
Net train_many(const std::vector<Sample<V>>& dataset, Net network, const TrainConfig& cfg,
               const TrainObserver<Net, V>& observer = {}) {
  for (std::size_t i = dataset.size(); i-- > 0;) {
    if (observer) observer(i, network, dataset[i]);
    network = train_fold(dataset[i], network, cfg);
  }
  return network;
}

// ---------------------------------------------------------------------------
// Construction helpers

struct InitRange {
  double lo = 0.0;
  double hi = 1.0;
};

// rows x cols entries drawn uniformly from [lo, hi), row-major.
Matrix random_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng, InitRange range = {});
Vector random_vector(std::size_t n, SplitMix64& rng, InitRange range = {});

// 1 -> 3 -> 3 -> 3 -> 1 sigmoid network; parameters drawn outermost layer
// first, weights before biases.
DenseNetwork fc_network(SplitMix64& rng, InitRange range = {});

// Dense layers of a network, outermost first.
template <class Net>
std::vector<const DenseLayer<Net>*> dense_layers(const Net& network) {
  std::vector<const DenseLayer<Net>*> out;
  const Net* current = &network;
  while (const auto* node = current->node()) {
    if (const auto* dense = project<DenseLayer<Net>>(*node)) out.push_back(dense);
    const Net* next = nullptr;
    for_each_slot([&next](const Net& child) { next = &child; }, *node);
    if (next == nullptr) break;
    current = next;
  }
  return out;
}

}  // namespace recnet
