#include "recnet/conv.hpp"

#include <string>

#include "recnet/errors.hpp"

namespace recnet {
namespace {

std::string dims(const Tensor3& t) {
  return std::to_string(t.width()) + "x" + std::to_string(t.height()) + "x" + std::to_string(t.depth());
}

void check_fits(const FilterBank& bank, const Tensor3& input) {
  if (input.depth() != bank.in_depth || bank.filter_w > input.width() || bank.filter_h > input.height()) {
    throw DimensionMismatch("filter " + std::to_string(bank.filter_w) + "x" + std::to_string(bank.filter_h) +
                            "x" + std::to_string(bank.in_depth) + " does not fit input " + dims(input));
  }
}

}  // namespace

FilterBank::FilterBank(std::size_t filter_w, std::size_t filter_h, std::size_t in_depth, std::size_t n_filters,
                       Vector weights, Vector biases)
    : filter_w(filter_w),
      filter_h(filter_h),
      in_depth(in_depth),
      n_filters(n_filters),
      weights(std::move(weights)),
      biases(std::move(biases)) {
  if (filter_w == 0 || filter_h == 0 || in_depth == 0 || n_filters == 0) {
    throw EmptyOperand("filter bank dimensions must be positive");
  }
  if (this->weights.size() != filter_w * filter_h * in_depth * n_filters) {
    throw DimensionMismatch("filter bank holds " + std::to_string(this->weights.size()) + " weights, expected " +
                            std::to_string(filter_w * filter_h * in_depth * n_filters));
  }
  if (this->biases.size() != n_filters) {
    throw DimensionMismatch("filter bank needs one bias per filter");
  }
}

Tensor3 conv_forward(const FilterBank& bank, const Tensor3& input) {
  check_fits(bank, input);
  const std::size_t ow = input.width() - bank.filter_w + 1;
  const std::size_t oh = input.height() - bank.filter_h + 1;
  Tensor3 out(ow, oh, bank.n_filters);
  for (std::size_t f = 0; f < bank.n_filters; ++f)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = bank.biases[f];
        for (std::size_t d = 0; d < bank.in_depth; ++d)
          for (std::size_t j = 0; j < bank.filter_h; ++j)
            for (std::size_t i = 0; i < bank.filter_w; ++i) acc += bank.weight(f, d, j, i) * input(x + i, y + j, d);
        out(x, y, f) = acc;
      }
  return out;
}

ConvUpdate conv_backward(const FilterBank& bank, const Tensor3& input, const Tensor3& upstream,
                         double learning_rate) {
  check_fits(bank, input);
  const std::size_t ow = input.width() - bank.filter_w + 1;
  const std::size_t oh = input.height() - bank.filter_h + 1;
  if (upstream.width() != ow || upstream.height() != oh || upstream.depth() != bank.n_filters) {
    throw DimensionMismatch("upstream gradient " + dims(upstream) + " does not match conv output");
  }
  Vector dw(bank.weights.size(), 0.0);
  Vector db(bank.n_filters, 0.0);
  Tensor3 din(input.width(), input.height(), input.depth());
  for (std::size_t f = 0; f < bank.n_filters; ++f)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        const double g = upstream(x, y, f);
        db[f] += g;
        for (std::size_t d = 0; d < bank.in_depth; ++d)
          for (std::size_t j = 0; j < bank.filter_h; ++j)
            for (std::size_t i = 0; i < bank.filter_w; ++i) {
              dw[bank.index(f, d, j, i)] += g * input(x + i, y + j, d);
              din(x + i, y + j, d) += g * bank.weight(f, d, j, i);
            }
      }
  FilterBank updated(bank.filter_w, bank.filter_h, bank.in_depth, bank.n_filters,
                     vec_sub(bank.weights, scale(learning_rate, dw)), vec_sub(bank.biases, scale(learning_rate, db)));
  return {std::move(updated), std::move(din)};
}

std::pair<Tensor3, PoolMap> pool_forward(std::size_t window, std::size_t stride, const Tensor3& input) {
  if (window == 0 || stride == 0) throw DimensionMismatch("pool window and stride must be positive");
  if (window > input.width() || window > input.height()) {
    throw DimensionMismatch("pool window " + std::to_string(window) + " exceeds input " + dims(input));
  }
  const std::size_t ow = (input.width() - window) / stride + 1;
  const std::size_t oh = (input.height() - window) / stride + 1;
  Tensor3 out(ow, oh, input.depth());
  PoolMap map{input.width(), input.height(), input.depth(), std::vector<std::size_t>(out.size())};
  for (std::size_t z = 0; z < input.depth(); ++z)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = input.index(ox * stride, oy * stride, z);
        for (std::size_t j = 0; j < window; ++j)
          for (std::size_t i = 0; i < window; ++i) {
            const std::size_t at = input.index(ox * stride + i, oy * stride + j, z);
            if (input.values()[at] > input.values()[best]) best = at;
          }
        out(ox, oy, z) = input.values()[best];
        map.source[out.index(ox, oy, z)] = best;
      }
  return {std::move(out), std::move(map)};
}

Tensor3 pool_backward(const PoolMap& map, const Tensor3& upstream) {
  if (upstream.size() != map.source.size()) {
    throw DimensionMismatch("upstream gradient " + dims(upstream) + " does not match pool output");
  }
  Tensor3 grad(map.in_width, map.in_height, map.in_depth);
  Vector values = grad.values();
  for (std::size_t k = 0; k < map.source.size(); ++k) values[map.source[k]] += upstream.values()[k];
  return Tensor3(map.in_width, map.in_height, map.in_depth, std::move(values));
}

Tensor3 relu_forward(const Tensor3& input) {
  Vector v = input.values();
  for (double& x : v) x = x > 0.0 ? x : 0.0;
  return Tensor3(input.width(), input.height(), input.depth(), std::move(v));
}

Tensor3 relu_backward(const Tensor3& input, const Tensor3& upstream) {
  if (!input.same_dims(upstream)) throw DimensionMismatch("relu gradient " + dims(upstream) + " vs input " + dims(input));
  Vector v = upstream.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(input.values()[k] > 0.0)) v[k] = 0.0;
  }
  return Tensor3(input.width(), input.height(), input.depth(), std::move(v));
}

Tensor3 upstream_gradient(const BackProp<Tensor3>& bp) {
  require_stack(bp);
  const Tensor3& out = bp.outputs[0];
  Vector g = output_gradient(out.values(), bp.next_weights, bp.next_delta, bp.desired);
  return Tensor3(out.width(), out.height(), out.depth(), std::move(g));
}

ConvUpdate conv_step(const FilterBank& bank, const BackProp<Tensor3>& bp, const TrainConfig& cfg) {
  return conv_backward(bank, bp.outputs[1], upstream_gradient(bp), cfg.learning_rate);
}

Tensor3 pool_step(std::size_t window, std::size_t stride, const BackProp<Tensor3>& bp) {
  Tensor3 upstream = upstream_gradient(bp);
  return pool_backward(pool_forward(window, stride, bp.outputs[1]).second, upstream);
}

Tensor3 relu_step(const BackProp<Tensor3>& bp) {
  Tensor3 upstream = upstream_gradient(bp);
  return relu_backward(bp.outputs[1], upstream);
}

ConvNetwork conv_network(SplitMix64& rng, InitRange range) {
  auto bank = [&](std::size_t fw, std::size_t fh, std::size_t d, std::size_t n) {
    return FilterBank(fw, fh, d, n, random_vector(fw * fh * d * n, rng, range), Vector(n, 0.0));
  };
  ConvNetwork dense = denselayer<ConvShape>(random_matrix(2, 8, rng, range), Vector(2, 0.0));
  ConvNetwork c1 = convlayer<ConvShape>(bank(2, 2, 1, 2));
  ConvNetwork c2 = convlayer<ConvShape>(bank(2, 2, 4, 1));
  ConvNetwork pool = poollayer<ConvShape>(2, 1);
  ConvNetwork c3 = convlayer<ConvShape>(bank(3, 3, 1, 4));
  ConvNetwork input = inputlayer<ConvShape>();
  return then(dense, then(c1, then(c2, then(pool, then(c3, input)))));
}

Tensor3 x_mask() {
  Tensor3 t(7, 7, 1);
  for (std::size_t i = 0; i < 7; ++i) {
    t(i, i, 0) = 1.0;
    t(6 - i, i, 0) = 1.0;
  }
  return t;
}

Tensor3 o_mask() {
  Tensor3 t(7, 7, 1);
  for (std::size_t i = 0; i < 7; ++i) {
    t(i, 0, 0) = t(i, 6, 0) = t(0, i, 0) = t(6, i, 0) = 1.0;
  }
  return t;
}

std::vector<Sample<Tensor3>> xo_dataset(std::size_t n, SplitMix64& rng, double noise) {
  const Tensor3 x = x_mask(), o = o_mask();
  std::vector<Sample<Tensor3>> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const bool is_x = rng.uniform() < 0.5;
    Vector pixels = (is_x ? x : o).values();
    for (double& p : pixels) p += noise * (2.0 * rng.uniform() - 1.0);
    out.push_back({Tensor3(7, 7, 1, std::move(pixels)), is_x ? Vector{1.0, 0.0} : Vector{0.0, 1.0}});
  }
  return out;
}

std::vector<Sample<Tensor3>> xo_dataset(std::size_t n, std::uint64_t seed, double noise) {
  SplitMix64 rng(seed);
  return xo_dataset(n, rng, noise);
}

}  // namespace recnet
