#pragma once

// Plain-text network documents. Layers are listed outermost first:
//
//   recnet 1
//   dense 1 3
//   weights 0.25 0.5 0.75
//   biases 0.1
//   conv 3 3 1 4          filter_w filter_h in_depth n_filters
//   weights ...           ((f * in_depth + d) * filter_h + j) * filter_w + i
//   biases ...
//   pool 2 1              window stride
//   relu
//   input
//
// Numbers use the shortest decimal form that reads back to the same double,
// so save then load is the identity bit for bit. Blank lines and lines
// starting with '#' are ignored.

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "recnet/conv.hpp"
#include "recnet/errors.hpp"
#include "recnet/layers.hpp"
#include "recnet/linalg.hpp"

namespace recnet {

inline constexpr int kFormatVersion = 1;

namespace record {
struct Dense {
  Matrix weights;
  Vector biases;
};
struct Conv {
  FilterBank bank;
};
struct Pool {
  std::size_t window;
  std::size_t stride;
};
struct Relu {};
struct Input {};
}  // namespace record

struct LayerRecord {
  std::size_t line;  // where the record starts, for diagnostics
  std::variant<record::Dense, record::Conv, record::Pool, record::Relu, record::Input> layer;
};

// Shortest round-trip decimal.
std::string format_double(double x);
void write_numbers(std::ostream& os, const char* tag, std::span<const double> values);

void write_record(std::ostream& os, const Matrix& weights, const Vector& biases);
void write_record(std::ostream& os, const FilterBank& bank);
void write_pool_record(std::ostream& os, std::size_t window, std::size_t stride);

// Checks the header, then reads every record up to and including `input`.
// ParseError on malformed or truncated text, VersionError on an unknown header.
std::vector<LayerRecord> read_records(std::istream& is);

namespace detail {

template <class Net>
void save_layer(std::ostream& os, const InputLayer<Net>&) {
  os << "input\n";
}
template <class Net>
void save_layer(std::ostream& os, const DenseLayer<Net>& layer) {
  write_record(os, layer.weights, layer.biases);
}
template <class Net>
void save_layer(std::ostream& os, const ConvLayer<Net>& layer) {
  write_record(os, layer.bank);
}
template <class Net>
void save_layer(std::ostream& os, const PoolLayer<Net>& layer) {
  write_pool_record(os, layer.window, layer.stride);
}
template <class Net>
void save_layer(std::ostream& os, const ReluLayer<Net>&) {
  os << "relu\n";
}
template <template <class> class F, template <class> class G, class Net>
void save_layer(std::ostream& os, const Coproduct<F, G, Net>& layer) {
  std::visit([&os](const auto& alt) { save_layer(os, alt); }, layer.alt);
}

template <class Net, template <class> class L, class... Args>
Net attach(const LayerRecord& rec, const char* kind, Args&&... args) {
  if constexpr (MemberOf<L<Net>, typename Net::Node>) {
    return embed<Net>(L<Net>{std::forward<Args>(args)...});
  } else {
    throw ParseError(rec.line, "kind", std::string(kind) + " layers are not part of this network type");
  }
}

}  // namespace detail

// Error if the program still has an open Pure leaf.
template <class Net>
void save_network(const Net& network, std::ostream& os) {
  os << "recnet " << kFormatVersion << '\n';
  const Net* current = &network;
  for (;;) {
    const auto* node = current->node();
    if (node == nullptr) throw Error("cannot save a network with an open Pure leaf");
    detail::save_layer(os, *node);
    const Net* next = nullptr;
    for_each_slot([&next](const Net& child) { next = &child; }, *node);
    if (next == nullptr) return;
    current = next;
  }
}

template <class Net>
Net load_network(std::istream& is) {
  const std::vector<LayerRecord> records = read_records(is);
  std::optional<Net> net;
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    const LayerRecord& rec = *it;
    net = std::visit(
        [&](const auto& r) -> Net {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, record::Input>) {
            return detail::attach<Net, InputLayer>(rec, "input");
          } else if constexpr (std::is_same_v<R, record::Dense>) {
            return detail::attach<Net, DenseLayer>(rec, "dense", r.weights, r.biases, std::move(*net));
          } else if constexpr (std::is_same_v<R, record::Conv>) {
            return detail::attach<Net, ConvLayer>(rec, "conv", r.bank, std::move(*net));
          } else if constexpr (std::is_same_v<R, record::Pool>) {
            return detail::attach<Net, PoolLayer>(rec, "pool", r.window, r.stride, std::move(*net));
          } else {
            return detail::attach<Net, ReluLayer>(rec, "relu", std::move(*net));
          }
        },
        rec.layer);
  }
  return std::move(*net);
}

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// File wrappers; Error if the file cannot be opened or written.
template <class Net>
void save_network_file(const Net& network, const std::string& path) {
  std::ostringstream os;
  save_network(network, os);
  write_text_file(path, os.str());
}

template <class Net>
Net load_network_file(const std::string& path) {
  std::istringstream is(read_text_file(path));
  return load_network<Net>(is);
}

}  // namespace recnet
