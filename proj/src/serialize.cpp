#include "recnet/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

namespace recnet {

std::string format_double(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, end);
}

void write_numbers(std::ostream& os, const char* tag, std::span<const double> values) {
  os << tag;
  for (double v : values) os << ' ' << format_double(v);
  os << '\n';
}

void write_record(std::ostream& os, const Matrix& weights, const Vector& biases) {
  os << "dense " << weights.rows() << ' ' << weights.cols() << '\n';
  write_numbers(os, "weights", weights.data());
  write_numbers(os, "biases", biases);
}

void write_record(std::ostream& os, const FilterBank& bank) {
  os << "conv " << bank.filter_w << ' ' << bank.filter_h << ' ' << bank.in_depth << ' ' << bank.n_filters << '\n';
  write_numbers(os, "weights", bank.weights);
  write_numbers(os, "biases", bank.biases);
}

void write_pool_record(std::ostream& os, std::size_t window, std::size_t stride) {
  os << "pool " << window << ' ' << stride << '\n';
}

namespace {

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  // Next meaningful line split on whitespace; false at end of input.
  bool next(std::vector<std::string>& tokens) {
    std::string text;
    while (std::getline(is_, text)) {
      ++line_;
      if (!text.empty() && text.back() == '\r') text.pop_back();
      std::istringstream ss(text);
      tokens.assign(std::istream_iterator<std::string>(ss), std::istream_iterator<std::string>());
      if (tokens.empty() || tokens.front().front() == '#') continue;
      return true;
    }
    return false;
  }

  std::vector<std::string> expect(const char* what) {
    std::vector<std::string> tokens;
    if (!next(tokens)) throw ParseError(line_ + 1, what, "unexpected end of document");
    return tokens;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& is_;
  std::size_t line_ = 0;
};

double parse_double(const std::string& token, std::size_t line, const std::string& field) {
  double value = 0;
  const char* first = token.data();
  const char* last = first + token.size();
  const auto [end, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || end != last) throw ParseError(line, field, "not a number: '" + token + "'");
  if (!std::isfinite(value)) throw ParseError(line, field, "non-finite value");
  return value;
}

std::size_t parse_size(const std::string& token, std::size_t line, const std::string& field) {
  std::size_t value = 0;
  const char* first = token.data();
  const char* last = first + token.size();
  const auto [end, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || end != last || value == 0) {
    throw ParseError(line, field, "expected a positive integer, got '" + token + "'");
  }
  return value;
}

void expect_arity(const std::vector<std::string>& tokens, std::size_t n, std::size_t line) {
  if (tokens.size() != n) {
    throw ParseError(line, tokens.front(), "expected " + std::to_string(n - 1) + " fields, got " +
                                               std::to_string(tokens.size() - 1));
  }
}

Vector read_numbers(Reader& in, const char* tag, std::size_t count) {
  const auto tokens = in.expect(tag);
  if (tokens.front() != tag) {
    throw ParseError(in.line(), tag, "expected '" + std::string(tag) + "', got '" + tokens.front() + "'");
  }
  if (tokens.size() - 1 != count) {
    throw ParseError(in.line(), tag, "expected " + std::to_string(count) + " values, got " +
                                         std::to_string(tokens.size() - 1));
  }
  Vector values(count);
  for (std::size_t k = 0; k < count; ++k) {
    values[k] = parse_double(tokens[k + 1], in.line(), std::string(tag) + "[" + std::to_string(k) + "]");
  }
  return values;
}

}  // namespace

std::vector<LayerRecord> read_records(std::istream& is) {
  Reader in(is);
  auto header = in.expect("header");
  if (header.front() != "recnet") throw ParseError(in.line(), "header", "not a network document");
  if (header.size() != 2 || header[1] != std::to_string(kFormatVersion)) {
    throw VersionError("unsupported network format '" + (header.size() > 1 ? header[1] : std::string()) +
                       "', this build reads version " + std::to_string(kFormatVersion));
  }

  std::vector<LayerRecord> records;
  for (;;) {
    const auto tokens = in.expect("layer");
    const std::size_t at = in.line();
    const std::string& kind = tokens.front();
    if (kind == "input") {
      expect_arity(tokens, 1, at);
      records.push_back({at, record::Input{}});
      break;
    }
    if (kind == "relu") {
      expect_arity(tokens, 1, at);
      records.push_back({at, record::Relu{}});
    } else if (kind == "pool") {
      expect_arity(tokens, 3, at);
      records.push_back({at, record::Pool{parse_size(tokens[1], at, "window"), parse_size(tokens[2], at, "stride")}});
    } else if (kind == "dense") {
      expect_arity(tokens, 3, at);
      const std::size_t rows = parse_size(tokens[1], at, "rows"), cols = parse_size(tokens[2], at, "cols");
      Vector w = read_numbers(in, "weights", rows * cols);
      Vector b = read_numbers(in, "biases", rows);
      records.push_back({at, record::Dense{Matrix(rows, cols, std::move(w)), std::move(b)}});
    } else if (kind == "conv") {
      expect_arity(tokens, 5, at);
      const std::size_t fw = parse_size(tokens[1], at, "filter_w"), fh = parse_size(tokens[2], at, "filter_h");
      const std::size_t d = parse_size(tokens[3], at, "in_depth"), n = parse_size(tokens[4], at, "n_filters");
      Vector w = read_numbers(in, "weights", fw * fh * d * n);
      Vector b = read_numbers(in, "biases", n);
      records.push_back({at, record::Conv{FilterBank(fw, fh, d, n, std::move(w), std::move(b))}});
    } else {
      throw ParseError(at, "kind", "unknown layer kind '" + kind + "'");
    }
  }
  std::vector<std::string> trailing;
  if (in.next(trailing)) throw ParseError(in.line(), "layer", "content after the input layer");
  return records;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << text;
  if (!os.flush()) throw Error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

}  // namespace recnet
