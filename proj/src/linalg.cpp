#include "recnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recnet/errors.hpp"

namespace recnet {
namespace {

std::size_t zip_length(std::size_t a, std::size_t b, ZipMode mode, const char* op) {
  if (a != b && mode == ZipMode::Strict) {
    throw DimensionMismatch(std::string(op) + ": lengths " + std::to_string(a) + " and " +
                            std::to_string(b));
  }
  return std::min(a, b);
}

template <class Op>
Vector zip_with(std::span<const double> x, std::span<const double> y, ZipMode mode, const char* name,
                Op op) {
  const std::size_t n = zip_length(x.size(), y.size(), mode, name);
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = op(x[i], y[i]);
  return out;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : Matrix(rows, cols, Vector(rows * cols, fill)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) throw EmptyOperand("matrix dimensions must be positive");
  if (data_.size() != rows * cols) {
    throw DimensionMismatch("matrix data holds " + std::to_string(data_.size()) +
                            " entries, expected " + std::to_string(rows * cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : Matrix(from_rows(std::vector<Vector>(rows.begin(), rows.end()))) {}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty() || rows.front().empty()) throw EmptyOperand("matrix needs at least one entry");
  const std::size_t cols = rows.front().size();
  Vector data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionMismatch("ragged matrix rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(rows.size(), cols, std::move(data));
}

Vector checked_vector(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError("non-finite value in input");
  }
  return Vector(values.begin(), values.end());
}

Vector vec_add(std::span<const double> x, std::span<const double> y, ZipMode mode) {
  return zip_with(x, y, mode, "vec_add", [](double a, double b) { return a + b; });
}

Vector vec_sub(std::span<const double> x, std::span<const double> y, ZipMode mode) {
  return zip_with(x, y, mode, "vec_sub", [](double a, double b) { return a - b; });
}

Vector vec_mul(std::span<const double> x, std::span<const double> y, ZipMode mode) {
  return zip_with(x, y, mode, "vec_mul", [](double a, double b) { return a * b; });
}

Vector scale(double factor, std::span<const double> x) {
  Vector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [factor](double v) { return factor * v; });
  return out;
}

Vector mat_vec(const Matrix& m, std::span<const double> y, ZipMode mode) {
  const std::size_t n = zip_length(m.cols(), y.size(), mode, "mat_vec");
  Vector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += y[j] * m(i, j);
    out[i] = sum;
  }
  return out;
}

Matrix mat_sub(const Matrix& a, const Matrix& b, ZipMode mode) {
  const std::size_t rows = zip_length(a.rows(), b.rows(), mode, "mat_sub rows");
  const std::size_t cols = zip_length(a.cols(), b.cols(), mode, "mat_sub cols");
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = a(i, j) - b(i, j);
  }
  return out;
}

Matrix scale(double factor, const Matrix& m) {
  return Matrix(m.rows(), m.cols(), scale(factor, m.data()));
}

Matrix outer(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw EmptyOperand("outer product of an empty vector");
  Matrix out(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) out(i, j) = x[i] * y[j];
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  }
  return out;
}

Vector sigmoid(std::span<const double> x) {
  Vector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(),
                 [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return out;
}

Vector sigmoid_prime(std::span<const double> x, BackpropMode mode) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    if (mode == BackpropMode::Standard) {
      out[i] = v * (1.0 - v);
      continue;
    }
    if (!(v > 0.0 && v < 1.0)) {
      throw DomainError("logit sigmoid derivative needs entries in (0, 1), got " +
                        std::to_string(v));
    }
    const double y = std::log(v / (1.0 - v));
    out[i] = y * (1.0 - y);
  }
  return out;
}

double l2_norm(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return std::sqrt(sum);
}

double pearson_corr(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DimensionMismatch("pearson_corr: unequal lengths");
  const std::size_t n = xs.size();
  if (n < 2) throw DegenerateInput("pearson_corr needs at least two points");
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("pearson_corr: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace recnet
