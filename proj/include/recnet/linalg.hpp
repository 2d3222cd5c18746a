#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace recnet {

using Vector = std::vector<double>;

// How binary operations treat operands of different lengths. Strict raises
// DimensionMismatch; Truncate keeps the common prefix, like a truncating zip.
enum class ZipMode { Strict, Truncate };

// Which sigmoid derivative backprop uses.
//   PaperVerbatim: y = ln(x / (1 - x)), result y * (1 - y).
//   Standard:      x * (1 - x), the derivative written in terms of the output.
enum class BackpropMode { PaperVerbatim, Standard };

// Row-major dense matrix; rows index outputs, columns index inputs.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, Vector data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix from_rows(const std::vector<Vector>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  const Vector& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  Vector data_;
};

// Copies external input, rejecting NaN and infinities with DomainError.
Vector checked_vector(std::span<const double> values);

Vector vec_add(std::span<const double> x, std::span<const double> y, ZipMode mode = ZipMode::Strict);
Vector vec_sub(std::span<const double> x, std::span<const double> y, ZipMode mode = ZipMode::Strict);
Vector vec_mul(std::span<const double> x, std::span<const double> y, ZipMode mode = ZipMode::Strict);
Vector scale(double factor, std::span<const double> x);

// result[i] = sum_j m(i, j) * y[j]; length rows(m).
Vector mat_vec(const Matrix& m, std::span<const double> y, ZipMode mode = ZipMode::Strict);

// Row-wise vec_sub. Truncate trims both the row count and the row length.
Matrix mat_sub(const Matrix& a, const Matrix& b, ZipMode mode = ZipMode::Strict);
Matrix scale(double factor, const Matrix& m);

// result(i, j) = x[i] * y[j]. EmptyOperand if either side is empty.
Matrix outer(std::span<const double> x, std::span<const double> y);
Matrix transpose(const Matrix& m);

Vector sigmoid(std::span<const double> x);

// DomainError in PaperVerbatim mode for entries outside (0, 1).
Vector sigmoid_prime(std::span<const double> x, BackpropMode mode);

double l2_norm(std::span<const double> x);

// Pearson correlation. DimensionMismatch on unequal lengths; DegenerateInput
// for fewer than two points or zero variance on either side.
double pearson_corr(std::span<const double> xs, std::span<const double> ys);

}  // namespace recnet
