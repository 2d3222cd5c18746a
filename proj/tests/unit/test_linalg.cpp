#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "recnet/errors.hpp"
#include "recnet/linalg.hpp"
#include "support/gen.hpp"

using namespace recnet;
using doctest::Approx;

TEST_CASE("elementwise operations in both zip modes") {
  CHECK(vec_add(Vector{1, 2}, Vector{3, 4}) == Vector{4, 6});
  CHECK(vec_add(Vector{1, 2}, Vector{3}, ZipMode::Truncate) == Vector{4});
  CHECK_THROWS_AS(vec_add(Vector{1, 2}, Vector{3}), DimensionMismatch);

  CHECK(vec_sub(Vector{5, 5}, Vector{2, 3}) == Vector{3, 2});
  CHECK(vec_sub(Vector{1}, Vector{1, 9}, ZipMode::Truncate) == Vector{0});
  CHECK_THROWS_AS(vec_sub(Vector{1}, Vector{1, 9}), DimensionMismatch);

  CHECK(vec_mul(Vector{2, 3}, Vector{4, 5}) == Vector{8, 15});
  CHECK(vec_mul(Vector{1, 2, 3}, Vector{1, 1}, ZipMode::Truncate) == Vector{1, 2});

  SplitMix64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = gen::vector(rng, gen::size_in(rng, 0, 8));
    const Vector y = gen::vector(rng, gen::size_in(rng, 0, 8));
    CHECK(vec_sub(x, x) == Vector(x.size(), 0.0));
    CHECK(vec_mul(x, Vector(x.size(), 1.0)) == x);
    CHECK(vec_add(x, y, ZipMode::Truncate).size() == std::min(x.size(), y.size()));
    if (x.size() != y.size()) CHECK_THROWS_AS(vec_add(x, y), DimensionMismatch);
  }
}

TEST_CASE("matrix construction invariants") {
  CHECK_THROWS_AS(Matrix(0, 3), EmptyOperand);
  CHECK_THROWS_AS(Matrix(2, 2, Vector{1, 2, 3}), DimensionMismatch);
  CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), DimensionMismatch);
  CHECK_THROWS_AS(checked_vector(Vector{1.0, NAN}), DomainError);
  const Matrix m{{1, 2, 3}, {4, 5, 6}};
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 0) == 4);
}

TEST_CASE("mat_vec matches a double loop") {
  CHECK(mat_vec(Matrix{{1, 0}, {0, 1}}, Vector{5, 7}) == Vector{5, 7});
  CHECK(mat_vec(Matrix{{1, 2}, {3, 4}}, Vector{1, 1}) == Vector{3, 7});
  CHECK_THROWS_AS(mat_vec(Matrix{{1, 2}}, Vector{1}), DimensionMismatch);
  CHECK(mat_vec(Matrix{{1, 2}, {3, 4}}, Vector{1}, ZipMode::Truncate) == Vector{1, 3});

  SplitMix64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix m = gen::matrix(rng, 3, 2);
    const Vector y = gen::vector(rng, 2);
    Vector expect(3, 0.0);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 2; ++j) expect[i] += m(i, j) * y[j];
    CHECK(mat_vec(m, y) == expect);
  }
}

TEST_CASE("mat_vec distributes over vec_add") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t r = gen::size_in(rng, 1, 5), c = gen::size_in(rng, 1, 5);
    const Matrix m = gen::matrix(rng, r, c);
    const Vector x = gen::vector(rng, c), y = gen::vector(rng, c);
    const Vector lhs = mat_vec(m, vec_add(x, y));
    const Vector rhs = vec_add(mat_vec(m, x), mat_vec(m, y));
    for (std::size_t i = 0; i < r; ++i) {
      CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-12 * std::max(1.0, std::abs(rhs[i])));
    }
  }
}

TEST_CASE("mat_sub, outer and transpose") {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  CHECK(mat_sub(a, a) == Matrix(2, 3, 0.0));
  CHECK(mat_sub(Matrix{{1}}, Matrix{{0}}) == Matrix{{1}});
  const Matrix t = mat_sub(a, Matrix{{1, 1}, {1, 1}}, ZipMode::Truncate);
  CHECK(t == Matrix{{0, 1}, {3, 4}});
  CHECK_THROWS_AS(mat_sub(a, Matrix{{1, 1}, {1, 1}}), DimensionMismatch);
  CHECK(mat_sub(a, Matrix{{1, 1, 1}}, ZipMode::Truncate) == Matrix{{0, 1, 2}});

  CHECK(outer(Vector{1, 2}, Vector{3}) == Matrix{{3}, {6}});
  CHECK(outer(Vector{1, 2}, Vector{0, 0, 0}) == Matrix(2, 3, 0.0));
  CHECK_THROWS_AS(outer(Vector{}, Vector{1}), EmptyOperand);
  CHECK(transpose(Matrix{{1, 2}}) == Matrix{{1}, {2}});

  SplitMix64 rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = gen::vector(rng, gen::size_in(rng, 1, 6));
    const Vector y = gen::vector(rng, gen::size_in(rng, 1, 6));
    CHECK(transpose(outer(x, y)) == outer(y, x));
    const Matrix m = gen::matrix(rng, gen::size_in(rng, 1, 6), gen::size_in(rng, 1, 6));
    CHECK(transpose(transpose(m)) == m);
    CHECK(transpose(m).rows() == m.cols());
    CHECK(transpose(m).cols() == m.rows());
  }
}

TEST_CASE("sigmoid values and symmetry") {
  CHECK(sigmoid(Vector{0.0}) == Vector{0.5});
  CHECK(sigmoid(Vector{std::log(3.0)})[0] == Approx(0.75).epsilon(1e-12));
  SplitMix64 rng(25);
  Vector xs = gen::vector(rng, 200, -30.0, 30.0);
  for (double x : xs) {
    const double s = sigmoid(Vector{x})[0];
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    CHECK(std::abs(sigmoid(Vector{-x})[0] - (1.0 - s)) <= 1e-12);
  }
  std::sort(xs.begin(), xs.end());
  const Vector ss = sigmoid(xs);
  CHECK(std::is_sorted(ss.begin(), ss.end()));
}

TEST_CASE("sigmoid_prime in both modes") {
  CHECK(sigmoid_prime(Vector{0.5}, BackpropMode::PaperVerbatim) == Vector{0.0});
  CHECK(sigmoid_prime(Vector{0.5}, BackpropMode::Standard) == Vector{0.25});
  CHECK(sigmoid_prime(Vector{0.75}, BackpropMode::Standard) == Vector{0.1875});
  CHECK_THROWS_AS(sigmoid_prime(Vector{1.0}, BackpropMode::PaperVerbatim), DomainError);
  CHECK_THROWS_AS(sigmoid_prime(Vector{-0.2}, BackpropMode::PaperVerbatim), DomainError);
  CHECK_NOTHROW(sigmoid_prime(Vector{1.0}, BackpropMode::Standard));

  // d/dy sigma(y) at y = logit(x), central differences.
  SplitMix64 rng(26);
  const double h = 1e-6;
  for (int trial = 0; trial < 200; ++trial) {
    const double x = rng.uniform(0.01, 0.99);
    const double y = std::log(x / (1.0 - x));
    const double fd = (sigmoid(Vector{y + h})[0] - sigmoid(Vector{y - h})[0]) / (2 * h);
    const double an = sigmoid_prime(Vector{x}, BackpropMode::Standard)[0];
    CHECK(std::abs(fd - an) / std::abs(an) < 1e-4);
  }
}

TEST_CASE("pearson_corr") {
  const Vector xs{1, 2, 3, 4.5};
  CHECK(pearson_corr(xs, xs) == Approx(1.0).epsilon(1e-15));
  CHECK(pearson_corr(xs, scale(-1.0, xs)) == Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(pearson_corr(Vector{1, 1, 1}, Vector{1, 2, 3}), DegenerateInput);
  CHECK_THROWS_AS(pearson_corr(Vector{1}, Vector{1}), DegenerateInput);
  CHECK_THROWS_AS(pearson_corr(Vector{1, 2}, Vector{1, 2, 3}), DimensionMismatch);

  // Direct formula: r = (n sxy - sx sy) / sqrt((n sxx - sx^2)(n syy - sy^2)).
  const double x[] = {1, 2, 3}, y[] = {2, 4, 6.1};
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < 3; ++i) {
    sx += x[i], sy += y[i], sxx += x[i] * x[i], syy += y[i] * y[i], sxy += x[i] * y[i];
  }
  const double direct = (3 * sxy - sx * sy) / std::sqrt((3 * sxx - sx * sx) * (3 * syy - sy * sy));
  CHECK(std::abs(pearson_corr(Vector{1, 2, 3}, Vector{2, 4, 6.1}) - direct) < 1e-9);
}
