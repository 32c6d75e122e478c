#include "conspec/linalg.hpp"

#include <cmath>

#include "conspec/error.hpp"
#include "conspec/simd.hpp"

namespace conspec {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorKind::DimMismatch, "matrix data has " + std::to_string(data_.size()) +
                                            " entries, expected " + std::to_string(rows * cols));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::push_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw Error(ErrorKind::DimMismatch, "row of length " + std::to_string(values.size()) +
                                            " pushed into matrix with " + std::to_string(cols_) +
                                            " columns");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw Error(ErrorKind::DimMismatch, "matvec operand size");
  Vector y(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) y[r] = simd::dot(a.row(r), x);
  return y;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.rows()) throw Error(ErrorKind::DimMismatch, "matvec_transposed operand size");
  Vector y(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) simd::axpy(x[r], a.row(r), y);
  return y;
}

double norm(std::span<const double> v) { return std::sqrt(simd::squared_norm(v)); }

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool cholesky_solve(Matrix s, double ridge, double singular_threshold, Matrix& b) {
  const std::size_t n = s.rows();
  for (std::size_t i = 0; i < n; ++i) s(i, i) += ridge;

  // Lower factor stored in place, row-major so each inner product is a dot
  // over contiguous prefixes.
  for (std::size_t j = 0; j < n; ++j) {
    const double pivot = s(j, j) - simd::dot(s.row(j).first(j), s.row(j).first(j));
    if (!(pivot > singular_threshold) || !std::isfinite(pivot)) return false;
    const double ljj = std::sqrt(pivot);
    s(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      s(i, j) = (s(i, j) - simd::dot(s.row(i).first(j), s.row(j).first(j))) / ljj;
    }
  }

  const std::size_t k = b.cols();
  // forward: L y = b
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) simd::axpy(-s(i, j), b.row(j), b.row(i));
    const double inv = 1.0 / s(i, i);
    for (std::size_t c = 0; c < k; ++c) b(i, c) *= inv;
  }
  // backward: L^T x = y
  for (std::size_t ii = n; ii-- > 0;) {
    const double inv = 1.0 / s(ii, ii);
    for (std::size_t c = 0; c < k; ++c) b(ii, c) *= inv;
    for (std::size_t j = 0; j < ii; ++j) simd::axpy(-s(ii, j), b.row(ii), b.row(j));
  }
  return true;
}

}  // namespace conspec
