#include "nirs/matrix.hpp"

#include <cmath>

#include "nirs/error.hpp"
#include "nirs/kernels.hpp"

namespace nirs {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw DataError("matrix data size does not match shape");
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw DataError("ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols_);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= rows_) throw DataError("row index out of range");
    auto src = row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

std::vector<double> Matrix::column_means() const {
  std::vector<double> m(cols_, 0.0);
  if (rows_ == 0) return m;
  for (std::size_t r = 0; r < rows_; ++r) simd::axpy(1.0, row(r), m);
  for (double& v : m) v /= static_cast<double>(rows_);
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void center_rows(Matrix& m, std::span<const double> means) {
  for (std::size_t r = 0; r < m.rows(); ++r) simd::axpy(-1.0, means, m.row(r));
}

std::vector<double> transpose_times(const Matrix& x, std::span<const double> v) {
  std::vector<double> out(x.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) simd::axpy(v[r], x.row(r), out);
  return out;
}

std::vector<double> times(const Matrix& x, std::span<const double> v) {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = simd::dot(x.row(r), v);
  return out;
}

Matrix gram_rows(const Matrix& x) {
  Matrix g(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = simd::dot(x.row(i), x.row(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<double> select(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace nirs
