#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace nirs {

/// Dense row-major matrix of doubles. Rows are contiguous spans, which is
/// what the spectral operators and kernels iterate over.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Matrix select_rows(std::span<const std::size_t> idx) const;
  Matrix transpose() const;

  /// Column means over all rows.
  std::vector<double> column_means() const;

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

inline RowMajorMap as_eigen(Matrix& m) {
  return RowMajorMap(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                     static_cast<Eigen::Index>(m.cols()));
}
inline ConstRowMajorMap as_eigen(const Matrix& m) {
  return ConstRowMajorMap(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                          static_cast<Eigen::Index>(m.cols()));
}

/// Subtracts `means` from every row in place.
void center_rows(Matrix& m, std::span<const double> means);

/// X^T v for row-major X (length cols).
std::vector<double> transpose_times(const Matrix& x, std::span<const double> v);

/// X v for row-major X (length rows).
std::vector<double> times(const Matrix& x, std::span<const double> v);

/// X X^T (rows x rows), symmetric.
Matrix gram_rows(const Matrix& x);

double mean(std::span<const double> v);
std::vector<double> select(std::span<const double> v, std::span<const std::size_t> idx);

}  // namespace nirs
