#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lvtopo {

// Dense column-major matrix of doubles. Time runs down the rows in all
// measurement-derived matrices, so a column is one contiguous series and
// can be handed to the series kernels as a span.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const {
    return {data_.data() + c * rows_, rows_};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace lvtopo
