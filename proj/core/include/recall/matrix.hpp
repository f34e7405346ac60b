#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace recall {

using Vector = std::vector<double>;

// Dense row-major matrix of 64-bit reals.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  std::span<double> row_span(std::size_t i) { return {row(i), cols_}; }
  std::span<const double> row_span(std::size_t i) const { return {row(i), cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> flat() { return {data_.data(), data_.size()}; }
  std::span<const double> flat() const { return {data_.data(), data_.size()}; }

  void fill(double v) { data_.assign(data_.size(), v); }
  bool all_finite() const;
  double max_abs() const;

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
// y += c * x
void axpy(double c, std::span<const double> x, std::span<double> y);

// y = A x  (y sized A.rows())
void matvec(const Matrix& a, std::span<const double> x, std::span<double> y);
// y = A^T x  (y sized A.cols())
void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y);
// C = A^T B where A, B have equal row counts (C: A.cols x B.cols)
Matrix mat_at_b(const Matrix& a, const Matrix& b);

// Blocked kernels for the training loops; all row-major, sizes taken from the
// destination. accumulate=false zeroes C first.
// C (p x q) = A (p x k) B^T (q x k)
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
// C (p x q) = A (p x k) B (k x q)
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
// C (k x q) += A^T (p x k) B (p x q)
void gemm_tn_acc(const Matrix& a, const Matrix& b, Matrix& c);

}  // namespace recall
