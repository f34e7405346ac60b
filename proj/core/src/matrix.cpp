#include "recall/matrix.hpp"

#include <cassert>
#include <cmath>

namespace recall {

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double c, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == a.cols() && y.size() == a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row_span(i), x);
}

void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == a.rows() && y.size() == a.cols());
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) axpy(x[i], a.row_span(i), y);
}

Matrix mat_at_b(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows());
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ar = a.row(k);
    const double* br = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      double ai = ar[i];
      if (ai == 0.0) continue;
      double* cr = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) cr[j] += ai * br[j];
    }
  }
  return c;
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  assert(a.cols() == b.cols() && c.rows() == a.rows() && c.cols() == b.rows());
  if (!accumulate) c.fill(0.0);
  const std::size_t p = a.rows(), q = b.rows(), k = a.cols();
  constexpr std::size_t kBlock = 48;
  for (std::size_t jb = 0; jb < q; jb += kBlock) {
    const std::size_t je = std::min(q, jb + kBlock);
    for (std::size_t i = 0; i < p; ++i) {
      const double* ar = a.row(i);
      double* cr = c.row(i);
      for (std::size_t j = jb; j < je; ++j) {
        const double* br = b.row(j);
        double s = 0.0;
        for (std::size_t t = 0; t < k; ++t) s += ar[t] * br[t];
        cr[j] += s;
      }
    }
  }
}

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  assert(a.cols() == b.rows() && c.rows() == a.rows() && c.cols() == b.cols());
  if (!accumulate) c.fill(0.0);
  const std::size_t p = a.rows(), k = a.cols();
  constexpr std::size_t kBlock = 64;
  for (std::size_t ib = 0; ib < p; ib += kBlock) {
    const std::size_t ie = std::min(p, ib + kBlock);
    for (std::size_t t = 0; t < k; ++t) {
      const double* br = b.row(t);
      for (std::size_t i = ib; i < ie; ++i) {
        double av = a(i, t);
        if (av == 0.0) continue;
        double* cr = c.row(i);
        for (std::size_t j = 0; j < b.cols(); ++j) cr[j] += av * br[j];
      }
    }
  }
}

void gemm_tn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* ar = a.row(r);
    const double* br = b.row(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      double av = ar[i];
      if (av == 0.0) continue;
      double* cr = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) cr[j] += av * br[j];
    }
  }
}

}  // namespace recall
