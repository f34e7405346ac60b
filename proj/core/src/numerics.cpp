#include "recall/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "recall/errors.hpp"

namespace recall {

void softmax_inplace(std::span<double> v) {
  if (v.empty()) throw std::invalid_argument("softmax: empty vector");
  double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

Vector softmax(std::span<const double> v) {
  Vector out(v.begin(), v.end());
  softmax_inplace(out);
  return out;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("log_sum_exp: empty vector");
  double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - m);
  return m + std::log(sum);
}

double cross_entropy(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size())
    throw std::invalid_argument("cross_entropy: target out of range");
  return log_sum_exp(logits) - logits[target];
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& theta, double h) {
  Vector grad(theta.size());
  Vector x = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    x[i] = theta[i] + h;
    double fp = f(x);
    x[i] = theta[i] - h;
    double fm = f(x);
    x[i] = theta[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("finite_diff_grad: non-finite function value");
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace recall
