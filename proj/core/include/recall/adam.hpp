#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace recall {

// Adam with bias correction. Parameters are registered as flat blocks; one
// shared step counter drives the correction terms.
class AdamOptimizer {
 public:
  AdamOptimizer(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  std::size_t add_block(std::size_t size) {
    slots_.push_back(Slot{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)});
    return slots_.size() - 1;
  }

  void begin_step() {
    ++t_;
    beta1_pow_ *= beta1_;
    beta2_pow_ *= beta2_;
  }

  void update(std::size_t block, std::span<double> params,
              std::span<const double> grads, double lr) {
    Slot& s = slots_[block];
    const double bc1 = 1.0 - beta1_pow_;
    const double bc2 = 1.0 - beta2_pow_;
    for (std::size_t i = 0; i < params.size(); ++i) {
      s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * grads[i];
      s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * grads[i] * grads[i];
      double mhat = s.m[i] / bc1;
      double vhat = s.v[i] / bc2;
      params[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }

  int step_count() const { return t_; }

 private:
  struct Slot {
    std::vector<double> m, v;
  };
  std::vector<Slot> slots_;
  double beta1_, beta2_, eps_;
  double beta1_pow_ = 1.0, beta2_pow_ = 1.0;
  int t_ = 0;
};

}  // namespace recall
