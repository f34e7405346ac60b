#pragma once

#include <functional>
#include <span>

#include "recall/matrix.hpp"

namespace recall {

// Max-subtracted softmax. Throws std::invalid_argument on an empty input.
Vector softmax(std::span<const double> v);
void softmax_inplace(std::span<double> v);

double log_sum_exp(std::span<const double> v);

// -log softmax(logits)[target], computed through log-sum-exp.
double cross_entropy(std::span<const double> logits, std::size_t target);

// Central-difference gradient oracle: (f(x + h e_i) - f(x - h e_i)) / 2h.
// Throws NumericError if f returns a non-finite value.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& theta, double h);

}  // namespace recall
