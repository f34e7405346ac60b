#pragma once

#include <span>
#include <vector>

namespace recall {

// Information-theoretic floor on the expected cross-entropy of a B-bit
// learner over M outputs with input distribution p (sorted non-increasing):
// log M * sum_{x > ceil(B / log M)} p(x), natural log, 1-based x. The strict
// tail (x > boundary) makes B = N log M give exactly zero.
double lb_assoc_loss(double bits_b, double m_outputs, std::span<const double> p_sorted);

// Evaluate the bound for p(x) ~ x^{-alpha} on [N] over a geometric grid of B
// and fit the log-log slope (expected 1 - alpha for alpha > 1).
double lb_power_law_slope(std::span<const double> b_grid, double alpha, std::size_t n);

// B >= S R log D + (1 - c) R D log(|V| / D), nats. Requires |V| >= 2 R D and
// c in (0, 1).
double lb_factual_bits(std::size_t s, std::size_t r, std::size_t d, std::size_t v,
                       double c);

// Ratio of a measured storage budget (parameter count x bits per parameter)
// to a lower bound given in nats.
double compare_capacity(double measured_param_bits, double bound_nats);

// Least-squares slope of log(y) vs log(x); the helper behind the capacity
// scaling criteria.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace recall
