#include "recall/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace recall {

double lb_assoc_loss(double bits_b, double m_outputs, std::span<const double> p_sorted) {
  if (bits_b < 0.0) throw std::invalid_argument("lb_assoc_loss: B must be >= 0");
  if (m_outputs < 2.0 && std::abs(m_outputs - std::exp(1.0)) > 1e-12)
    throw std::invalid_argument("lb_assoc_loss: M must be >= 2");
  if (p_sorted.empty()) throw std::invalid_argument("lb_assoc_loss: empty p");
  double prev = p_sorted[0];
  double total = 0.0;
  for (double p : p_sorted) {
    if (p < 0.0 || p > prev + 1e-12)
      throw std::invalid_argument("lb_assoc_loss: p must be sorted non-increasing");
    prev = p;
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("lb_assoc_loss: p must sum to 1");
  const double log_m = std::log(m_outputs);
  const auto boundary = static_cast<std::size_t>(std::ceil(bits_b / log_m - 1e-12));
  double tail = 0.0;
  for (std::size_t x = boundary + 1; x <= p_sorted.size(); ++x) tail += p_sorted[x - 1];
  return log_m * tail;
}

double lb_power_law_slope(std::span<const double> b_grid, double alpha, std::size_t n) {
  if (alpha <= 1.0) throw std::invalid_argument("lb_power_law_slope: alpha must be > 1");
  if (b_grid.size() < 2)
    throw std::invalid_argument("lb_power_law_slope: need at least 2 grid points");
  std::vector<double> p(n);
  double z = 0.0;
  for (std::size_t x = 1; x <= n; ++x) {
    p[x - 1] = std::pow(static_cast<double>(x), -alpha);
    z += p[x - 1];
  }
  for (double& v : p) v /= z;
  const double m_outputs = std::exp(1.0);  // log M = 1: bound counts bits directly
  std::vector<double> vals(b_grid.size());
  for (std::size_t i = 0; i < b_grid.size(); ++i)
    vals[i] = lb_assoc_loss(b_grid[i], m_outputs, p);
  return loglog_slope(b_grid, vals);
}

double lb_factual_bits(std::size_t s, std::size_t r, std::size_t d, std::size_t v,
                       double c) {
  if (v < 2 * r * d)
    throw std::invalid_argument("lb_factual_bits: requires |V| >= 2RD");
  if (c <= 0.0 || c >= 1.0)
    throw std::invalid_argument("lb_factual_bits: c must be in (0, 1)");
  const double sd = static_cast<double>(s) * static_cast<double>(r) *
                    std::log(static_cast<double>(d));
  const double rd = (1.0 - c) * static_cast<double>(r) * static_cast<double>(d) *
                    std::log(static_cast<double>(v) / static_cast<double>(d));
  return sd + rd;
}

double compare_capacity(double measured_param_bits, double bound_nats) {
  if (measured_param_bits <= 0.0 || bound_nats <= 0.0)
    throw std::invalid_argument("compare_capacity: inputs must be positive");
  const double bound_bits = bound_nats / std::log(2.0);
  return measured_param_bits / bound_bits;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope: need matching arrays, size >= 2");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0)
      throw std::invalid_argument("loglog_slope: values must be positive");
    double lx = std::log(x[i]);
    double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("loglog_slope: degenerate grid");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace recall
