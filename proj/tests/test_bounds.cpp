#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <algorithm>

#include "recall/bounds.hpp"
#include "recall/rng.hpp"

using namespace recall;

TEST_CASE("associative-memory loss bound endpoints") {
  std::vector<double> uniform(16, 1.0 / 16.0);
  const double m = 8.0;
  CHECK(lb_assoc_loss(0.0, m, uniform) == doctest::Approx(std::log(m)).epsilon(1e-12));
  CHECK(lb_assoc_loss(16.0 * std::log(m), m, uniform) == 0.0);
  CHECK(lb_assoc_loss(17.0 * std::log(m), m, uniform) == 0.0);

  // N = 4 uniform, log M = 1, B = 2 -> p(3) + p(4) = 0.5
  std::vector<double> four(4, 0.25);
  CHECK(lb_assoc_loss(2.0, std::exp(1.0), four) == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<double> unsorted{0.2, 0.5, 0.3};
  CHECK_THROWS_AS(lb_assoc_loss(1.0, 4.0, unsorted), std::invalid_argument);
}

TEST_CASE("bound is monotone in B and under tailward mass moves") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 6 + rng.next_below(10);
    std::vector<double> p(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.next_double() + 0.01;
      z += p[i];
    }
    for (double& v : p) v /= z;
    std::sort(p.rbegin(), p.rend());
    double prev = 1e300;
    for (double b = 0.0; b < static_cast<double>(n) * std::log(4.0) + 1.0; b += 0.7) {
      double v = lb_assoc_loss(b, 4.0, p);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
    // move mass from the head to the tail (still sorted): bound cannot drop
    std::vector<double> q = p;
    double delta = std::min(q[0] - q[1], q[0] * 0.1);
    q[0] -= delta;
    q[n - 1] += delta;
    std::sort(q.rbegin(), q.rend());
    double b = std::log(4.0) * 2.0;
    CHECK(lb_assoc_loss(b, 4.0, q) >= lb_assoc_loss(b, 4.0, p) - 1e-12);
  }
}

TEST_CASE("power-law slope matches 1 - alpha") {
  std::vector<double> grid;
  for (double b = 100.0; b <= 10000.0; b *= 1.5) grid.push_back(b);
  double slope = lb_power_law_slope(grid, 2.0, 1000000);
  CHECK(std::abs(slope - (-1.0)) < 0.1);

  CHECK_THROWS_AS(lb_power_law_slope(std::vector<double>{100.0}, 2.0, 1000),
                  std::invalid_argument);
  CHECK_THROWS_AS(lb_power_law_slope(grid, 1.0, 1000), std::invalid_argument);
}

TEST_CASE("factual bits bound") {
  // D = 1: first term vanishes, bound = (1-c) R log V
  CHECK(lb_factual_bits(10, 3, 1, 100, 0.5) ==
        doctest::Approx(0.5 * 3.0 * std::log(100.0)).epsilon(1e-12));

  double expected = 1024.0 * std::log(8.0) + 0.5 * 256.0 * std::log(64.0);
  CHECK(lb_factual_bits(32, 32, 8, 512, 0.5) == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(lb_factual_bits(32, 32, 8, 511, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(lb_factual_bits(32, 32, 8, 512, 1.0), std::invalid_argument);
}

TEST_CASE("factual bound is monotone in S, R, D inside the validity region") {
  const std::size_t v = 4096;
  for (std::size_t s = 8; s <= 32; s *= 2)
    for (std::size_t r = 4; r <= 16; r *= 2)
      for (std::size_t d = 2; d <= 8; d *= 2) {
        double base = lb_factual_bits(s, r, d, v, 0.5);
        CHECK(lb_factual_bits(s + 1, r, d, v, 0.5) > base);
        CHECK(lb_factual_bits(s, r + 1, d, v, 0.5) > base);
        CHECK(lb_factual_bits(s, r, d + 1, v, 0.5) > base);
      }
}

TEST_CASE("capacity comparison ratio") {
  CHECK_THROWS_AS(compare_capacity(0.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(compare_capacity(10.0, 0.0), std::invalid_argument);
  // measured bits equal to the bound in bits -> ratio 1
  double nats = 100.0;
  CHECK(compare_capacity(nats / std::log(2.0), nats) == doctest::Approx(1.0));
}

TEST_CASE("log-log slope helper") {
  std::vector<double> x{1.0, 2.0, 4.0, 8.0};
  std::vector<double> y{3.0, 6.0, 12.0, 24.0};
  CHECK(loglog_slope(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> y2{3.0, 3.0 / 4.0, 3.0 / 16.0, 3.0 / 64.0};
  CHECK(loglog_slope(x, y2) == doctest::Approx(-2.0).epsilon(1e-12));
}
