#include <doctest.h>

#include <cmath>

#include "recall/errors.hpp"
#include "recall/numerics.hpp"
#include "recall/rng.hpp"

using namespace recall;

TEST_CASE("softmax basics") {
  Vector two = softmax(Vector{0.0, 0.0});
  CHECK(two[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(two[1] == doctest::Approx(0.5).epsilon(1e-14));

  Vector big = softmax(Vector{1000.0, 0.0});
  CHECK(std::isfinite(big[0]));
  CHECK(big[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(big[1] == doctest::Approx(0.0).epsilon(1e-12));

  // exp/sum evaluated directly: exp(ln k) = k
  Vector logs = softmax(Vector{std::log(1.0), std::log(2.0), std::log(3.0)});
  CHECK(logs[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(logs[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-13));
  CHECK(logs[2] == doctest::Approx(3.0 / 6.0).epsilon(1e-13));

  CHECK_THROWS_AS(softmax(Vector{}), std::invalid_argument);
}

TEST_CASE("softmax properties: normalization and shift invariance") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 1 + rng.next_below(12);
    Vector v(n);
    for (double& x : v) x = 10.0 * (rng.next_double() - 0.5);
    Vector p = softmax(v);
    double sum = 0.0;
    for (double x : p) {
      CHECK(x > 0.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    double c = 100.0 * (rng.next_double() - 0.5);
    Vector shifted = v;
    for (double& x : shifted) x += c;
    Vector q = softmax(shifted);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(p[i] - q[i]) < 1e-12);
  }
}

TEST_CASE("cross entropy values") {
  Vector uniform(8, 1.23);
  CHECK(cross_entropy(uniform, 3) == doctest::Approx(std::log(8.0)).epsilon(1e-14));

  Vector u32(32, -0.5);
  CHECK(cross_entropy(u32, 0) == doctest::Approx(std::log(32.0)).epsilon(1e-13));
  CHECK(std::log(32.0) == doctest::Approx(3.4657359028).epsilon(1e-9));

  // direct evaluation of -log(e^5 / (e^5 + 2))
  Vector v{5.0, 0.0, 0.0};
  double expected = -std::log(std::exp(5.0) / (std::exp(5.0) + 2.0));
  CHECK(cross_entropy(v, 0) == doctest::Approx(expected).epsilon(1e-13));

  CHECK_THROWS_AS(cross_entropy(v, 3), std::invalid_argument);
  CHECK(cross_entropy(v, 1) >= 0.0);
}

TEST_CASE("cross entropy lower bound at the argmax") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t n = 2 + rng.next_below(10);
    Vector v(n);
    for (double& x : v) x = 4.0 * (rng.next_double() - 0.5);
    Vector p = softmax(v);
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (p[i] > p[argmax]) argmax = i;
    double floor = -std::log(p[argmax]);
    for (std::size_t t = 0; t < n; ++t) {
      double ce = cross_entropy(v, t);
      CHECK(ce >= floor - 1e-12);
      if (t == argmax) CHECK(ce == doctest::Approx(floor).epsilon(1e-12));
    }
  }
}

TEST_CASE("finite difference gradient oracle") {
  auto half_norm2 = [](const Vector& t) {
    double s = 0.0;
    for (double x : t) s += x * x;
    return 0.5 * s;
  };
  Vector g = finite_diff_grad(half_norm2, Vector{1.0, 2.0}, 1e-5);
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-9));

  auto constant = [](const Vector&) { return 3.5; };
  Vector zero = finite_diff_grad(constant, Vector{0.3, -0.7, 2.0}, 1e-5);
  for (double x : zero) CHECK(x == 0.0);

  // softmax gradient identity p - onehot at the origin
  auto ce0 = [](const Vector& t) { return cross_entropy(t, 0); };
  Vector gce = finite_diff_grad(ce0, Vector{0.0, 0.0}, 1e-5);
  CHECK(std::abs(gce[0] - (-0.5)) < 1e-8);
  CHECK(std::abs(gce[1] - 0.5) < 1e-8);

  auto blowup = [](const Vector& t) { return std::log(t[0]); };
  CHECK_THROWS_AS(finite_diff_grad(blowup, Vector{0.0}, 1e-5), NumericError);
}

TEST_CASE("rng reproducibility and stream independence") {
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 10000; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(42, 4);
  int same = 0;
  Rng a2(42, 3);
  for (int i = 0; i < 1000; ++i) same += (a2.next_u64() == c.next_u64());
  CHECK(same == 0);

  Rng d(1);
  for (int i = 0; i < 1000; ++i) {
    double u = d.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(d.next_below(17) < 17);
  }

  // split streams are deterministic functions of (seed, parent stream, index)
  Rng p(9, 1);
  Rng s1 = p.split(5);
  Rng s2 = Rng(9, 1).split(5);
  for (int i = 0; i < 100; ++i) CHECK(s1.next_u64() == s2.next_u64());
}

TEST_CASE("rng gaussian moments") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = rng.next_gaussian();
    sum += g;
    sum2 += g * g;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 6.0 / std::sqrt(static_cast<double>(n)));
}
