#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "recall/hermite.hpp"
#include "recall/rng.hpp"

using namespace recall;

namespace {

Vector random_unit(std::size_t d, Rng& rng) {
  Vector v(d);
  double n2 = 0.0;
  for (double& x : v) {
    x = rng.next_gaussian();
    n2 += x * x;
  }
  for (double& x : v) x /= std::sqrt(n2);
  return v;
}

// Full He_n(x) tensors from the derivative definition, hard-coded through
// n = 4, contracted against a list of factors. Independent of the recurrence
// implementation.
double brute_contract(const Vector& x, const std::vector<Vector>& f) {
  const std::size_t n = f.size();
  auto kron = [](std::size_t i, std::size_t j) { return i == j ? 1.0 : 0.0; };
  const std::size_t d = x.size();
  double total = 0.0;
  switch (n) {
    case 0:
      return 1.0;
    case 1:
      for (std::size_t i = 0; i < d; ++i) total += x[i] * f[0][i];
      return total;
    case 2:
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          total += (x[i] * x[j] - kron(i, j)) * f[0][i] * f[1][j];
      return total;
    case 3:
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          for (std::size_t k = 0; k < d; ++k) {
            double he = x[i] * x[j] * x[k] - x[i] * kron(j, k) -
                        x[j] * kron(i, k) - x[k] * kron(i, j);
            total += he * f[0][i] * f[1][j] * f[2][k];
          }
      return total;
    case 4:
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = 0; l < d; ++l) {
              double he = x[i] * x[j] * x[k] * x[l];
              he -= x[i] * x[j] * kron(k, l) + x[i] * x[k] * kron(j, l) +
                    x[i] * x[l] * kron(j, k) + x[j] * x[k] * kron(i, l) +
                    x[j] * x[l] * kron(i, k) + x[k] * x[l] * kron(i, j);
              he += kron(i, j) * kron(k, l) + kron(i, k) * kron(j, l) +
                    kron(i, l) * kron(j, k);
              total += he * f[0][i] * f[1][j] * f[2][k] * f[3][l];
            }
      return total;
    default:
      REQUIRE(false);
      return 0.0;
  }
}

}  // namespace

TEST_CASE("orthonormal hermite basics") {
  CHECK(hermite_ortho(0, 0.37) == 1.0);
  CHECK(hermite_ortho(1, 0.37) == doctest::Approx(0.37).epsilon(1e-15));
  // He_2(z) = z^2 - 1 vanishes at 1
  CHECK(hermite_ortho(2, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(hermite_he(2, 1.0) == doctest::Approx(0.0));
  CHECK(hermite_he(3, 2.0) == doctest::Approx(2.0));  // 8 - 6
}

TEST_CASE("monte carlo orthonormality of h_3") {
  Rng rng(5);
  const int n = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double h = hermite_ortho(3, rng.next_gaussian());
    double v = h * h;
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / n;
  double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) < 3.0 * se);
}

TEST_CASE("E[h_k(<u,X>) h_k(<w,X>)] = <u,w>^k") {
  Rng rng(17);
  const std::size_t d = 8;
  Vector u = random_unit(d, rng);
  Vector w = random_unit(d, rng);
  double uw = dot(u, w);
  const int n = 1000000;
  for (int k = 1; k <= 4; ++k) {
    double sum = 0.0, sum2 = 0.0;
    Rng draws(900 + k);
    Vector x(d);
    for (int i = 0; i < n; ++i) {
      for (double& c : x) c = draws.next_gaussian();
      double v = hermite_ortho(k, dot(u, x)) * hermite_ortho(k, dot(w, x));
      sum += v;
      sum2 += v * v;
    }
    double mean = sum / n;
    double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean - std::pow(uw, k)) < 4.0 * se);
  }
}

TEST_CASE("tensor contraction small cases") {
  Rng rng(3);
  Vector x = random_unit(5, rng);
  Vector a = random_unit(5, rng);
  Vector b = random_unit(5, rng);
  CHECK(hermite_tensor_contract(x, {a}) == doctest::Approx(dot(x, a)).epsilon(1e-14));
  CHECK(hermite_tensor_contract(x, {a, b}) ==
        doctest::Approx(dot(x, a) * dot(x, b) - dot(a, b)).epsilon(1e-13));
  CHECK(hermite_tensor_contract(x, {}) == 1.0);

  Vector bad(4, 0.0);
  CHECK_THROWS_AS(hermite_tensor_contract(x, {bad}), std::invalid_argument);
}

TEST_CASE("repeated unit factor reduces to the scalar polynomial") {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    Vector x(6), a = random_unit(6, rng);
    for (double& c : x) c = rng.next_gaussian();
    double via_tensor = hermite_tensor_contract(x, {a, a, a});
    double via_scalar = hermite_ortho(3, dot(x, a)) * std::sqrt(6.0);
    CHECK(via_tensor == doctest::Approx(via_scalar).epsilon(1e-10));
  }
}

TEST_CASE("pair contraction factorizes over orthogonal unit directions") {
  Rng rng(31);
  const std::size_t d = 9;
  Vector u = random_unit(d, rng);
  Vector v = random_unit(d, rng);
  // orthogonalize v against u
  axpy(-dot(u, v), u, v);
  double nv = norm2(v);
  for (double& c : v) c /= nv;
  for (int trial = 0; trial < 100; ++trial) {
    Vector x(d);
    for (double& c : x) c = rng.next_gaussian();
    for (int p = 0; p <= 4; ++p) {
      for (int k = 0; k <= 4; ++k) {
        double lhs = hermite_pair_contract(x, u, p, v, k);
        double rhs = hermite_he(p, dot(x, u)) * hermite_he(k, dot(x, v));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("recurrence matches the derivative-definition tensors") {
  Rng rng(41);
  for (std::size_t d = 2; d <= 4; ++d) {
    for (int n = 0; n <= 4; ++n) {
      Vector x(d);
      for (double& c : x) c = rng.next_gaussian();
      std::vector<Vector> factors;
      for (int i = 0; i < n; ++i) factors.push_back(random_unit(d, rng));
      double lhs = hermite_tensor_contract(x, factors);
      double rhs = brute_contract(x, factors);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
  // and the memoized pair path against the generic recursion
  Vector x(5), u = random_unit(5, rng), v = random_unit(5, rng);
  for (double& c : x) c = rng.next_gaussian();
  std::vector<Vector> list = {u, u, v, v, v};
  CHECK(hermite_pair_contract(x, u, 2, v, 3) ==
        doctest::Approx(hermite_tensor_contract(x, list)).epsilon(1e-11));
}

TEST_CASE("hermite coefficients from gaussian moments") {
  // sigma(z) = z^2: c0 = 1, c2 = sqrt(2)
  auto c = hermite_coefficients({0.0, 0.0, 1.0});
  CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(c[1] == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(c[2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));

  // sigma = h_3 expanded to monomials round-trips to the unit vector
  Vector h3 = hermite_he_monomials(3);
  for (double& v : h3) v /= std::sqrt(6.0);
  auto c3 = hermite_coefficients(h3);
  CHECK(std::abs(c3[0]) < 1e-12);
  CHECK(std::abs(c3[1]) < 1e-12);
  CHECK(std::abs(c3[2]) < 1e-12);
  CHECK(c3[3] == doctest::Approx(1.0).epsilon(1e-12));

  // 1 + z + z^2 + z^3 has every coefficient nonzero
  PolyActivation poly({1.0, 1.0, 1.0, 1.0});
  CHECK(poly.nonzero_hermite_coeffs(3));
}

TEST_CASE("hermite_sum activation has unit coefficients") {
  for (int q : {2, 4, 6}) {
    PolyActivation sigma = PolyActivation::hermite_sum(q);
    for (int k = 0; k <= q; ++k)
      CHECK(sigma.hermite_coeffs()[static_cast<std::size_t>(k)] ==
            doctest::Approx(1.0).epsilon(1e-11));
    // h_j' = sqrt(j) h_{j-1}: the derivative's k-th coefficient is sqrt(k+1)
    auto der = sigma.deriv_hermite_coeffs();
    for (int k = 0; k + 1 <= q; ++k)
      CHECK(der[static_cast<std::size_t>(k)] ==
            doctest::Approx(std::sqrt(static_cast<double>(k + 1))).epsilon(1e-11));
  }
}

TEST_CASE("poly activation evaluation and derivative") {
  PolyActivation p({1.0, -2.0, 0.5});  // 1 - 2z + z^2/2
  CHECK(p(2.0) == doctest::Approx(1.0 - 4.0 + 2.0));
  CHECK(p.deriv(2.0) == doctest::Approx(-2.0 + 2.0));
  CHECK(p.degree() == 2);
}
