#pragma once

#include <vector>

#include "recall/matrix.hpp"

namespace recall {

// Probabilists' Hermite machinery. Two conventions are exposed and named
// explicitly: hermite_ortho returns the orthonormal basis h_k = He_k/sqrt(k!)
// (used by the NTK memory construction), while the tensor contractions below
// use the unnormalized He_k tensors (used by the trigram MLP construction).

// Orthonormal h_k(z), three-term recurrence.
double hermite_ortho(int k, double z);
// Unnormalized He_k(z).
double hermite_he(int k, double z);
// Monomial coefficients of He_k (index = power).
std::vector<double> hermite_he_monomials(int k);

// E[Z^j] for Z ~ N(0,1): (j-1)!! for even j, 0 for odd.
double gaussian_moment(int j);

// Hermite coefficients c_k = E[sigma(Z) h_k(Z)], k = 0..deg(sigma), computed
// exactly from Gaussian moments of the monomial expansion.
std::vector<double> hermite_coefficients(const std::vector<double>& monomial_coeffs);

// Polynomial activation sigma with its Hermite decomposition and derivative.
class PolyActivation {
 public:
  explicit PolyActivation(std::vector<double> monomial_coeffs);

  // sigma(z) = sum_{k=0}^{q} h_k(z); every Hermite coefficient equals 1.
  static PolyActivation hermite_sum(int degree);

  int degree() const { return static_cast<int>(mono_.size()) - 1; }
  double operator()(double z) const;
  double deriv(double z) const;

  const std::vector<double>& monomial_coeffs() const { return mono_; }
  const std::vector<double>& hermite_coeffs() const { return herm_; }
  const std::vector<double>& deriv_monomial_coeffs() const { return dmono_; }
  // Hermite coefficients of sigma'.
  std::vector<double> deriv_hermite_coeffs() const;

  // All c_k nonzero for k <= up_to (the nondegeneracy the NTK construction
  // needs from its activation).
  bool nonzero_hermite_coeffs(int up_to, double tol = 1e-12) const;

 private:
  std::vector<double> mono_, herm_, dmono_;
};

// <He_n(x), a_1 (x) ... (x) a_n> by the two-term recurrence on the factor
// list. Intended for small n with distinct factors; the two-vector case below
// is the memoized fast path. Throws std::invalid_argument on a dimension
// mismatch.
double hermite_tensor_contract(const Vector& x, const std::vector<Vector>& factors);

// <He_{p+k}(x), u^{(x)p} (x) v^{(x)k}> via an O(p k) dynamic program over the
// recurrence states; inputs are the five inner products the recurrence sees.
double hermite_pair_contract(double xu, double xv, double uu, double vv,
                             double uv, int p, int k);
double hermite_pair_contract(const Vector& x, const Vector& u, int p,
                             const Vector& v, int k);

}  // namespace recall
