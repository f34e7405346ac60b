#include "recall/hermite.hpp"

#include <cmath>
#include <stdexcept>

namespace recall {

double hermite_ortho(int k, double z) {
  if (k < 0) throw std::invalid_argument("hermite_ortho: negative degree");
  // h_{k+1} = (z h_k - sqrt(k) h_{k-1}) / sqrt(k+1)
  double hm = 0.0, h = 1.0;
  for (int j = 0; j < k; ++j) {
    double hn = (z * h - std::sqrt(static_cast<double>(j)) * hm) /
                std::sqrt(static_cast<double>(j + 1));
    hm = h;
    h = hn;
  }
  return h;
}

double hermite_he(int k, double z) {
  if (k < 0) throw std::invalid_argument("hermite_he: negative degree");
  double hm = 0.0, h = 1.0;
  for (int j = 0; j < k; ++j) {
    double hn = z * h - static_cast<double>(j) * hm;
    hm = h;
    h = hn;
  }
  return h;
}

std::vector<double> hermite_he_monomials(int k) {
  std::vector<double> prev = {1.0};
  if (k == 0) return prev;
  std::vector<double> cur = {0.0, 1.0};
  for (int j = 1; j < k; ++j) {
    // He_{j+1} = z He_j - j He_{j-1}
    std::vector<double> next(j + 2, 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
    for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= static_cast<double>(j) * prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

double gaussian_moment(int j) {
  if (j < 0) throw std::invalid_argument("gaussian_moment: negative power");
  if (j % 2 == 1) return 0.0;
  double m = 1.0;
  for (int i = j - 1; i > 1; i -= 2) m *= static_cast<double>(i);
  return m;
}

std::vector<double> hermite_coefficients(const std::vector<double>& monomial_coeffs) {
  const int q = static_cast<int>(monomial_coeffs.size()) - 1;
  std::vector<double> c(q + 1, 0.0);
  for (int k = 0; k <= q; ++k) {
    // c_k = E[sigma(Z) h_k(Z)] = sum_{j,i} a_j hk_i E[Z^{i+j}] / sqrt(k!)
    std::vector<double> hk = hermite_he_monomials(k);
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= static_cast<double>(i);
    double sum = 0.0;
    for (int j = 0; j <= q; ++j) {
      if (monomial_coeffs[j] == 0.0) continue;
      for (int i = 0; i <= k; ++i) {
        if (hk[i] == 0.0) continue;
        sum += monomial_coeffs[j] * hk[i] * gaussian_moment(i + j);
      }
    }
    c[k] = sum / std::sqrt(fact);
  }
  return c;
}

namespace {

double eval_poly(const std::vector<double>& coeffs, double z) {
  double v = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * z + *it;
  return v;
}

std::vector<double> deriv_coeffs(const std::vector<double>& coeffs) {
  if (coeffs.size() <= 1) return {0.0};
  std::vector<double> d(coeffs.size() - 1);
  for (std::size_t i = 1; i < coeffs.size(); ++i)
    d[i - 1] = static_cast<double>(i) * coeffs[i];
  return d;
}

}  // namespace

PolyActivation::PolyActivation(std::vector<double> monomial_coeffs)
    : mono_(std::move(monomial_coeffs)) {
  if (mono_.empty()) mono_ = {0.0};
  herm_ = hermite_coefficients(mono_);
  dmono_ = deriv_coeffs(mono_);
}

PolyActivation PolyActivation::hermite_sum(int degree) {
  if (degree < 1) throw std::invalid_argument("hermite_sum: degree must be >= 1");
  std::vector<double> mono(degree + 1, 0.0);
  for (int k = 0; k <= degree; ++k) {
    std::vector<double> hk = hermite_he_monomials(k);
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= static_cast<double>(i);
    double inv = 1.0 / std::sqrt(fact);
    for (int i = 0; i <= k; ++i) mono[i] += hk[i] * inv;
  }
  return PolyActivation(std::move(mono));
}

double PolyActivation::operator()(double z) const { return eval_poly(mono_, z); }
double PolyActivation::deriv(double z) const { return eval_poly(dmono_, z); }

std::vector<double> PolyActivation::deriv_hermite_coeffs() const {
  return hermite_coefficients(dmono_);
}

bool PolyActivation::nonzero_hermite_coeffs(int up_to, double tol) const {
  if (up_to > degree()) return false;
  for (int k = 0; k <= up_to; ++k)
    if (std::abs(herm_[k]) <= tol) return false;
  return true;
}

double hermite_tensor_contract(const Vector& x, const std::vector<Vector>& factors) {
  for (const auto& f : factors)
    if (f.size() != x.size())
      throw std::invalid_argument("hermite_tensor_contract: dimension mismatch");
  // <He_n, a_1..a_n> = <x,a_n><He_{n-1}, a_1..a_{n-1}>
  //                    - sum_{j<n} <a_j,a_n><He_{n-2}, a_1..a_{n-1} \ a_j>
  struct Rec {
    const Vector& x;
    const std::vector<Vector>& fs;
    double run(std::vector<int>& idx) {
      if (idx.empty()) return 1.0;
      int last = idx.back();
      idx.pop_back();
      double v = dot(fs[last], x) * run(idx);
      for (std::size_t j = 0; j < idx.size(); ++j) {
        int removed = idx[j];
        idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(j));
        v -= dot(fs[removed], fs[last]) * run(idx);
        idx.insert(idx.begin() + static_cast<std::ptrdiff_t>(j), removed);
      }
      idx.push_back(last);
      return v;
    }
  };
  std::vector<int> idx(factors.size());
  for (std::size_t i = 0; i < factors.size(); ++i) idx[i] = static_cast<int>(i);
  Rec rec{x, factors};
  return rec.run(idx);
}

double hermite_pair_contract(double xu, double xv, double uu, double vv,
                             double uv, int p, int k) {
  if (p < 0 || k < 0) throw std::invalid_argument("hermite_pair_contract: negative power");
  // f(i,j) = <He_{i+j}(x), u^i (x) v^j> with factor order (u..u, v..v);
  // peeling the last factor gives the O(p k) table below.
  std::vector<double> f((p + 1) * (k + 1), 0.0);
  auto at = [&](int i, int j) -> double& { return f[i * (k + 1) + j]; };
  at(0, 0) = 1.0;
  for (int i = 0; i <= p; ++i) {
    for (int j = 0; j <= k; ++j) {
      if (i == 0 && j == 0) continue;
      double t;
      if (j > 0) {
        t = xv * at(i, j - 1);
        if (j >= 2) t -= (j - 1) * vv * at(i, j - 2);
        if (i >= 1) t -= i * uv * at(i - 1, j - 1);
      } else {
        t = xu * at(i - 1, 0);
        if (i >= 2) t -= (i - 1) * uu * at(i - 2, 0);
      }
      at(i, j) = t;
    }
  }
  return at(p, k);
}

double hermite_pair_contract(const Vector& x, const Vector& u, int p,
                             const Vector& v, int k) {
  if (u.size() != x.size() || v.size() != x.size())
    throw std::invalid_argument("hermite_pair_contract: dimension mismatch");
  return hermite_pair_contract(dot(x, u), dot(x, v), dot(u, u), dot(v, v),
                               dot(u, v), p, k);
}

}  // namespace recall
