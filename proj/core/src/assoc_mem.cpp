#include "recall/assoc_mem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "recall/adam.hpp"
#include "recall/errors.hpp"
#include "recall/numerics.hpp"
#include "recall/rng.hpp"

namespace recall {

AssociationMap AssociationMap::identity(std::size_t n) {
  AssociationMap m{n, n, std::vector<std::size_t>(n)};
  for (std::size_t x = 0; x < n; ++x) m.targets[x] = x;
  return m;
}

AssociationMap AssociationMap::modulo(std::size_t n, std::size_t mod) {
  AssociationMap m{n, mod, std::vector<std::size_t>(n)};
  for (std::size_t x = 0; x < n; ++x) m.targets[x] = x % mod;
  return m;
}

bool AssociationMap::injective() const {
  std::vector<bool> seen(n_outputs, false);
  for (std::size_t y : targets) {
    if (y >= n_outputs || seen[y]) return false;
    seen[y] = true;
  }
  return true;
}

Vector LinearAM::apply(std::span<const double> e) const {
  if (factors) {
    const auto& [left, right] = *factors;
    Vector mid(right.rows());
    matvec(right, e, mid);
    Vector out(left.rows());
    matvec(left, mid, out);
    return out;
  }
  Vector out(w.rows());
  matvec(w, e, out);
  return out;
}

Vector MlpNtkAM::apply(std::span<const double> e) const {
  Vector out(w_rows.cols(), 0.0);
  for (std::size_t i = 0; i < width; ++i) {
    double a = sigma.deriv(dot(w_rows.row_span(i), e)) * dot(q_rows.row_span(i), e);
    if (a != 0.0) axpy(a, v_rows.row_span(i), out);
  }
  return out;
}

Vector TrainedMlpAM::apply(std::span<const double> e) const {
  Vector out(w.cols(), 0.0);
  for (std::size_t i = 0; i < width; ++i) {
    double pre = dot(w.row_span(i), e);
    if (pre > 0.0) axpy(pre, v.row_span(i), out);
  }
  return out;
}

namespace {

void check_shapes(const AssociationMap& map, const EmbeddingTable& e,
                  const EmbeddingTable& u) {
  if (e.n_tokens < map.n_inputs)
    throw std::invalid_argument("assoc_mem: embedding table smaller than N");
  if (u.n_tokens < map.n_outputs)
    throw std::invalid_argument("assoc_mem: unembedding table smaller than M");
  if (e.dim != u.dim)
    throw std::invalid_argument("assoc_mem: embedding dim mismatch");
}

}  // namespace

LinearAM build_linear(const AssociationMap& map, const EmbeddingTable& e,
                      const EmbeddingTable& u) {
  check_shapes(map, e, u);
  if (!map.injective())
    throw std::invalid_argument("build_linear: f* must be injective");
  const std::size_t d = e.dim;
  LinearAM am;
  am.w = Matrix(d, d);
  for (std::size_t x = 0; x < map.n_inputs; ++x) {
    std::span<const double> ux = u.row(map(x));
    std::span<const double> ex = e.row(x);
    for (std::size_t i = 0; i < d; ++i) {
      double c = ux[i];
      double* row = am.w.row(i);
      for (std::size_t j = 0; j < d; ++j) row[j] += c * ex[j];
    }
  }
  return am;
}

LinearAM build_lowrank(const AssociationMap& map, const EmbeddingTable& e,
                       const EmbeddingTable& u, std::size_t m, std::uint64_t seed) {
  check_shapes(map, e, u);
  if (!map.injective())
    throw std::invalid_argument("build_lowrank: f* must be injective");
  if (m == 0) throw std::invalid_argument("build_lowrank: rank must be >= 1");
  const std::size_t d = e.dim;
  Rng rng(seed);
  Matrix right(m, d);  // rows v_i^T
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) right(i, j) = rng.next_gaussian();
  // left = (1/m) sum_x u_{f*(x)} (e_x^T V^T) : d x m. The 1/m keeps entries
  // O(1); argmax decoding is scale-invariant.
  Matrix left(d, m);
  for (std::size_t x = 0; x < map.n_inputs; ++x) {
    std::span<const double> ex = e.row(x);
    std::span<const double> ux = u.row(map(x));
    Vector proj(m);
    matvec(right, ex, proj);
    for (std::size_t i = 0; i < d; ++i) {
      double c = ux[i] / static_cast<double>(m);
      double* row = left.row(i);
      for (std::size_t j = 0; j < m; ++j) row[j] += c * proj[j];
    }
  }
  LinearAM am;
  am.w = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      double c = left(i, k);
      if (c == 0.0) continue;
      const double* rr = right.row(k);
      double* wr = am.w.row(i);
      for (std::size_t j = 0; j < d; ++j) wr[j] += c * rr[j];
    }
  am.factors = std::make_pair(std::move(left), std::move(right));
  return am;
}

std::pair<LinearAM, int> quantize_linear(const LinearAM& am, double eps,
                                         std::size_t n_inputs) {
  if (eps <= 0.0) throw std::invalid_argument("quantize_linear: eps must be > 0");
  LinearAM q;
  q.w = am.w;
  for (double& v : q.w.flat()) v = std::round(v / eps) * eps;
  // Weights live in [-N, N]; the grid has 2N/eps + 1 levels.
  double levels = 2.0 * static_cast<double>(n_inputs) / eps + 1.0;
  int bits = static_cast<int>(std::ceil(std::log2(levels)));
  return {std::move(q), bits};
}

MlpNtkAM build_mlp_ntk(const AssociationMap& map, const EmbeddingTable& e,
                       const EmbeddingTable& u, std::size_t m, int k,
                       const PolyActivation& sigma, std::uint64_t seed) {
  check_shapes(map, e, u);
  if (m == 0) throw std::invalid_argument("build_mlp_ntk: width must be >= 1");
  if (k < 2 || k % 2 != 0)
    throw std::invalid_argument("build_mlp_ntk: k must be even and >= 2");
  if (sigma.degree() < k + 1 || !sigma.nonzero_hermite_coeffs(k + 1))
    throw std::invalid_argument(
        "build_mlp_ntk: sigma needs nonzero Hermite coefficients through k+1");
  const std::size_t d = e.dim;
  MlpNtkAM am{m, Matrix(m, d), Matrix(m, d), Matrix(m, d), sigma, k};
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) am.w_rows(i, j) = rng.next_gaussian();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) am.v_rows(i, j) = rng.next_gaussian();
  // Sign convention from the construction: flip q_i when the k-th Hermite
  // coefficient of sigma' is negative so margins come out positive.
  double bk = sigma.deriv_hermite_coeffs()[k];
  double flip = bk < 0.0 ? -1.0 : 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    std::span<double> qi = am.q_rows.row_span(i);
    for (std::size_t x = 0; x < map.n_inputs; ++x) {
      double c = hermite_ortho(k, dot(e.row(x), am.w_rows.row_span(i))) *
                 dot(am.v_rows.row_span(i), u.row(map(x)));
      axpy(flip * c / static_cast<double>(m), e.row(x), qi);
    }
  }
  return am;
}

std::pair<TrainedMlpAM, AmTrainHistory> train_mlp_am(
    const AssociationMap& map, const EmbeddingTable& e, const EmbeddingTable& u,
    std::size_t m, const TrainConfig& config, double lr) {
  check_shapes(map, e, u);
  if (!config.valid()) throw std::invalid_argument("train_mlp_am: bad config");
  const std::size_t d = e.dim;
  const std::size_t n = map.n_inputs;
  const std::size_t n_out = map.n_outputs;

  TrainedMlpAM net{m, Matrix(m, d), Matrix(m, d)};
  Rng rng(config.seed);
  const double init_sd = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& v : net.w.flat()) v = init_sd * rng.next_gaussian();
  for (double& v : net.v.flat()) v = init_sd * rng.next_gaussian();

  AdamOptimizer opt(config.beta1, config.beta2, config.adam_eps);
  opt.add_block(net.w.size());
  opt.add_block(net.v.size());

  AmTrainHistory hist;
  Matrix inputs(n, d);
  for (std::size_t x = 0; x < n; ++x)
    std::copy_n(e.row(x).data(), d, inputs.row(x));
  Matrix gw(m, d), gv(m, d);
  Matrix pre(n, m), hid(n, m), f(n, d), logits(n, n_out), df(n, d), dhid(n, m);

  auto evaluate = [&]() { return am_accuracy(net, map, e, u); };

  double acc = evaluate();
  hist.best_accuracy = acc;
  hist.rows.push_back({0, std::log(static_cast<double>(n_out)), acc});

  // Full batch; all dense work goes through the blocked kernels, and the
  // logits of the current step double as the exhaustive accuracy evaluation.
  for (int step = 1; step <= config.steps; ++step) {
    gemm_nt(inputs, net.w, pre);
    hid = pre;
    for (double& v : hid.flat()) v = std::max(0.0, v);
    gemm_nn(hid, net.v, f);
    gemm_nt(f, u.vectors, logits);

    double loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t x = 0; x < n; ++x) {
      std::span<double> row = logits.row_span(x);
      std::size_t best = 0;
      for (std::size_t y = 1; y < n_out; ++y)
        if (row[y] > row[best]) best = y;
      correct += best == map(x);
      loss += cross_entropy(row, map(x));
      softmax_inplace(row);
      row[map(x)] -= 1.0;
    }
    loss /= static_cast<double>(n);
    acc = static_cast<double>(correct) / static_cast<double>(n);
    hist.best_accuracy = std::max(hist.best_accuracy, acc);
    if (!std::isfinite(loss)) {
      hist.diverged = true;
      break;
    }
    if (config.early_stop && hist.best_accuracy >= config.acc_threshold) {
      hist.rows.push_back({step, loss, acc});
      break;
    }

    gemm_nn(logits, u.vectors, df);
    gv.fill(0.0);
    gemm_tn_acc(hid, df, gv);
    gemm_nt(df, net.v, dhid);
    for (std::size_t i = 0; i < dhid.size(); ++i)
      if (pre.data()[i] <= 0.0) dhid.data()[i] = 0.0;
    gw.fill(0.0);
    gemm_tn_acc(dhid, inputs, gw);

    double inv_n = 1.0 / static_cast<double>(n);
    for (double& g : gw.flat()) g *= inv_n;
    for (double& g : gv.flat()) g *= inv_n;
    opt.begin_step();
    opt.update(0, net.w.flat(), gw.flat(), lr);
    opt.update(1, net.v.flat(), gv.flat(), lr);

    if (step % config.eval_interval == 0 || step == config.steps) {
      hist.rows.push_back({step, loss, acc});
      if (config.early_stop && hist.best_accuracy >= config.acc_threshold) break;
    }
  }
  hist.stored = hist.best_accuracy >= config.acc_threshold;
  return {std::move(net), std::move(hist)};
}

CapacityResult capacity_search(
    const std::function<double(std::size_t, std::uint64_t)>& accuracy_fn,
    std::span<const std::size_t> n_grid, double acc_threshold,
    int seeds_per_probe, std::uint64_t seed_base) {
  if (n_grid.empty()) throw std::invalid_argument("capacity_search: empty grid");
  CapacityResult result;
  auto probe = [&](std::size_t n) {
    int succ = 0, fail = 0;
    const int need = seeds_per_probe / 2 + 1;
    for (int trial = 0; trial < seeds_per_probe; ++trial) {
      Rng ids(seed_base, n * 131 + static_cast<std::uint64_t>(trial));
      std::uint64_t trial_seed = ids.next_u64();
      auto t0 = std::chrono::steady_clock::now();
      double acc = accuracy_fn(n, trial_seed);
      double ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
      bool stored = acc >= acc_threshold;
      result.probes.push_back({n, trial_seed, acc, stored, ms});
      (stored ? succ : fail) += 1;
      if (succ >= need || fail >= need) break;
    }
    return succ > fail;
  };
  // Monotone-success binary search over the sorted grid.
  std::size_t lo = 0, hi = n_grid.size();  // [lo, hi): untested region
  std::optional<std::size_t> best;
  if (!probe(n_grid[0])) return result;
  best = n_grid[0];
  lo = 1;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (probe(n_grid[mid])) {
      best = n_grid[mid];
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  result.capacity = best;
  return result;
}

}  // namespace recall
