#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "recall/embeddings.hpp"
#include "recall/hermite.hpp"
#include "recall/matrix.hpp"
#include "recall/train_config.hpp"

namespace recall {

// Ground truth f*: [N] -> [M].
struct AssociationMap {
  std::size_t n_inputs = 0;
  std::size_t n_outputs = 0;
  std::vector<std::size_t> targets;

  static AssociationMap identity(std::size_t n);
  static AssociationMap modulo(std::size_t n, std::size_t m);  // f*(x) = x mod m

  bool injective() const;
  std::size_t operator()(std::size_t x) const { return targets[x]; }
};

// W e_x with optional low-rank factorization (left: d x m, right: m x d).
struct LinearAM {
  Matrix w;
  std::optional<std::pair<Matrix, Matrix>> factors;

  Vector apply(std::span<const double> e) const;
};

// Linearized (NTK) two-layer memory: F(e) = sum_i v_i sigma'(<w_i,e>) <q_i,e>.
struct MlpNtkAM {
  std::size_t width = 0;
  Matrix w_rows;  // m x d, Gaussian
  Matrix v_rows;  // m x d, Gaussian
  Matrix q_rows;  // m x d, tangent rows
  PolyActivation sigma;
  int hermite_k = 0;

  Vector apply(std::span<const double> e) const;
};

// Trained two-layer net F(e) = V^T relu(W e).
struct TrainedMlpAM {
  std::size_t width = 0;
  Matrix w;  // m x d
  Matrix v;  // m x d

  Vector apply(std::span<const double> e) const;
};

// W = sum_x u_{f*(x)} e_x^T. Rejects non-injective maps.
LinearAM build_linear(const AssociationMap& map, const EmbeddingTable& e,
                      const EmbeddingTable& u);

// W = (1/m) sum_x u_{f*(x)} e_x^T sum_i v_i v_i^T, stored factored.
LinearAM build_lowrank(const AssociationMap& map, const EmbeddingTable& e,
                       const EmbeddingTable& u, std::size_t m, std::uint64_t seed);

// Round weights to the nearest multiple of eps. Returns the rounded memory
// and the bits needed per weight for the [-N, N] grid, ceil(log2(2N/eps + 1)).
std::pair<LinearAM, int> quantize_linear(const LinearAM& am, double eps,
                                         std::size_t n_inputs);

// NTK construction: q_i = (1/m) sum_z h_k(<e_z, w_i>) <v_i, u_{f*(z)}> e_z,
// negated when the k-th Hermite coefficient of sigma' is negative. k must be
// even and >= 2; sigma must have nonzero Hermite coefficients through k+1.
MlpNtkAM build_mlp_ntk(const AssociationMap& map, const EmbeddingTable& e,
                       const EmbeddingTable& u, std::size_t m, int k,
                       const PolyActivation& sigma, std::uint64_t seed);

// gamma_xy = (u_{f*(x)} - u_y)^T F(e_x), y != f*(x).
template <class Am>
double margin(const Am& am, const AssociationMap& map, const EmbeddingTable& e,
              const EmbeddingTable& u, std::size_t x, std::size_t y) {
  if (y == map(x)) throw std::invalid_argument("margin: y equals f*(x)");
  Vector out = am.apply(e.row(x));
  return dot(u.row(map(x)), out) - dot(u.row(y), out);
}

// Exhaustive argmax accuracy over x in [N].
template <class Am>
double am_accuracy(const Am& am, const AssociationMap& map, const EmbeddingTable& e,
                   const EmbeddingTable& u) {
  if (map.n_inputs == 0) throw std::invalid_argument("am_accuracy: empty map");
  std::size_t correct = 0;
  for (std::size_t x = 0; x < map.n_inputs; ++x) {
    Vector out = am.apply(e.row(x));
    if (decode_argmax(out, u) == map(x)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(map.n_inputs);
}

struct AmTrainHistory {
  struct Row {
    int step;
    double loss;
    double accuracy;
  };
  std::vector<Row> rows;
  double best_accuracy = 0.0;
  bool stored = false;
  bool diverged = false;
};

// Full-batch cross-entropy training of the two-layer net (relu, Adam,
// 1/sqrt(d) init). Single learning rate: the associative-memory protocol
// trains at lr 1e-2.
std::pair<TrainedMlpAM, AmTrainHistory> train_mlp_am(
    const AssociationMap& map, const EmbeddingTable& e, const EmbeddingTable& u,
    std::size_t m, const TrainConfig& config, double lr = 1e-2);

struct CapacityProbe {
  std::size_t n;
  std::uint64_t seed;
  double accuracy;
  bool stored;
  double wall_ms;
};

struct CapacityResult {
  std::optional<std::size_t> capacity;  // nullopt: nothing in range stored
  std::vector<CapacityProbe> probes;
};

// Binary search over a sorted candidate grid. Each probe runs up to
// seeds_per_probe trials (majority decides, short-circuited); trial seeds are
// derived from (seed_base, n, trial).
CapacityResult capacity_search(
    const std::function<double(std::size_t n, std::uint64_t seed)>& accuracy_fn,
    std::span<const std::size_t> n_grid, double acc_threshold,
    int seeds_per_probe, std::uint64_t seed_base);

}  // namespace recall
