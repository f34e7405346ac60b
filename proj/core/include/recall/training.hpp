#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "recall/embeddings.hpp"
#include "recall/factual_task.hpp"
#include "recall/train_config.hpp"
#include "recall/transformer.hpp"

namespace recall {

// Model family (alpha, beta, H): H d_h = alpha d, m = beta d; total parameter
// count (4 alpha + 2 beta) d^2.
struct ShapeSpec {
  double alpha = 1.0;
  double beta_shape = 4.0;
  std::size_t H = 8;

  // nullopt when alpha d / H is not a positive integer.
  std::optional<TransformerHyper> instantiate(std::size_t d) const;
};

struct TfGradients {
  std::vector<Matrix> wk, wq, wv, wo;
  Matrix mlp_w, mlp_v;

  static TfGradients zeros(const TransformerHyper& hyper);
  void reset();
  void scale(double c);
};

// Mean cross-entropy over the batch of <phi(z), F_TF(X)> logits against
// z_{T+1}, with reverse-accumulated gradients for every trainable matrix.
// Embeddings receive no gradient. Throws NumericError on a non-finite loss.
double loss_and_grads(const TransformerParams& params,
                      std::span<const Sequence> batch, const EmbeddingTable& emb,
                      TfGradients& grads);

struct TrainHistoryRow {
  int step;
  double loss;
  double acc;
};

struct TfTrainResult {
  TransformerParams params;
  std::vector<TrainHistoryRow> history;
  double best_acc = 0.0;
  bool diverged = false;
};

// Online training: an independent batch is sampled at every step; accuracy is
// evaluated exhaustively over (s, r) with fresh noise fillings at every
// eval_interval. Gaussian 1/sqrt(d) init on every weight matrix.
TfTrainResult train_transformer(const FactDictionary& dict, const EmbeddingTable& emb,
                                const TransformerHyper& hyper, const TrainConfig& config,
                                double lr, std::uint64_t run_seed, std::size_t T);

struct LrSweepOutcome {
  double best_acc = 0.0;
  double best_lr = 0.0;
  std::vector<std::pair<double, double>> per_lr;  // (lr, best acc)
  bool stored = false;
};

// Sweep config.lrs (largest first) and keep the best-performing model's
// accuracy; stops early once a rate reaches the storage threshold.
LrSweepOutcome train_with_lr_sweep(const FactDictionary& dict, const EmbeddingTable& emb,
                                   const TransformerHyper& hyper, const TrainConfig& config,
                                   std::size_t T, std::uint64_t run_seed);

struct FactCapacityRow {
  double alpha, beta_shape;
  std::size_t H, d, D, SR;
  std::uint64_t seed;
  double best_acc;
  bool stored;
};

struct FactCapacityResult {
  std::optional<std::size_t> max_sr;
  std::vector<FactCapacityRow> rows;
};

// Binary search over S (= R) values; a probe stores SR = S^2 facts when the
// majority of 3 seeded trials reach the accuracy threshold (each trial takes
// the best model over the learning-rate sweep).
FactCapacityResult fact_capacity_search(const ShapeSpec& shape, std::size_t d,
                                        std::size_t D, std::span<const std::size_t> s_grid,
                                        const TrainConfig& config, std::size_t T,
                                        AnswerAssignment assignment = AnswerAssignment::kUniform);

struct TradeoffCell {
  std::size_t h_dh;  // attention size H d_h
  std::size_t m;
  double best_acc;
};

// Fixed dictionary; grid over attention size and MLP width at fixed d and H.
// Duplicate cells are evaluated once.
std::vector<TradeoffCell> tradeoff_sweep(const FactDictionary& dict,
                                         const EmbeddingTable& emb, std::size_t d,
                                         std::size_t H,
                                         std::span<const std::size_t> h_dh_grid,
                                         std::span<const std::size_t> m_grid,
                                         const TrainConfig& config, std::size_t T);

}  // namespace recall
