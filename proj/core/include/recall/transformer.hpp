#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "recall/embeddings.hpp"
#include "recall/factual_task.hpp"
#include "recall/hermite.hpp"
#include "recall/matrix.hpp"

namespace recall {

struct TransformerHyper {
  std::size_t d = 0, H = 0, d_h = 0, m = 0;  // m = 0: attention-only

  std::size_t attention_params() const { return 4 * H * d * d_h; }
  std::size_t mlp_params() const { return 2 * m * d; }
  std::size_t total_params() const { return attention_params() + mlp_params(); }
};

enum class MlpKind : std::uint8_t { kRelu = 0, kPoly = 1 };

struct TransformerParams {
  TransformerHyper hyper;
  std::vector<Matrix> wk, wq, wv, wo;  // H matrices, each d_h x d
  Matrix mlp_w, mlp_v;                 // m x d
  MlpKind activation = MlpKind::kRelu;
  std::optional<PolyActivation> poly;

  static TransformerParams zeros(const TransformerHyper& hyper);
};

struct TfWorkspace {
  Vector q, kq, scores, attended, head_out, pre;
};

// F_TF(X) = F_MHSA(X) + V^T sigma(W F_MHSA(X)). X rows are the embedded
// sequence; the query is the last row (EOS position).
Vector tf_forward(const TransformerParams& params, const Matrix& x, TfWorkspace& ws);
Vector tf_forward(const TransformerParams& params, const Matrix& x);

// Factor a merged d x d matrix into (first, second), each d_h x d with
// first^T second == merged, via an orthonormal basis of the merged row space.
// Throws InfeasibleError when the numerical row rank exceeds d_h.
std::pair<Matrix, Matrix> factor_merged(const Matrix& merged, std::size_t d_h,
                                        double tol = 1e-9);

struct BlockStat {
  bool subject_side = true;
  std::vector<std::size_t> tokens;   // token ids in the block
  double filter_margin_in = 0.0;     // min_{z in blk} <v,phi(z)> - <v,phi(EOS)>
  double filter_margin_out = 0.0;    // <v,phi(EOS)> - max_{z not in blk} <v,phi(z')>
  double max_ov_deviation = 0.0;     // max |phi(a)^T OV phi(z) - 1(a in A_z)|
};

struct ConstructionReport {
  std::size_t block_size = 0;
  double beta = 0.0;
  std::size_t n_heads = 0;
  std::vector<BlockStat> blocks;
  std::vector<std::size_t> head_block;  // head index -> block index
  double min_filter_margin_in = 0.0;
  double min_filter_margin_out = 0.0;
  double max_ov_deviation = 0.0;     // attention-only: OV memory; mlp: projector residual
};

// Block size for the token-filter heads: floor(d / (c ln(|V|/delta))), c = 4,
// delta = 0.01, floored at 1.
std::size_t default_block_size(std::size_t d, std::size_t vocab);

// Attention-only construction: per block, a rank-1 KQ filter
// beta (sum_z phi(z) + phi(EOS)/2) phi(EOS)^T and an OV associative memory
// (d/d_h) sum_z sum_{a in A_z} phi(a) phi(z)^T P with P = sum_i w_i w_i^T,
// w_i iid on the sphere orthogonal to phi(EOS).
std::pair<TransformerParams, ConstructionReport> construct_attention_only(
    const FactDictionary& dict, const EmbeddingTable& emb, std::size_t d_h,
    double beta, std::uint64_t seed,
    std::optional<std::size_t> block_size = std::nullopt);

// Attention+MLP construction: subject-block heads aggregate to the projector
// onto P, relation-block heads to Q (both orthogonal to phi(EOS)); the MLP is
// the Hermite-tensor trigram memory with odd powers p, k and activation
// sigma = sum_{j<=p+k} h_j, scaled by v_scale.
std::pair<TransformerParams, ConstructionReport> construct_attention_mlp(
    const FactDictionary& dict, const EmbeddingTable& emb, std::size_t d_h,
    std::size_t m, int p, int k, double beta, std::uint64_t seed,
    double v_scale = 1e4, std::optional<std::size_t> block_size = std::nullopt);

// Exhaustive accuracy over all (s, r) with n_noise_fills independent noise and
// position fillings each; decode over the full vocabulary.
double eval_accuracy(const TransformerParams& params, const FactDictionary& dict,
                     const EmbeddingTable& emb, std::size_t T,
                     std::size_t n_noise_fills, Rng& rng);

struct EvalStats {
  double accuracy = 0.0;
  // min over heads and sequences of the post-softmax mass on the head's
  // target token (the block member when present, EOS otherwise). The filter
  // property asks for > 1 - T exp(-beta/4).
  double min_filter_mass = 1.0;
};

// Same evaluation, also checking every head's attention mass against its
// constructed block.
EvalStats eval_accuracy_checked(const TransformerParams& params,
                                const FactDictionary& dict,
                                const EmbeddingTable& emb, std::size_t T,
                                std::size_t n_noise_fills, Rng& rng,
                                const ConstructionReport& report);

// Flat little-endian binary (same style as the embedding tables).
void save_transformer(const TransformerParams& params, const std::filesystem::path& path);
TransformerParams load_transformer(const std::filesystem::path& path);

}  // namespace recall
