#include "recall/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "recall/errors.hpp"
#include "recall/numerics.hpp"

namespace recall {

TransformerParams TransformerParams::zeros(const TransformerHyper& hyper) {
  TransformerParams p;
  p.hyper = hyper;
  p.wk.assign(hyper.H, Matrix(hyper.d_h, hyper.d));
  p.wq.assign(hyper.H, Matrix(hyper.d_h, hyper.d));
  p.wv.assign(hyper.H, Matrix(hyper.d_h, hyper.d));
  p.wo.assign(hyper.H, Matrix(hyper.d_h, hyper.d));
  p.mlp_w = Matrix(hyper.m, hyper.d);
  p.mlp_v = Matrix(hyper.m, hyper.d);
  return p;
}

Vector tf_forward(const TransformerParams& params, const Matrix& x, TfWorkspace& ws) {
  const auto& hy = params.hyper;
  if (x.cols() != hy.d || x.rows() == 0)
    throw std::invalid_argument("tf_forward: bad input shape");
  const std::size_t t_len = x.rows();
  ws.q.resize(hy.d_h);
  ws.kq.resize(hy.d);
  ws.scores.resize(t_len);
  ws.attended.resize(hy.d);
  ws.head_out.resize(hy.d_h);

  std::span<const double> x_last = x.row_span(t_len - 1);
  Vector mhsa(hy.d, 0.0);
  for (std::size_t h = 0; h < hy.H; ++h) {
    matvec(params.wq[h], x_last, ws.q);
    matvec_t(params.wk[h], ws.q, ws.kq);
    matvec(x, ws.kq, ws.scores);
    softmax_inplace(ws.scores);
    matvec_t(x, ws.scores, ws.attended);
    matvec(params.wv[h], ws.attended, ws.head_out);
    for (std::size_t i = 0; i < hy.d_h; ++i)
      if (ws.head_out[i] != 0.0) axpy(ws.head_out[i], params.wo[h].row_span(i), mhsa);
  }
  if (hy.m == 0) return mhsa;

  ws.pre.resize(hy.m);
  matvec(params.mlp_w, mhsa, ws.pre);
  Vector out = mhsa;
  if (params.activation == MlpKind::kRelu) {
    for (std::size_t i = 0; i < hy.m; ++i)
      if (ws.pre[i] > 0.0) axpy(ws.pre[i], params.mlp_v.row_span(i), out);
  } else {
    const PolyActivation& sigma = *params.poly;
    for (std::size_t i = 0; i < hy.m; ++i) {
      double a = sigma(ws.pre[i]);
      if (a != 0.0) axpy(a, params.mlp_v.row_span(i), out);
    }
  }
  return out;
}

Vector tf_forward(const TransformerParams& params, const Matrix& x) {
  TfWorkspace ws;
  return tf_forward(params, x, ws);
}

std::pair<Matrix, Matrix> factor_merged(const Matrix& merged, std::size_t d_h,
                                        double tol) {
  const std::size_t d = merged.cols();
  if (merged.rows() != d) throw std::invalid_argument("factor_merged: not square");
  // Modified Gram-Schmidt over the rows; keep directions above tolerance.
  std::vector<Vector> basis;
  double scale = merged.max_abs();
  if (scale == 0.0) scale = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    Vector r(merged.row(i), merged.row(i) + d);
    for (const Vector& b : basis) {
      double c = dot(r, b);
      axpy(-c, b, r);
    }
    double nrm = norm2(r);
    if (nrm > tol * scale * std::sqrt(static_cast<double>(d))) {
      if (basis.size() == d_h)
        throw InfeasibleError("factor_merged: row space rank exceeds d_h");
      for (double& v : r) v /= nrm;
      basis.push_back(std::move(r));
    }
  }
  Matrix first(d_h, d), second(d_h, d);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      second(i, j) = basis[i][j];
      first(i, j) = dot(basis[i], merged.row_span(j));
    }
  }
  return {std::move(first), std::move(second)};
}

std::size_t default_block_size(std::size_t d, std::size_t vocab) {
  double denom = 4.0 * std::log(static_cast<double>(vocab) / 0.01);
  auto m = static_cast<std::size_t>(static_cast<double>(d) / denom);
  return std::max<std::size_t>(1, m);
}

namespace {

std::vector<std::vector<std::size_t>> chunk_tokens(std::size_t first,
                                                   std::size_t count,
                                                   std::size_t block) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < count; i += block) {
    std::vector<std::size_t> blk;
    for (std::size_t j = i; j < std::min(count, i + block); ++j)
      blk.push_back(first + j);
    out.push_back(std::move(blk));
  }
  return out;
}

std::vector<std::size_t> answers_of_token(const FactDictionary& dict, std::size_t tok) {
  if (dict.is_subject(tok)) return dict.answers_of_subject(tok);
  return dict.answers_of_relation(tok - dict.S);
}

Matrix filter_kq(const FactDictionary& dict, const EmbeddingTable& emb,
                 const std::vector<std::size_t>& blk, double beta) {
  const std::size_t d = emb.dim;
  Vector v(d, 0.0);
  for (std::size_t z : blk) axpy(1.0, emb.row(z), v);
  axpy(0.5, emb.row(dict.eos_token()), v);
  Matrix kq(d, d);
  std::span<const double> eos = emb.row(dict.eos_token());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) kq(i, j) = beta * v[i] * eos[j];
  return kq;
}

void filter_stats(const FactDictionary& dict, const EmbeddingTable& emb,
                  const std::vector<std::size_t>& blk, BlockStat* stat) {
  const std::size_t d = emb.dim;
  Vector v(d, 0.0);
  for (std::size_t z : blk) axpy(1.0, emb.row(z), v);
  axpy(0.5, emb.row(dict.eos_token()), v);
  double eos_score = dot(v, emb.row(dict.eos_token()));
  double min_in = std::numeric_limits<double>::infinity();
  double max_out = -std::numeric_limits<double>::infinity();
  std::set<std::size_t> in_blk(blk.begin(), blk.end());
  for (std::size_t tok = 0; tok + 1 < dict.vocab_size(); ++tok) {
    double s = dot(v, emb.row(tok));
    if (in_blk.count(tok))
      min_in = std::min(min_in, s);
    else
      max_out = std::max(max_out, s);
  }
  stat->filter_margin_in = min_in - eos_score;
  stat->filter_margin_out = eos_score - max_out;
}

}  // namespace

std::pair<TransformerParams, ConstructionReport> construct_attention_only(
    const FactDictionary& dict, const EmbeddingTable& emb, std::size_t d_h,
    double beta, std::uint64_t seed, std::optional<std::size_t> block_size) {
  const std::size_t d = emb.dim;
  if (emb.n_tokens != dict.vocab_size())
    throw std::invalid_argument("construct_attention_only: table/vocab mismatch");
  const std::size_t blk_size = block_size.value_or(default_block_size(d, dict.vocab_size()));

  auto blocks = chunk_tokens(0, dict.S, blk_size);
  std::size_t n_sub = blocks.size();
  auto rel_blocks = chunk_tokens(dict.S, dict.R, blk_size);
  blocks.insert(blocks.end(), rel_blocks.begin(), rel_blocks.end());

  TransformerHyper hyper{d, blocks.size(), d_h, 0};
  TransformerParams params = TransformerParams::zeros(hyper);
  ConstructionReport report;
  report.block_size = blk_size;
  report.beta = beta;
  report.n_heads = blocks.size();

  Rng rng(seed);
  std::span<const double> eos = emb.row(dict.eos_token());
  for (std::size_t h = 0; h < blocks.size(); ++h) {
    const auto& blk = blocks[h];
    auto [wk, wq] = factor_merged(filter_kq(dict, emb, blk, beta), d_h);
    params.wk[h] = std::move(wk);
    params.wq[h] = std::move(wq);

    // P = sum_i w_i w_i^T from iid sphere draws orthogonal to phi(EOS).
    Matrix w(d_h, d);
    for (std::size_t i = 0; i < d_h; ++i) {
      double* row = w.row(i);
      for (std::size_t j = 0; j < d; ++j) row[j] = rng.next_gaussian();
      double c = dot(w.row_span(i), eos);
      axpy(-c, eos, w.row_span(i));
      double nrm = norm2(w.row_span(i));
      for (std::size_t j = 0; j < d; ++j) row[j] /= nrm;
    }
    Matrix ov(d, d);
    const double scale = static_cast<double>(d) / static_cast<double>(d_h);
    for (std::size_t z : blk) {
      Vector pz(d, 0.0);  // P phi(z)
      for (std::size_t i = 0; i < d_h; ++i)
        axpy(dot(w.row_span(i), emb.row(z)), w.row_span(i), pz);
      Vector asum(d, 0.0);
      for (std::size_t a : answers_of_token(dict, z)) axpy(1.0, emb.row(a), asum);
      for (std::size_t i = 0; i < d; ++i)
        if (asum[i] != 0.0) axpy(scale * asum[i], pz, ov.row_span(i));
    }
    auto [wo, wv] = factor_merged(ov, d_h);
    params.wo[h] = std::move(wo);
    params.wv[h] = std::move(wv);

    BlockStat stat;
    stat.subject_side = h < n_sub;
    stat.tokens = blk;
    filter_stats(dict, emb, blk, &stat);
    double max_dev = 0.0;
    Vector col(d);
    for (std::size_t z : blk) {
      std::set<std::size_t> az;
      for (std::size_t a : answers_of_token(dict, z)) az.insert(a);
      matvec(ov, emb.row(z), col);
      for (std::size_t a = 0; a < dict.vocab_size(); ++a) {
        double target = az.count(a) ? 1.0 : 0.0;
        max_dev = std::max(max_dev, std::abs(dot(emb.row(a), col) - target));
      }
    }
    stat.max_ov_deviation = max_dev;
    report.blocks.push_back(std::move(stat));
    report.head_block.push_back(h);
  }
  report.min_filter_margin_in = std::numeric_limits<double>::infinity();
  report.min_filter_margin_out = std::numeric_limits<double>::infinity();
  for (const auto& b : report.blocks) {
    report.min_filter_margin_in = std::min(report.min_filter_margin_in, b.filter_margin_in);
    report.min_filter_margin_out = std::min(report.min_filter_margin_out, b.filter_margin_out);
    report.max_ov_deviation = std::max(report.max_ov_deviation, b.max_ov_deviation);
  }
  return {std::move(params), std::move(report)};
}

std::pair<TransformerParams, ConstructionReport> construct_attention_mlp(
    const FactDictionary& dict, const EmbeddingTable& emb, std::size_t d_h,
    std::size_t m, int p, int k, double beta, std::uint64_t seed, double v_scale,
    std::optional<std::size_t> block_size) {
  const std::size_t d = emb.dim;
  if (emb.n_tokens != dict.vocab_size())
    throw std::invalid_argument("construct_attention_mlp: table/vocab mismatch");
  if (p < 1 || k < 1 || p % 2 == 0 || k % 2 == 0)
    throw std::invalid_argument("construct_attention_mlp: p and k must be odd");
  if (m == 0) throw std::invalid_argument("construct_attention_mlp: m must be >= 1");
  const std::size_t blk_size = block_size.value_or(default_block_size(d, dict.vocab_size()));

  // Orthonormal frame orthogonal to phi(EOS): first dim_p rows span P, the
  // next dim_q rows span Q. The lemma assumes odd d; for even d the Q side
  // gives up one dimension so everything fits next to phi(EOS).
  const std::size_t dim_p = d / 2;
  const std::size_t dim_q = d / 2 - (d % 2 == 0 ? 1 : 0);
  if (dim_p == 0 || dim_q == 0)
    throw std::invalid_argument("construct_attention_mlp: d too small");
  Rng rng(seed);
  std::span<const double> eos = emb.row(dict.eos_token());
  std::vector<Vector> frame;
  frame.reserve(dim_p + dim_q);
  while (frame.size() < dim_p + dim_q) {
    Vector r(d);
    for (double& v : r) v = rng.next_gaussian();
    axpy(-dot(r, eos), eos, r);
    for (const Vector& b : frame) axpy(-dot(r, b), b, r);
    double nrm = norm2(r);
    if (nrm < 1e-8) continue;
    for (double& v : r) v /= nrm;
    frame.push_back(std::move(r));
  }

  auto blocks = chunk_tokens(0, dict.S, blk_size);
  std::size_t n_sub = blocks.size();
  auto rel_blocks = chunk_tokens(dict.S, dict.R, blk_size);
  blocks.insert(blocks.end(), rel_blocks.begin(), rel_blocks.end());

  const std::size_t heads_p = (dim_p + d_h - 1) / d_h;
  const std::size_t heads_q = (dim_q + d_h - 1) / d_h;
  std::size_t n_heads = n_sub * heads_p + (blocks.size() - n_sub) * heads_q;

  TransformerHyper hyper{d, n_heads, d_h, m};
  TransformerParams params = TransformerParams::zeros(hyper);
  ConstructionReport report;
  report.block_size = blk_size;
  report.beta = beta;
  report.n_heads = n_heads;

  std::size_t head = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    bool subject_side = b < n_sub;
    Matrix kq = filter_kq(dict, emb, blk, beta);
    const std::size_t lo = subject_side ? 0 : dim_p;
    const std::size_t cnt = subject_side ? dim_p : dim_q;
    for (std::size_t off = 0; off < cnt; off += d_h, ++head) {
      auto [wk, wq] = factor_merged(kq, d_h);
      params.wk[head] = std::move(wk);
      params.wq[head] = std::move(wq);
      report.head_block.push_back(b);
      const std::size_t rows = std::min(d_h, cnt - off);
      for (std::size_t i = 0; i < rows; ++i) {
        const Vector& f = frame[lo + off + i];
        for (std::size_t j = 0; j < d; ++j) {
          params.wv[head](i, j) = f[j];
          params.wo[head](i, j) = f[j];
        }
      }
    }
    BlockStat stat;
    stat.subject_side = subject_side;
    stat.tokens = blk;
    filter_stats(dict, emb, blk, &stat);
    report.blocks.push_back(std::move(stat));
  }

  // Trigram MLP memory. sigma = sum_{j<=p+k} h_j has every Hermite
  // coefficient 1, so no sign flip is needed; keep the check anyway.
  PolyActivation sigma = PolyActivation::hermite_sum(p + k);
  double cpk = sigma.hermite_coeffs()[static_cast<std::size_t>(p + k)];
  double flip = cpk < 0.0 ? -1.0 : 1.0;
  params.activation = MlpKind::kPoly;
  params.poly = sigma;

  std::vector<Vector> phis(dict.S), phir(dict.R);
  auto project = [&](std::span<const double> x, std::size_t lo, std::size_t cnt) {
    Vector out(d, 0.0);
    for (std::size_t i = 0; i < cnt; ++i)
      axpy(dot(frame[lo + i], x), frame[lo + i], out);
    return out;
  };
  for (std::size_t s = 0; s < dict.S; ++s)
    phis[s] = project(emb.row(dict.subject_token(s)), 0, dim_p);
  for (std::size_t r = 0; r < dict.R; ++r)
    phir[r] = project(emb.row(dict.relation_token(r)), dim_p, dim_q);

  for (std::size_t i = 0; i < m; ++i) {
    double* wrow = params.mlp_w.row(i);
    for (std::size_t j = 0; j < d; ++j) wrow[j] = rng.next_gaussian();
  }
  Vector sdots(dict.S), sns(dict.S), rns(dict.R);
  for (std::size_t s = 0; s < dict.S; ++s) sns[s] = dot(phis[s], phis[s]);
  for (std::size_t r = 0; r < dict.R; ++r) rns[r] = dot(phir[r], phir[r]);
  const double coef = flip * v_scale / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::span<const double> wi = params.mlp_w.row_span(i);
    std::span<double> vi = params.mlp_v.row_span(i);
    for (std::size_t s = 0; s < dict.S; ++s) sdots[s] = dot(wi, phis[s]);
    for (std::size_t r = 0; r < dict.R; ++r) {
      double xv = dot(wi, phir[r]);
      for (std::size_t s = 0; s < dict.S; ++s) {
        double c = hermite_pair_contract(sdots[s], xv, sns[s], rns[r],
                                         dot(phis[s], phir[r]), p, k);
        axpy(coef * c, emb.row(dict.astar(s, r)), vi);
      }
    }
  }

  // Projector residual: the per-side head sums should reproduce Pi_P / Pi_Q
  // exactly up to orthogonalization roundoff.
  double max_resid = 0.0;
  for (std::size_t s = 0; s < std::min<std::size_t>(dict.S, 4); ++s) {
    Vector direct = phis[s];
    Vector via(d, 0.0);
    for (std::size_t h = 0; h < n_sub * heads_p; ++h) {
      Vector tmp(d_h);
      matvec(params.wv[h], emb.row(dict.subject_token(s)), tmp);
      for (std::size_t i = 0; i < d_h; ++i)
        if (tmp[i] != 0.0) axpy(tmp[i], params.wo[h].row_span(i), via);
    }
    // Only the "active" block attends to s; all blocks share Pi_P chunks, so
    // compare one block's worth.
    for (std::size_t j = 0; j < d; ++j)
      max_resid = std::max(max_resid,
                           std::abs(via[j] / static_cast<double>(n_sub) - direct[j]));
  }
  report.max_ov_deviation = max_resid;
  report.min_filter_margin_in = std::numeric_limits<double>::infinity();
  report.min_filter_margin_out = std::numeric_limits<double>::infinity();
  for (const auto& bstat : report.blocks) {
    report.min_filter_margin_in = std::min(report.min_filter_margin_in, bstat.filter_margin_in);
    report.min_filter_margin_out = std::min(report.min_filter_margin_out, bstat.filter_margin_out);
  }
  return {std::move(params), std::move(report)};
}

namespace {

EvalStats eval_impl(const TransformerParams& params, const FactDictionary& dict,
                    const EmbeddingTable& emb, std::size_t T,
                    std::size_t n_noise_fills, Rng& rng,
                    const ConstructionReport* report) {
  if (n_noise_fills == 0)
    throw std::invalid_argument("eval_accuracy: n_noise_fills must be >= 1");
  Matrix x(T, emb.dim);
  std::vector<std::size_t> toks(T);
  TfWorkspace ws;
  EvalStats stats;
  std::size_t correct = 0, total = 0;
  for (std::size_t s = 0; s < dict.S; ++s) {
    for (std::size_t r = 0; r < dict.R; ++r) {
      for (std::size_t f = 0; f < n_noise_fills; ++f) {
        std::size_t i = rng.next_below(T - 1);
        std::size_t j = rng.next_below(T - 2);
        if (j >= i) ++j;
        for (std::size_t t = 0; t + 1 < T; ++t) {
          std::size_t tok = dict.noise_begin() + rng.next_below(dict.n_noise);
          if (t == i) tok = dict.subject_token(s);
          if (t == j) tok = dict.relation_token(r);
          toks[t] = tok;
          std::copy_n(emb.row(tok).data(), emb.dim, x.row(t));
        }
        toks[T - 1] = dict.eos_token();
        std::copy_n(emb.row(dict.eos_token()).data(), emb.dim, x.row(T - 1));
        Vector out = tf_forward(params, x, ws);
        correct += decode_argmax(out, emb) == dict.astar(s, r);
        ++total;
        if (report != nullptr) {
          for (std::size_t h = 0; h < params.hyper.H; ++h) {
            const auto& blk = report->blocks[report->head_block[h]].tokens;
            std::size_t target = dict.eos_token();
            for (std::size_t z : blk)
              if (z == dict.subject_token(s) || z == dict.relation_token(r)) target = z;
            matvec(params.wq[h], x.row_span(T - 1), ws.q);
            matvec_t(params.wk[h], ws.q, ws.kq);
            matvec(x, ws.kq, ws.scores);
            softmax_inplace(ws.scores);
            double mass = 0.0;
            for (std::size_t t = 0; t < T; ++t)
              if (toks[t] == target) mass += ws.scores[t];
            stats.min_filter_mass = std::min(stats.min_filter_mass, mass);
          }
        }
      }
    }
  }
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return stats;
}

}  // namespace

double eval_accuracy(const TransformerParams& params, const FactDictionary& dict,
                     const EmbeddingTable& emb, std::size_t T,
                     std::size_t n_noise_fills, Rng& rng) {
  return eval_impl(params, dict, emb, T, n_noise_fills, rng, nullptr).accuracy;
}

EvalStats eval_accuracy_checked(const TransformerParams& params,
                                const FactDictionary& dict,
                                const EmbeddingTable& emb, std::size_t T,
                                std::size_t n_noise_fills, Rng& rng,
                                const ConstructionReport& report) {
  return eval_impl(params, dict, emb, T, n_noise_fills, rng, &report);
}

void save_transformer(const TransformerParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_transformer: cannot open " + path.string());
  const auto& hy = params.hyper;
  std::uint64_t header[5] = {hy.d, hy.H, hy.d_h, hy.m,
                             static_cast<std::uint64_t>(params.activation)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  auto dump = [&](const Matrix& mtx) {
    out.write(reinterpret_cast<const char*>(mtx.data()),
              static_cast<std::streamsize>(mtx.size() * sizeof(double)));
  };
  for (std::size_t h = 0; h < hy.H; ++h) {
    dump(params.wk[h]);
    dump(params.wq[h]);
    dump(params.wv[h]);
    dump(params.wo[h]);
  }
  dump(params.mlp_w);
  dump(params.mlp_v);
  if (!out) throw std::runtime_error("save_transformer: write failed");
}

TransformerParams load_transformer(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_transformer: cannot open " + path.string());
  std::uint64_t header[5];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw std::runtime_error("load_transformer: truncated header");
  TransformerHyper hy{header[0], header[1], header[2], header[3]};
  TransformerParams params = TransformerParams::zeros(hy);
  params.activation = static_cast<MlpKind>(header[4]);
  auto slurp = [&](Matrix& mtx) {
    in.read(reinterpret_cast<char*>(mtx.data()),
            static_cast<std::streamsize>(mtx.size() * sizeof(double)));
  };
  for (std::size_t h = 0; h < hy.H; ++h) {
    slurp(params.wk[h]);
    slurp(params.wq[h]);
    slurp(params.wv[h]);
    slurp(params.wo[h]);
  }
  slurp(params.mlp_w);
  slurp(params.mlp_v);
  if (!in) throw std::runtime_error("load_transformer: truncated payload");
  return params;
}

}  // namespace recall
