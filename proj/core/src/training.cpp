#include "recall/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "recall/adam.hpp"
#include "recall/errors.hpp"
#include "recall/numerics.hpp"
#include "recall/rng.hpp"

namespace recall {

std::optional<TransformerHyper> ShapeSpec::instantiate(std::size_t d) const {
  double dh = alpha * static_cast<double>(d) / static_cast<double>(H);
  double m = beta_shape * static_cast<double>(d);
  if (dh < 1.0 || dh != std::floor(dh)) return std::nullopt;
  return TransformerHyper{d, H, static_cast<std::size_t>(dh),
                          static_cast<std::size_t>(m)};
}

TfGradients TfGradients::zeros(const TransformerHyper& hyper) {
  TfGradients g;
  g.wk.assign(hyper.H, Matrix(hyper.d_h, hyper.d));
  g.wq.assign(hyper.H, Matrix(hyper.d_h, hyper.d));
  g.wv.assign(hyper.H, Matrix(hyper.d_h, hyper.d));
  g.wo.assign(hyper.H, Matrix(hyper.d_h, hyper.d));
  g.mlp_w = Matrix(hyper.m, hyper.d);
  g.mlp_v = Matrix(hyper.m, hyper.d);
  return g;
}

void TfGradients::reset() {
  for (auto* group : {&wk, &wq, &wv, &wo})
    for (Matrix& m : *group) m.fill(0.0);
  mlp_w.fill(0.0);
  mlp_v.fill(0.0);
}

void TfGradients::scale(double c) {
  for (auto* group : {&wk, &wq, &wv, &wo})
    for (Matrix& m : *group)
      for (double& v : m.flat()) v *= c;
  for (double& v : mlp_w.flat()) v *= c;
  for (double& v : mlp_v.flat()) v *= c;
}

namespace {

// Batched forward/backward over sequences that share their query (last)
// token. Scores are gathered from one per-token table per head, and all dense
// work runs through the blocked kernels.
struct BatchEngine {
  Matrix tokens;  // B x T, token ids stored as doubles are avoided: separate
  std::vector<std::size_t> tok;  // flattened B*T
  std::vector<std::size_t> targets;
  std::size_t batch = 0, t_len = 0;

  std::vector<Matrix> attw_h, ctx_h, hv_h;  // saved per head for backward
  Matrix mhsa, pre, hid, out, logits;
  Matrix dout, dmhsa, dctx, dhv, dpre;
  Vector q, kq, tok_score, dtok_score, dkq, dq, row_scores, dattw;

  void assign(std::size_t b, std::size_t t) {
    batch = b;
    t_len = t;
    tok.resize(b * t);
    targets.resize(b);
  }
  std::size_t token(std::size_t b, std::size_t t) const { return tok[b * t_len + t]; }
};

double run_batch(const TransformerParams& params, const EmbeddingTable& emb,
                 BatchEngine& ws, TfGradients* grads,
                 std::vector<std::size_t>* argmax_out) {
  const auto& hy = params.hyper;
  const std::size_t b_sz = ws.batch, t_len = ws.t_len, d = hy.d;
  const std::size_t last = ws.token(0, t_len - 1);
  for (std::size_t b = 1; b < b_sz; ++b)
    if (ws.token(b, t_len - 1) != last)
      throw std::invalid_argument("run_batch: sequences must share the query token");
  std::span<const double> x_last = emb.row(last);

  ws.attw_h.assign(hy.H, Matrix(b_sz, t_len));
  ws.ctx_h.assign(hy.H, Matrix(b_sz, d));
  ws.hv_h.assign(hy.H, Matrix(b_sz, hy.d_h));
  ws.mhsa = Matrix(b_sz, d);
  ws.q.resize(hy.d_h);
  ws.kq.resize(d);
  ws.tok_score.resize(emb.n_tokens);
  ws.row_scores.resize(t_len);

  for (std::size_t h = 0; h < hy.H; ++h) {
    matvec(params.wq[h], x_last, ws.q);
    matvec_t(params.wk[h], ws.q, ws.kq);
    matvec(emb.vectors, ws.kq, ws.tok_score);
    Matrix& attw = ws.attw_h[h];
    Matrix& ctx = ws.ctx_h[h];
    ctx.fill(0.0);
    for (std::size_t b = 0; b < b_sz; ++b) {
      for (std::size_t t = 0; t < t_len; ++t)
        ws.row_scores[t] = ws.tok_score[ws.token(b, t)];
      softmax_inplace(ws.row_scores);
      std::copy(ws.row_scores.begin(), ws.row_scores.end(), attw.row(b));
      std::span<double> ctx_b = ctx.row_span(b);
      for (std::size_t t = 0; t < t_len; ++t)
        axpy(ws.row_scores[t], emb.row(ws.token(b, t)), ctx_b);
    }
    gemm_nt(ctx, params.wv[h], ws.hv_h[h]);
    gemm_nn(ws.hv_h[h], params.wo[h], ws.mhsa, h > 0);
  }

  ws.out = ws.mhsa;
  if (hy.m > 0) {
    ws.pre = Matrix(b_sz, hy.m);
    gemm_nt(ws.mhsa, params.mlp_w, ws.pre);
    ws.hid = ws.pre;
    if (params.activation == MlpKind::kRelu) {
      for (double& v : ws.hid.flat()) v = std::max(0.0, v);
    } else {
      const PolyActivation& sigma = *params.poly;
      for (double& v : ws.hid.flat()) v = sigma(v);
    }
    gemm_nn(ws.hid, params.mlp_v, ws.out, true);
  }

  ws.logits = Matrix(b_sz, emb.n_tokens);
  gemm_nt(ws.out, emb.vectors, ws.logits);

  double loss = 0.0;
  if (argmax_out != nullptr) argmax_out->resize(b_sz);
  for (std::size_t b = 0; b < b_sz; ++b) {
    std::span<double> row = ws.logits.row_span(b);
    if (argmax_out != nullptr) {
      std::size_t best = 0;
      for (std::size_t z = 1; z < row.size(); ++z)
        if (row[z] > row[best]) best = z;
      (*argmax_out)[b] = best;
    }
    loss += cross_entropy(row, ws.targets[b]);
    if (grads != nullptr) {
      softmax_inplace(row);
      row[ws.targets[b]] -= 1.0;
    }
  }
  loss /= static_cast<double>(b_sz);
  if (!std::isfinite(loss)) throw NumericError("loss_and_grads: non-finite loss");
  if (grads == nullptr) return loss;

  ws.dout = Matrix(b_sz, d);
  gemm_nn(ws.logits, emb.vectors, ws.dout);

  ws.dmhsa = ws.dout;
  if (hy.m > 0) {
    gemm_tn_acc(ws.hid, ws.dout, grads->mlp_v);
    ws.dpre = Matrix(b_sz, hy.m);
    gemm_nt(ws.dout, params.mlp_v, ws.dpre);
    if (params.activation == MlpKind::kRelu) {
      for (std::size_t i = 0; i < ws.dpre.size(); ++i)
        if (ws.pre.data()[i] <= 0.0) ws.dpre.data()[i] = 0.0;
    } else {
      const PolyActivation& sigma = *params.poly;
      for (std::size_t i = 0; i < ws.dpre.size(); ++i)
        ws.dpre.data()[i] *= sigma.deriv(ws.pre.data()[i]);
    }
    gemm_tn_acc(ws.dpre, ws.mhsa, grads->mlp_w);
    gemm_nn(ws.dpre, params.mlp_w, ws.dmhsa, true);
  }

  ws.dhv = Matrix(b_sz, hy.d_h);
  ws.dctx = Matrix(b_sz, d);
  ws.dtok_score.resize(emb.n_tokens);
  ws.dkq.resize(d);
  ws.dq.resize(hy.d_h);
  ws.dattw.resize(t_len);
  for (std::size_t h = 0; h < hy.H; ++h) {
    gemm_nt(ws.dmhsa, params.wo[h], ws.dhv);
    gemm_tn_acc(ws.hv_h[h], ws.dmhsa, grads->wo[h]);
    gemm_nn(ws.dhv, params.wv[h], ws.dctx);
    gemm_tn_acc(ws.dhv, ws.ctx_h[h], grads->wv[h]);

    std::fill(ws.dtok_score.begin(), ws.dtok_score.end(), 0.0);
    const Matrix& attw = ws.attw_h[h];
    for (std::size_t b = 0; b < b_sz; ++b) {
      std::span<const double> dctx_b = ws.dctx.row_span(b);
      const double* aw = attw.row(b);
      double inner = 0.0;
      for (std::size_t t = 0; t < t_len; ++t) {
        ws.dattw[t] = dot(emb.row(ws.token(b, t)), dctx_b);
        inner += aw[t] * ws.dattw[t];
      }
      for (std::size_t t = 0; t < t_len; ++t)
        ws.dtok_score[ws.token(b, t)] += aw[t] * (ws.dattw[t] - inner);
    }
    matvec_t(emb.vectors, ws.dtok_score, ws.dkq);
    // recompute the shared per-head query direction
    matvec(params.wq[h], x_last, ws.q);
    matvec(params.wk[h], ws.dkq, ws.dq);
    for (std::size_t i = 0; i < hy.d_h; ++i) {
      if (ws.q[i] != 0.0) axpy(ws.q[i], ws.dkq, grads->wk[h].row_span(i));
      if (ws.dq[i] != 0.0) axpy(ws.dq[i], x_last, grads->wq[h].row_span(i));
    }
  }
  return loss;
}

double eval_exhaustive(const TransformerParams& params, const FactDictionary& dict,
                       const EmbeddingTable& emb, std::size_t T, int fills, Rng rng,
                       BatchEngine& ws) {
  const std::size_t total = dict.S * dict.R * static_cast<std::size_t>(fills);
  const std::size_t chunk = 256;
  std::size_t correct = 0, produced = 0;
  std::size_t s = 0, r = 0;
  int f = 0;
  std::vector<std::size_t> argmax;
  while (produced < total) {
    std::size_t b_sz = std::min(chunk, total - produced);
    ws.assign(b_sz, T);
    for (std::size_t b = 0; b < b_sz; ++b) {
      std::size_t i = rng.next_below(T - 1);
      std::size_t j = rng.next_below(T - 2);
      if (j >= i) ++j;
      for (std::size_t t = 0; t + 1 < T; ++t) {
        std::size_t tok = dict.noise_begin() + rng.next_below(dict.n_noise);
        if (t == i) tok = dict.subject_token(s);
        if (t == j) tok = dict.relation_token(r);
        ws.tok[b * T + t] = tok;
      }
      ws.tok[b * T + T - 1] = dict.eos_token();
      ws.targets[b] = dict.astar(s, r);
      if (++f == fills) {
        f = 0;
        if (++r == dict.R) {
          r = 0;
          ++s;
        }
      }
    }
    run_batch(params, emb, ws, nullptr, &argmax);
    for (std::size_t b = 0; b < b_sz; ++b) correct += argmax[b] == ws.targets[b];
    produced += b_sz;
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

double loss_and_grads(const TransformerParams& params,
                      std::span<const Sequence> batch, const EmbeddingTable& emb,
                      TfGradients& grads) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grads: empty batch");
  grads.reset();
  const std::size_t t_len = batch[0].tokens.size() - 1;
  BatchEngine ws;
  ws.assign(batch.size(), t_len);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (batch[b].tokens.size() != t_len + 1)
      throw std::invalid_argument("loss_and_grads: ragged batch");
    std::copy_n(batch[b].tokens.begin(), t_len, ws.tok.begin() + b * t_len);
    ws.targets[b] = batch[b].tokens.back();
  }
  double loss = run_batch(params, emb, ws, &grads, nullptr);
  grads.scale(1.0 / static_cast<double>(batch.size()));
  return loss;
}

TfTrainResult train_transformer(const FactDictionary& dict, const EmbeddingTable& emb,
                                const TransformerHyper& hyper, const TrainConfig& config,
                                double lr, std::uint64_t run_seed, std::size_t T) {
  if (!config.valid()) throw std::invalid_argument("train_transformer: bad config");
  if (emb.n_tokens != dict.vocab_size())
    throw std::invalid_argument("train_transformer: table/vocab mismatch");

  TfTrainResult result;
  result.params = TransformerParams::zeros(hyper);
  Rng init_rng(run_seed, 0x1217);
  const double sd = 1.0 / std::sqrt(static_cast<double>(hyper.d));
  auto init = [&](Matrix& m) {
    for (double& v : m.flat()) v = sd * init_rng.next_gaussian();
  };
  for (std::size_t h = 0; h < hyper.H; ++h) {
    init(result.params.wk[h]);
    init(result.params.wq[h]);
    init(result.params.wv[h]);
    init(result.params.wo[h]);
  }
  init(result.params.mlp_w);
  init(result.params.mlp_v);

  AdamOptimizer opt(config.beta1, config.beta2, config.adam_eps);
  for (std::size_t h = 0; h < hyper.H; ++h)
    for (int i = 0; i < 4; ++i) opt.add_block(hyper.d_h * hyper.d);
  opt.add_block(hyper.m * hyper.d);
  opt.add_block(hyper.m * hyper.d);

  TfGradients grads = TfGradients::zeros(hyper);
  SrDistribution p_sr = SrDistribution::uniform(dict.S, dict.R);
  BatchEngine ws, eval_ws;
  const auto b_sz = static_cast<std::size_t>(config.batch);

  double acc = eval_exhaustive(result.params, dict, emb, T, config.eval_noise_fills,
                               Rng(run_seed, 0xE7A1), eval_ws);
  result.best_acc = acc;
  result.history.push_back({0, std::log(static_cast<double>(dict.vocab_size())), acc});

  Rng batch_rng(run_seed, 0xBA7C);
  for (int step = 1; step <= config.steps; ++step) {
    ws.assign(b_sz, T);
    for (std::size_t b = 0; b < b_sz; ++b) {
      auto [s, r] = p_sr.sample(batch_rng);
      std::size_t i = batch_rng.next_below(T - 1);
      std::size_t j = batch_rng.next_below(T - 2);
      if (j >= i) ++j;
      for (std::size_t t = 0; t + 1 < T; ++t) {
        std::size_t tok = dict.noise_begin() + batch_rng.next_below(dict.n_noise);
        if (t == i) tok = dict.subject_token(s);
        if (t == j) tok = dict.relation_token(r);
        ws.tok[b * T + t] = tok;
      }
      ws.tok[b * T + T - 1] = dict.eos_token();
      ws.targets[b] = dict.astar(s, r);
    }
    double loss;
    grads.reset();
    try {
      loss = run_batch(result.params, emb, ws, &grads, nullptr);
    } catch (const NumericError&) {
      result.diverged = true;
      result.history.push_back({step, std::numeric_limits<double>::quiet_NaN(), 0.0});
      break;
    }
    grads.scale(1.0 / static_cast<double>(b_sz));
    opt.begin_step();
    std::size_t bi = 0;
    auto upd = [&](Matrix& p, const Matrix& g) {
      opt.update(bi++, p.flat(), g.flat(), lr);
    };
    for (std::size_t h = 0; h < hyper.H; ++h) {
      upd(result.params.wk[h], grads.wk[h]);
      upd(result.params.wq[h], grads.wq[h]);
      upd(result.params.wv[h], grads.wv[h]);
      upd(result.params.wo[h], grads.wo[h]);
    }
    upd(result.params.mlp_w, grads.mlp_w);
    upd(result.params.mlp_v, grads.mlp_v);

    if (step % config.eval_interval == 0 || step == config.steps) {
      acc = eval_exhaustive(result.params, dict, emb, T, config.eval_noise_fills,
                            Rng(run_seed, 0xE7A1 + static_cast<std::uint64_t>(step)),
                            eval_ws);
      result.history.push_back({step, loss, acc});
      result.best_acc = std::max(result.best_acc, acc);
      if (config.early_stop && result.best_acc >= config.acc_threshold) break;
    }
  }
  return result;
}

LrSweepOutcome train_with_lr_sweep(const FactDictionary& dict, const EmbeddingTable& emb,
                                   const TransformerHyper& hyper, const TrainConfig& config,
                                   std::size_t T, std::uint64_t run_seed) {
  LrSweepOutcome out;
  std::vector<double> lrs = config.lrs;
  std::sort(lrs.rbegin(), lrs.rend());
  for (double lr : lrs) {
    TfTrainResult res = train_transformer(dict, emb, hyper, config, lr, run_seed, T);
    out.per_lr.emplace_back(lr, res.best_acc);
    if (res.best_acc > out.best_acc) {
      out.best_acc = res.best_acc;
      out.best_lr = lr;
    }
    if (out.best_acc >= config.acc_threshold) break;
  }
  out.stored = out.best_acc >= config.acc_threshold;
  return out;
}

FactCapacityResult fact_capacity_search(const ShapeSpec& shape, std::size_t d,
                                        std::size_t D, std::span<const std::size_t> s_grid,
                                        const TrainConfig& config, std::size_t T,
                                        AnswerAssignment assignment) {
  auto hyper = shape.instantiate(d);
  if (!hyper)
    throw std::invalid_argument("fact_capacity_search: shape does not divide d");
  FactCapacityResult result;
  auto probe = [&](std::size_t s_count) {
    int succ = 0, fail = 0;
    for (int trial = 0; trial < 3; ++trial) {
      Rng ids(config.seed, s_count * 977 + static_cast<std::uint64_t>(trial));
      std::uint64_t trial_seed = ids.next_u64();
      FactDictionary dict =
          gen_dictionary(s_count, s_count, D, trial_seed, assignment);
      EmbeddingTable emb = sample_sphere_table(dict.vocab_size(), d, trial_seed + 1);
      LrSweepOutcome sweep = train_with_lr_sweep(dict, emb, *hyper, config, T, trial_seed);
      result.rows.push_back({shape.alpha, shape.beta_shape, shape.H, d, D,
                             s_count * s_count, trial_seed, sweep.best_acc,
                             sweep.stored});
      (sweep.stored ? succ : fail) += 1;
      if (succ >= 2 || fail >= 2) break;
    }
    return succ > fail;
  };
  std::optional<std::size_t> best;
  if (!probe(s_grid[0])) return result;
  best = s_grid[0] * s_grid[0];
  std::size_t lo = 1, hi = s_grid.size();
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (probe(s_grid[mid])) {
      best = s_grid[mid] * s_grid[mid];
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  result.max_sr = best;
  return result;
}

std::vector<TradeoffCell> tradeoff_sweep(const FactDictionary& dict,
                                         const EmbeddingTable& emb, std::size_t d,
                                         std::size_t H,
                                         std::span<const std::size_t> h_dh_grid,
                                         std::span<const std::size_t> m_grid,
                                         const TrainConfig& config, std::size_t T) {
  if (h_dh_grid.empty() || m_grid.empty())
    throw std::invalid_argument("tradeoff_sweep: empty grid");
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  for (std::size_t h_dh : h_dh_grid) {
    if (h_dh % H != 0 || h_dh / H == 0)
      throw std::invalid_argument("tradeoff_sweep: H must divide Hd_h");
    for (std::size_t m : m_grid) {
      auto key = std::make_pair(h_dh, m);
      if (cells.count(key)) continue;
      TransformerHyper hyper{d, H, h_dh / H, m};
      LrSweepOutcome sweep =
          train_with_lr_sweep(dict, emb, hyper, config, T, config.seed);
      cells[key] = sweep.best_acc;
    }
  }
  std::vector<TradeoffCell> out;
  for (const auto& [key, acc] : cells) out.push_back({key.first, key.second, acc});
  return out;
}

}  // namespace recall
