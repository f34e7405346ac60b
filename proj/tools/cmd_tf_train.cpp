#include <cstdio>

#include "common.hpp"
#include "recall/bounds.hpp"
#include "recall/csv.hpp"
#include "recall/svg.hpp"
#include "recall/training.hpp"

namespace recall::cli {
namespace {

AnswerAssignment parse_assignment(const std::string& name) {
  if (name == "uniform") return AnswerAssignment::kUniform;
  if (name == "balanced") return AnswerAssignment::kBalanced;
  if (name == "distinct") return AnswerAssignment::kDistinct;
  throw std::invalid_argument("assignment must be uniform|balanced|distinct");
}

TrainConfig read_train_config(const RunContext& ctx) {
  TrainConfig tc;
  tc.steps = ctx.cfg.get_int("steps", 1 << 12);
  tc.batch = ctx.cfg.get_int("batch", 256);
  tc.lrs = ctx.cfg.get_double_list("lrs", {1e-3, 3e-3, 1e-2});
  tc.eval_interval = ctx.cfg.get_int("eval_interval", 256);
  tc.eval_noise_fills = ctx.cfg.get_int("eval_fills", 8);
  tc.acc_threshold = ctx.cfg.get_double("threshold", 0.99);
  tc.early_stop = ctx.cfg.get_bool("early_stop", true);
  tc.seed = ctx.seed;
  return tc;
}

int run_single(RunContext& ctx, const TrainConfig& tc) {
  const std::size_t S = ctx.cfg.get_size("S", 8);
  const std::size_t R = ctx.cfg.get_size("R", 8);
  const std::size_t D = ctx.cfg.get_size("D", 4);
  const std::size_t T = ctx.cfg.get_size("T", 32);
  const std::size_t d = ctx.cfg.get_size("d", 32);
  const std::size_t H = ctx.cfg.get_size("H", 8);
  const std::size_t d_h = ctx.cfg.get_size("d_h", d / H);
  const std::size_t m = ctx.cfg.get_size("m", 4 * d);
  const double lr = ctx.cfg.get_double("lr", 1e-2);
  AnswerAssignment assignment =
      parse_assignment(ctx.cfg.get_string("assignment", "uniform"));
  ctx.cfg.require_all_consumed();

  FactDictionary dict = gen_dictionary(S, R, D, ctx.seed, assignment);
  EmbeddingTable emb = sample_sphere_table(dict.vocab_size(), d, ctx.seed + 1);
  TransformerHyper hyper{d, H, d_h, m};
  TfTrainResult res = train_transformer(dict, emb, hyper, tc, lr, ctx.seed, T);

  save_dictionary(dict, ctx.out("dictionary.txt"));
  {
    // a small token-id batch dump for debugging the data pipe
    std::vector<std::string> cols;
    for (std::size_t t = 0; t <= T; ++t) cols.push_back("z" + std::to_string(t + 1));
    CsvWriter batch_csv(cols);
    SrDistribution p_sr = SrDistribution::uniform(S, R);
    Rng rng(ctx.seed, 0xBEEF);
    for (int i = 0; i < 8; ++i) {
      Sequence seq = sample_sequence(dict, T, p_sr, rng);
      for (std::size_t tok : seq.tokens) batch_csv.field(tok);
      batch_csv.end_row();
    }
    batch_csv.write_atomic(ctx.out("sample_batch.csv"));
  }

  CsvWriter csv({"step", "loss", "acc"});
  SvgSeries loss_series{"loss", {}, {}}, acc_series{"accuracy", {}, {}};
  for (const TrainHistoryRow& row : res.history) {
    csv.field(row.step).field(row.loss).field(row.acc).end_row();
    loss_series.x.push_back(row.step);
    loss_series.y.push_back(row.loss);
    acc_series.x.push_back(row.step);
    acc_series.y.push_back(row.acc);
  }
  csv.write_atomic(ctx.out("history.csv"));
  SvgPlotOptions opt;
  opt.title = "training history";
  opt.x_label = "step";
  opt.y_label = "loss / accuracy";
  write_line_plot(ctx.out("history.svg"), {loss_series, acc_series}, opt);
  save_transformer(res.params, ctx.out("trained_params.bin"));
  ctx.write_manifest("tf-train");
  std::printf("tf-train single: best acc %.4f%s\n", res.best_acc,
              res.diverged ? " (diverged)" : "");
  return kExitOk;
}

int run_capacity(RunContext& ctx, const TrainConfig& tc) {
  auto alphas = ctx.cfg.get_double_list("shape_alpha", {1.0});
  auto betas = ctx.cfg.get_double_list("shape_beta", {4.0});
  const std::size_t H = ctx.cfg.get_size("H", 8);
  auto d_grid = ctx.cfg.get_size_list("d_grid", {16, 24, 32});
  const std::size_t D = ctx.cfg.get_size("D", 8);
  const std::size_t T = ctx.cfg.get_size("T", 32);
  auto s_grid = ctx.cfg.get_size_list("s_grid", {2, 3, 4, 6, 8, 11, 16, 23, 32});
  AnswerAssignment assignment =
      parse_assignment(ctx.cfg.get_string("assignment", "uniform"));
  ctx.cfg.require_all_consumed();
  if (alphas.size() != betas.size())
    throw std::invalid_argument("tf-train capacity: shape_alpha/shape_beta length mismatch");

  struct Cell {
    ShapeSpec shape;
    std::size_t d;
    FactCapacityResult result;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < alphas.size(); ++i)
    for (std::size_t d : d_grid)
      cells.push_back({ShapeSpec{alphas[i], betas[i], H}, d, {}});

  ThreadPool pool(ctx.jobs);
  pool.parallel_for(cells.size(), [&](std::size_t i) {
    TrainConfig cell_tc = tc;
    cell_tc.seed = ctx.seed + 7919 * i;
    cells[i].result = fact_capacity_search(cells[i].shape, cells[i].d, D, s_grid,
                                           cell_tc, T, assignment);
  });

  CsvWriter rows({"alpha", "beta", "H", "d", "D", "SR", "seed", "best_acc", "stored"});
  CsvWriter summary({"alpha", "beta", "H", "d", "params", "max_sr"});
  std::vector<double> xs, ys;
  for (const Cell& cell : cells) {
    for (const FactCapacityRow& r : cell.result.rows) {
      rows.field(r.alpha).field(r.beta_shape).field(r.H).field(r.d).field(r.D);
      rows.field(r.SR).field(std::to_string(r.seed)).field(r.best_acc);
      rows.field(std::size_t(r.stored ? 1 : 0)).end_row();
    }
    auto hyper = cell.shape.instantiate(cell.d);
    std::size_t params = hyper ? hyper->total_params() : 0;
    std::size_t max_sr = cell.result.max_sr.value_or(0);
    summary.field(cell.shape.alpha).field(cell.shape.beta_shape).field(cell.shape.H);
    summary.field(cell.d).field(params).field(max_sr).end_row();
    if (max_sr > 0) {
      xs.push_back(static_cast<double>(params));
      ys.push_back(static_cast<double>(max_sr));
    }
  }
  rows.write_atomic(ctx.out("fact_capacity.csv"));
  summary.write_atomic(ctx.out("fact_capacity_summary.csv"));

  std::string annotation = "no stored cells";
  if (xs.size() >= 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "log-log slope %.3f", loglog_slope(xs, ys));
    annotation = buf;
  }
  if (!xs.empty()) {
    SvgPlotOptions opt;
    opt.title = "facts stored vs parameters";
    opt.x_label = "parameters";
    opt.y_label = "max SR";
    opt.log_x = opt.log_y = true;
    opt.annotation = annotation;
    write_line_plot(ctx.out("fact_capacity.svg"), {{"capacity", xs, ys}}, opt);
  }
  ctx.write_manifest("tf-train");
  std::printf("tf-train capacity: %zu cells -> %s\n", cells.size(), annotation.c_str());
  return kExitOk;
}

int run_tradeoff(RunContext& ctx, const TrainConfig& tc) {
  const std::size_t S = ctx.cfg.get_size("S", 32);
  const std::size_t R = ctx.cfg.get_size("R", 32);
  const std::size_t D = ctx.cfg.get_size("D", 8);
  const std::size_t T = ctx.cfg.get_size("T", 32);
  const std::size_t d = ctx.cfg.get_size("d", 64);
  const std::size_t H = ctx.cfg.get_size("H", 8);
  auto hdh_grid = ctx.cfg.get_size_list("hdh_grid", {16, 64, 256});
  auto m_grid = ctx.cfg.get_size_list("m_grid", {0, 64, 512});
  AnswerAssignment assignment =
      parse_assignment(ctx.cfg.get_string("assignment", "uniform"));
  ctx.cfg.require_all_consumed();

  FactDictionary dict = gen_dictionary(S, R, D, ctx.seed, assignment);
  EmbeddingTable emb = sample_sphere_table(dict.vocab_size(), d, ctx.seed + 1);
  auto cells = tradeoff_sweep(dict, emb, d, H, hdh_grid, m_grid, tc, T);

  CsvWriter csv({"Hdh", "m", "best_acc"});
  std::map<std::size_t, SvgSeries> by_m;
  for (const TradeoffCell& c : cells) {
    csv.field(c.h_dh).field(c.m).field(c.best_acc).end_row();
    auto& s = by_m[c.m];
    s.label = "m=" + std::to_string(c.m);
    s.x.push_back(static_cast<double>(c.h_dh));
    s.y.push_back(c.best_acc);
  }
  csv.write_atomic(ctx.out("tradeoff_grid.csv"));
  std::vector<SvgSeries> series;
  for (auto& [m, s] : by_m) series.push_back(s);
  SvgPlotOptions opt;
  opt.title = "attention/MLP tradeoff (best accuracy)";
  opt.x_label = "H d_h";
  opt.y_label = "best accuracy";
  opt.log_x = true;
  write_line_plot(ctx.out("tradeoff_grid.svg"), series, opt);
  ctx.write_manifest("tf-train");
  std::printf("tf-train tradeoff: %zu cells\n", cells.size());
  return kExitOk;
}

}  // namespace

int cmd_tf_train(RunContext& ctx) {
  const std::string mode = ctx.cfg.get_string("mode", "single");
  TrainConfig tc = read_train_config(ctx);
  if (!tc.valid()) throw std::invalid_argument("tf-train: invalid train config");
  if (mode == "single") return run_single(ctx, tc);
  if (mode == "capacity") return run_capacity(ctx, tc);
  if (mode == "tradeoff") return run_tradeoff(ctx, tc);
  throw std::invalid_argument("tf-train: mode must be single|capacity|tradeoff");
}

}  // namespace recall::cli
