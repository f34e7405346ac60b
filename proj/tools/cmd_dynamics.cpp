#include <cstdio>

#include "common.hpp"
#include "recall/csv.hpp"
#include "recall/dynamics.hpp"
#include "recall/svg.hpp"

namespace recall::cli {
namespace {

AnswerAssignment parse_assignment(const std::string& name) {
  if (name == "uniform") return AnswerAssignment::kUniform;
  if (name == "balanced") return AnswerAssignment::kBalanced;
  if (name == "distinct") return AnswerAssignment::kDistinct;
  throw std::invalid_argument("assignment must be uniform|balanced|distinct");
}

}  // namespace

int cmd_dynamics(RunContext& ctx) {
  const std::size_t S = ctx.cfg.get_size("S", 16);
  const std::size_t R = ctx.cfg.get_size("R", 4);
  const std::size_t D = ctx.cfg.get_size("D", 8);
  const std::size_t T = ctx.cfg.get_size("T", 32);
  const std::size_t n_noise = ctx.cfg.get_size("n_noise", 0);  // 0: S + R
  const double alpha = ctx.cfg.get_double("alpha", 1e-5);
  const std::string init = ctx.cfg.get_string("init", "balanced");
  const std::string mode = ctx.cfg.get_string("mode", "flow");
  const double horizon = ctx.cfg.get_double("horizon", 9000.0);
  const double step = ctx.cfg.get_double("step", 0.5);
  const double record_dt = ctx.cfg.get_double("record_dt", 0.0);
  const double drift_tol = ctx.cfg.get_double("drift_tol", 1e-8);
  const double lr = ctx.cfg.get_double("lr", 0.5);
  const int gd_steps = ctx.cfg.get_int("gd_steps", 2000);
  const int record_every = ctx.cfg.get_int("record_every", 10);
  AnswerAssignment assignment =
      parse_assignment(ctx.cfg.get_string("assignment", "balanced"));
  ctx.cfg.get_string("preset", "");  // consumed; recorded in the manifest
  ctx.cfg.require_all_consumed();

  FactDictionary dict =
      gen_dictionary(S, R, D, ctx.seed, assignment,
                     n_noise > 0 ? std::optional<std::size_t>(n_noise) : std::nullopt);
  LinAttnParams params = init == "constant" ? init_constant(dict, alpha)
                                            : init_balanced(dict, alpha);

  Trajectory traj;
  if (horizon == 0.0) {
    traj.points.push_back(metrics(params, dict, T));
  } else if (mode == "flow") {
    FlowOptions opts;
    opts.horizon = horizon;
    opts.step = step;
    opts.record_dt = record_dt;
    opts.drift_tol = drift_tol;
    traj = integrate_flow(params, dict, T, opts);
  } else if (mode == "gd") {
    traj = run_gd(params, dict, T, lr, gd_steps, record_every);
  } else {
    throw std::invalid_argument("dynamics: mode must be flow|gd");
  }

  std::vector<std::string> cols = {"t",
                                   "loss",
                                   "rel_loss",
                                   "subj_loss",
                                   "max_bal_residual",
                                   "max_subj_noise_weight"};
  for (std::size_t r = 0; r < R; ++r) cols.push_back("dist_r" + std::to_string(r));
  CsvWriter csv(cols);
  SvgSeries loss{"loss", {}, {}}, rel{"relation-only loss", {}, {}},
      subj{"subject-only loss", {}, {}};
  for (const DynMetricsPoint& pt : traj.points) {
    csv.field(pt.t).field(pt.loss).field(pt.rel_loss).field(pt.subj_loss);
    csv.field(pt.max_bal_drift).field(pt.max_subj_noise_weight);
    for (std::size_t r = 0; r < R; ++r)
      csv.field(pt.rel_distance.empty() ? 0.0 : pt.rel_distance[r]);
    csv.end_row();
    loss.x.push_back(pt.t);
    loss.y.push_back(pt.loss);
    rel.x.push_back(pt.t);
    rel.y.push_back(pt.rel_loss);
    subj.x.push_back(pt.t);
    subj.y.push_back(pt.subj_loss);
  }
  csv.write_atomic(ctx.out("trajectory.csv"));
  SvgPlotOptions opt;
  opt.title = "linear attention losses";
  opt.x_label = "t";
  opt.y_label = "loss";
  write_line_plot(ctx.out("losses.svg"), {loss, rel, subj}, opt);
  ctx.write_manifest("dynamics");
  if (traj.failed) {
    std::fprintf(stderr, "dynamics: trajectory aborted on non-finite state\n");
    return kExitNumeric;
  }
  std::printf("dynamics: %zu points, final loss %.6g\n", traj.points.size(),
              traj.points.back().loss);
  return kExitOk;
}

}  // namespace recall::cli
