#include <cstdio>
#include <mutex>

#include "common.hpp"
#include "recall/assoc_mem.hpp"
#include "recall/bounds.hpp"
#include "recall/csv.hpp"
#include "recall/svg.hpp"

namespace recall::cli {
namespace {

struct CellResult {
  std::size_t d, m, params;
  CapacityResult search;
};

}  // namespace

int cmd_am_capacity(RunContext& ctx) {
  const std::string kind = ctx.cfg.get_string("kind", "linear");
  auto d_grid = ctx.cfg.get_size_list("d_grid", {16, 24, 32, 48});
  std::vector<std::size_t> m_grid = ctx.cfg.get_size_list("m_grid", {0});
  auto n_grid = ctx.cfg.get_size_list(
      "n_grid", {8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256});
  const double threshold = ctx.cfg.get_double("threshold", 0.99);
  const int seeds_per_probe = ctx.cfg.get_int("seeds_per_probe", 3);
  const std::string map_kind = ctx.cfg.get_string("map", "identity");
  const int hermite_k = ctx.cfg.get_int("k", 2);
  const int steps = ctx.cfg.get_int("steps", 1 << 12);
  const double lr = ctx.cfg.get_double("lr", 1e-2);
  const int eval_interval = ctx.cfg.get_int("eval_interval", 64);
  ctx.cfg.require_all_consumed();

  if (kind != "linear" && kind != "lowrank" && kind != "mlp-ntk" && kind != "mlp-train")
    throw std::invalid_argument("am-capacity: kind must be linear|lowrank|mlp-ntk|mlp-train");
  if (kind == "linear") m_grid = {0};
  if (kind != "linear" && m_grid == std::vector<std::size_t>{0})
    throw std::invalid_argument("am-capacity: " + kind + " needs m_grid");

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t d : d_grid)
    for (std::size_t m : m_grid) cells.emplace_back(d, m);

  auto make_map = [&](std::size_t n) {
    if (map_kind == "identity") return AssociationMap::identity(n);
    if (map_kind == "mod32") return AssociationMap::modulo(n, 32);
    throw std::invalid_argument("am-capacity: map must be identity|mod32");
  };

  std::vector<CellResult> results(cells.size());
  ThreadPool pool(ctx.jobs);
  pool.parallel_for(cells.size(), [&](std::size_t ci) {
    auto [d, m] = cells[ci];
    auto probe = [&, d = d, m = m](std::size_t n, std::uint64_t seed) {
      AssociationMap map = make_map(n);
      EmbeddingTable e = sample_sphere_table(n, d, seed);
      EmbeddingTable u = sample_sphere_table(map.n_outputs, d, seed ^ 0x5bf0a8b1);
      if (kind == "linear")
        return am_accuracy(build_linear(map, e, u), map, e, u);
      if (kind == "lowrank")
        return am_accuracy(build_lowrank(map, e, u, m, seed + 1), map, e, u);
      if (kind == "mlp-ntk") {
        PolyActivation sigma = PolyActivation::hermite_sum(hermite_k + 1);
        return am_accuracy(build_mlp_ntk(map, e, u, m, hermite_k, sigma, seed + 1),
                           map, e, u);
      }
      TrainConfig tc;
      tc.steps = steps;
      tc.eval_interval = eval_interval;
      tc.acc_threshold = threshold;
      tc.seed = seed + 1;
      auto [net, hist] = train_mlp_am(map, e, u, m, tc, lr);
      return hist.best_accuracy;
    };
    results[ci] = CellResult{d, m,
                             kind == "linear" ? d * d
                             : kind == "lowrank" ? d * m + m * d
                                                 : 2 * m * d,
                             capacity_search(probe, n_grid, threshold,
                                             seeds_per_probe, ctx.seed + ci)};
  });

  CsvWriter probes({"experiment", "d", "m", "N", "seed", "accuracy", "stored", "wall_ms"});
  CsvWriter summary({"experiment", "d", "m", "params", "capacity"});
  std::vector<double> xs, ys;
  for (const CellResult& cell : results) {
    for (const CapacityProbe& p : cell.search.probes) {
      probes.field(kind).field(cell.d).field(cell.m).field(p.n);
      probes.field(std::to_string(p.seed)).field(p.accuracy);
      probes.field(std::size_t(p.stored ? 1 : 0)).field(p.wall_ms);
      probes.end_row();
    }
    std::size_t cap = cell.search.capacity.value_or(0);
    summary.field(kind).field(cell.d).field(cell.m).field(cell.params).field(cap);
    summary.end_row();
    if (cap > 0) {
      xs.push_back(static_cast<double>(cell.params));
      ys.push_back(static_cast<double>(cap));
    }
  }
  probes.write_atomic(ctx.out("capacity_probes.csv"));
  summary.write_atomic(ctx.out("capacity_summary.csv"));

  std::string annotation = "no stored cells";
  if (xs.size() >= 2) {
    double slope = loglog_slope(xs, ys);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "log-log slope %.3f", slope);
    annotation = buf;
  }
  if (!xs.empty()) {
    SvgPlotOptions opt;
    opt.title = "storage capacity vs parameter count (" + kind + ")";
    opt.x_label = "parameters";
    opt.y_label = "capacity N*";
    opt.log_x = opt.log_y = true;
    opt.annotation = annotation;
    write_line_plot(ctx.out("capacity_plot.svg"), {{kind, xs, ys}}, opt);
  }
  ctx.write_manifest("am-capacity");
  std::printf("am-capacity: %zu cells -> %s\n", cells.size(), annotation.c_str());
  return kExitOk;
}

}  // namespace recall::cli
