#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "recall/bounds.hpp"
#include "recall/csv.hpp"

namespace recall::cli {
namespace {

std::vector<double> make_p(const std::string& spec, std::size_t n, double alpha) {
  std::vector<double> p(n);
  if (spec == "uniform") {
    for (double& v : p) v = 1.0 / static_cast<double>(n);
    return p;
  }
  if (spec == "powerlaw") {
    double z = 0.0;
    for (std::size_t x = 1; x <= n; ++x) {
      p[x - 1] = std::pow(static_cast<double>(x), -alpha);
      z += p[x - 1];
    }
    for (double& v : p) v /= z;
    return p;
  }
  throw std::invalid_argument("bounds: p must be uniform|powerlaw");
}

// Join a capacity summary CSV (ending in params,capacity columns) with the
// N log M storage floor.
int run_compare(RunContext& ctx) {
  const std::string path = ctx.cfg.get_string("capacity_csv", "");
  const double bits_per_param = ctx.cfg.get_double("bits_per_param", 64.0);
  ctx.cfg.require_all_consumed();
  if (path.empty())
    throw std::invalid_argument("bounds compare: capacity_csv is required");
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("bounds compare: cannot open " + path);
  std::string header;
  std::getline(in, header);
  CsvWriter out({"params", "capacity", "measured_bits", "bound_nats", "ratio"});
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() < 2) continue;
    double params = std::stod(fields[fields.size() - 2]);
    double capacity = std::stod(fields[fields.size() - 1]);
    if (capacity <= 1.0 || params <= 0.0) continue;
    double bound_nats = capacity * std::log(capacity);  // N log M at M = N
    double measured_bits = params * bits_per_param;
    out.field(params).field(capacity).field(measured_bits).field(bound_nats);
    out.field(compare_capacity(measured_bits, bound_nats)).end_row();
    ++rows;
  }
  out.write_atomic(ctx.out("bounds_comparison.csv"));
  ctx.write_manifest("bounds");
  std::printf("bounds compare: %zu rows\n", rows);
  return kExitOk;
}

}  // namespace

int cmd_bounds(RunContext& ctx) {
  const std::string which = ctx.cfg.get_string("which", "assoc");
  if (which == "compare") return run_compare(ctx);

  CsvWriter csv({"bound", "inputs", "value_nats", "value_bits"});
  if (which == "assoc") {
    const double b = ctx.cfg.get_double("B", 0.0);
    const double m = ctx.cfg.get_double("M", 2.0);
    const std::size_t n = ctx.cfg.get_size("N", 16);
    const std::string p_spec = ctx.cfg.get_string("p", "uniform");
    const double alpha = ctx.cfg.get_double("alpha_exp", 2.0);
    ctx.cfg.require_all_consumed();
    double nats = lb_assoc_loss(b, m, make_p(p_spec, n, alpha));
    std::ostringstream inputs;
    inputs << "B=" << b << " M=" << m << " N=" << n << " p=" << p_spec;
    csv.field(std::string("assoc_loss")).field(inputs.str());
    csv.field(nats).field(nats / std::log(2.0)).end_row();
  } else if (which == "power-law") {
    const double alpha = ctx.cfg.get_double("alpha_exp", 2.0);
    const std::size_t n = ctx.cfg.get_size("N", 1000000);
    auto grid = ctx.cfg.get_double_list("b_grid", {100, 215, 464, 1000, 2154, 4641, 10000});
    ctx.cfg.require_all_consumed();
    double slope = lb_power_law_slope(grid, alpha, n);
    std::ostringstream inputs;
    inputs << "alpha=" << alpha << " N=" << n;
    csv.field(std::string("power_law_slope")).field(inputs.str());
    csv.field(slope).field(slope).end_row();
  } else if (which == "factual") {
    const std::size_t s = ctx.cfg.get_size("S", 32);
    const std::size_t r = ctx.cfg.get_size("R", 32);
    const std::size_t d = ctx.cfg.get_size("D", 8);
    const std::size_t v = ctx.cfg.get_size("V", 512);
    const double c = ctx.cfg.get_double("c", 0.5);
    ctx.cfg.require_all_consumed();
    double nats = lb_factual_bits(s, r, d, v, c);
    std::ostringstream inputs;
    inputs << "S=" << s << " R=" << r << " D=" << d << " V=" << v << " c=" << c;
    csv.field(std::string("factual_bits")).field(inputs.str());
    csv.field(nats).field(nats / std::log(2.0)).end_row();
  } else {
    throw std::invalid_argument("bounds: which must be assoc|power-law|factual|compare");
  }
  csv.write_atomic(ctx.out("bounds.csv"));
  ctx.write_manifest("bounds");
  std::printf("bounds %s written\n", which.c_str());
  return kExitOk;
}

}  // namespace recall::cli
