// Acceptance suite: one criterion per --criterion N (1..12), a PASS/FAIL line
// each, nonzero exit on failure. Criteria are evaluated exactly as stated,
// with measured values printed for the record.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "recall/assoc_mem.hpp"
#include "recall/bounds.hpp"
#include "recall/csv.hpp"
#include "recall/dynamics.hpp"
#include "recall/embeddings.hpp"
#include "recall/factual_task.hpp"
#include "recall/numerics.hpp"
#include "recall/rng.hpp"
#include "recall/training.hpp"
#include "recall/transformer.hpp"

using namespace recall;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::filesystem::path out_dir() {
  std::filesystem::path p = "acceptance_out";
  std::filesystem::create_directories(p);
  return p;
}

// ---------------------------------------------------------------- criterion 1

TransformerParams random_tf(const TransformerHyper& hy, std::uint64_t seed) {
  TransformerParams p = TransformerParams::zeros(hy);
  Rng rng(seed);
  auto fill = [&](Matrix& m) {
    for (double& v : m.flat())
      v = rng.next_gaussian() / std::sqrt(static_cast<double>(hy.d));
  };
  for (std::size_t h = 0; h < hy.H; ++h) {
    fill(p.wk[h]);
    fill(p.wq[h]);
    fill(p.wv[h]);
    fill(p.wo[h]);
  }
  fill(p.mlp_w);
  fill(p.mlp_v);
  return p;
}

Outcome criterion_1() {
  const TransformerHyper hy{8, 2, 4, 8};
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    FactDictionary dict = gen_dictionary(2, 2, 2, inst);
    EmbeddingTable emb = sample_sphere_table(dict.vocab_size(), hy.d, inst + 100);
    SrDistribution p = SrDistribution::uniform(2, 2);
    Rng rng(inst + 200);
    std::vector<Sequence> batch;
    for (int i = 0; i < 2; ++i) batch.push_back(sample_sequence(dict, 5, p, rng));
    TransformerParams params = random_tf(hy, inst + 300);
    TfGradients grads = TfGradients::zeros(hy);
    loss_and_grads(params, batch, emb, grads);

    std::vector<Matrix*> pb, gb;
    for (std::size_t h = 0; h < hy.H; ++h) {
      pb.insert(pb.end(), {&params.wk[h], &params.wq[h], &params.wv[h], &params.wo[h]});
      gb.insert(gb.end(), {&grads.wk[h], &grads.wq[h], &grads.wv[h], &grads.wo[h]});
    }
    pb.insert(pb.end(), {&params.mlp_w, &params.mlp_v});
    gb.insert(gb.end(), {&grads.mlp_w, &grads.mlp_v});

    TfGradients scratch = TfGradients::zeros(hy);
    for (std::size_t b = 0; b < pb.size(); ++b) {
      Matrix& blk = *pb[b];
      Vector theta(blk.flat().begin(), blk.flat().end());
      auto f = [&](const Vector& t) {
        std::copy(t.begin(), t.end(), blk.flat().begin());
        return loss_and_grads(params, batch, emb, scratch);
      };
      Vector fd = finite_diff_grad(f, theta, 1e-5);
      std::copy(theta.begin(), theta.end(), blk.flat().begin());
      double scale = 0.0, err = 0.0;
      for (double g : gb[b]->flat()) scale = std::max(scale, std::abs(g));
      for (std::size_t i = 0; i < fd.size(); ++i)
        err = std::max(err, std::abs(fd[i] - gb[b]->flat()[i]));
      worst = std::max(worst, err / std::max(scale, 1e-8));
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max relative gradient error %.3g (tol 1e-4)", worst);
  return {worst < 1e-4, buf};
}

// ------------------------------------------------------------ criteria 2 & 3

struct LinearInstance {
  AssociationMap map;
  EmbeddingTable e, u;
  LinearAM am;
  double accuracy = 0.0;
  double min_margin = 1e300;
  bool stored = false;
};

std::vector<LinearInstance> linear_instances() {
  const std::size_t d = 64, n = 256;
  std::vector<LinearInstance> out;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    LinearInstance inst;
    inst.map = AssociationMap::identity(n);
    inst.e = sample_sphere_table(n, d, 2 * seed);
    inst.u = sample_sphere_table(n, d, 2 * seed + 1);
    inst.am = build_linear(inst.map, inst.e, inst.u);
    inst.accuracy = am_accuracy(inst.am, inst.map, inst.e, inst.u);
    for (std::size_t x = 0; x < n; ++x) {
      Vector fx = inst.am.apply(inst.e.row(x));
      double target = dot(inst.u.row(inst.map(x)), fx);
      for (std::size_t y = 0; y < n; ++y) {
        if (y == inst.map(x)) continue;
        inst.min_margin = std::min(inst.min_margin, target - dot(inst.u.row(y), fx));
      }
    }
    inst.stored = inst.accuracy == 1.0 && inst.min_margin > 0.0;
    out.push_back(std::move(inst));
  }
  return out;
}

std::string criterion_2_csv(const std::vector<LinearInstance>& instances) {
  CsvWriter csv({"experiment", "d", "m", "N", "seed", "accuracy", "stored", "wall_ms"});
  for (std::size_t i = 0; i < instances.size(); ++i) {
    csv.field(std::string("thm1_linear")).field(std::size_t{64}).field(std::size_t{0});
    csv.field(std::size_t{256}).field(std::to_string(i)).field(instances[i].accuracy);
    csv.field(std::size_t(instances[i].stored ? 1 : 0)).field(0.0);
    csv.end_row();
  }
  return csv.str();
}

Outcome criterion_2() {
  auto instances = linear_instances();
  int stored = 0;
  double mean_acc = 0.0;
  for (const auto& inst : instances) {
    stored += inst.stored;
    mean_acc += inst.accuracy;
  }
  mean_acc /= static_cast<double>(instances.size());
  write_file_atomic(out_dir() / "criterion2.csv", criterion_2_csv(instances));
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d/20 seeds at accuracy 1.0 with all margins > 0 (need >= 19); "
                "mean accuracy %.4f at d=64, N=256",
                stored, mean_acc);
  return {stored >= 19, buf};
}

Outcome criterion_3() {
  auto instances = linear_instances();
  const std::size_t d = 64, n = 256;
  const double eps = 1.0 / (16.0 * static_cast<double>(d));
  const double bound = 2.0 * static_cast<double>(d) * eps;
  int stored_total = 0, stored_preserved = 0;
  double worst_dev = 0.0;
  bool margins_ok = true;
  for (const auto& inst : instances) {
    auto [q, bits] = quantize_linear(inst.am, eps, n);
    (void)bits;
    for (std::size_t x = 0; x < n; ++x) {
      Vector fx = inst.am.apply(inst.e.row(x));
      Vector qx = q.apply(inst.e.row(x));
      double t0 = dot(inst.u.row(inst.map(x)), fx);
      double t1 = dot(inst.u.row(inst.map(x)), qx);
      for (std::size_t y = 0; y < n; ++y) {
        if (y == inst.map(x)) continue;
        double g = t0 - dot(inst.u.row(y), fx);
        double gq = t1 - dot(inst.u.row(y), qx);
        worst_dev = std::max(worst_dev, std::abs(gq - g));
        if (std::abs(gq - g) > bound + 1e-12) margins_ok = false;
      }
    }
    if (inst.stored) {
      ++stored_total;
      stored_preserved += am_accuracy(q, inst.map, inst.e, inst.u) == 1.0;
    }
  }
  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "|margin shift| max %.4g <= 2d*eps = %.4g on all pairs; accuracy 1.0 "
                "preserved on %d/%d stored instances%s",
                worst_dev, bound, stored_preserved, stored_total,
                stored_total == 0 ? " (none stored under criterion 2)" : "");
  return {margins_ok && stored_preserved == stored_total, buf};
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion_4() {
  const std::vector<std::size_t> d_grid{16, 32};
  const std::vector<std::size_t> m_grid{32, 64, 128};
  const std::vector<std::size_t> n_grid{24, 32,  48,  64,  96,  128, 192,
                                        256, 384, 512, 768, 1024, 1536};
  TrainConfig tc;
  tc.steps = 1 << 11;
  tc.eval_interval = 64;
  tc.acc_threshold = 0.99;
  std::vector<double> xs, ys;
  std::string cells;
  for (std::size_t d : d_grid) {
    for (std::size_t m : m_grid) {
      auto probe = [&](std::size_t n, std::uint64_t seed) {
        AssociationMap map = AssociationMap::identity(n);
        EmbeddingTable e = sample_sphere_table(n, d, seed);
        EmbeddingTable u = sample_sphere_table(n, d, seed ^ 0x1234567);
        TrainConfig ptc = tc;
        ptc.seed = seed + 1;
        auto [net, hist] = train_mlp_am(map, e, u, m, ptc, 1e-2);
        return hist.best_accuracy;
      };
      CapacityResult res =
          capacity_search(probe, n_grid, tc.acc_threshold, 3, 9000 + d * 131 + m);
      std::size_t cap = res.capacity.value_or(0);
      if (cap > 0) {
        xs.push_back(static_cast<double>(m * d));
        ys.push_back(static_cast<double>(cap));
      }
      cells += " md=" + std::to_string(m * d) + ":N*=" + std::to_string(cap);
      std::fprintf(stderr, "  criterion 4 cell done:%s\n", cells.c_str());
    }
  }
  if (xs.size() < 2) return {false, "insufficient stored cells:" + cells};
  double slope = loglog_slope(xs, ys);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "capacity/params slope %.3f (window [0.75, 1.25]);%s",
                slope, cells.c_str());
  return {slope >= 0.75 && slope <= 1.25, buf};
}

// ---------------------------------------------------------------- criterion 5

struct Crit5Seed {
  double accuracy;
  double min_filter_mass;
  double max_ov_dev;
  bool pass;
};

std::vector<Crit5Seed> crit5_seeds() {
  const std::size_t S = 16, R = 16, D = 4, d = 128, d_h = 32, T = 32;
  const double beta = 40.0;
  const double mass_floor = 1.0 - static_cast<double>(T) * std::exp(-beta / 4.0);
  std::vector<Crit5Seed> out;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FactDictionary dict = gen_dictionary(S, R, D, seed);
    EmbeddingTable emb = sample_sphere_table(dict.vocab_size(), d, seed + 50);
    auto [params, report] =
        construct_attention_only(dict, emb, d_h, beta, seed + 100);
    Rng rng(seed + 150);
    EvalStats stats = eval_accuracy_checked(params, dict, emb, T, 64, rng, report);
    bool acc_ok = stats.accuracy == 1.0;
    bool invariants =
        stats.min_filter_mass > mass_floor && report.max_ov_deviation <= 0.2;
    out.push_back({stats.accuracy, stats.min_filter_mass, report.max_ov_deviation,
                   acc_ok && invariants});
  }
  return out;
}

std::string criterion_5_csv(const std::vector<Crit5Seed>& seeds) {
  CsvWriter csv({"seed", "accuracy", "min_filter_mass", "max_ov_deviation", "pass"});
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    csv.field(std::to_string(i)).field(seeds[i].accuracy);
    csv.field(seeds[i].min_filter_mass).field(seeds[i].max_ov_dev);
    csv.field(std::size_t(seeds[i].pass ? 1 : 0)).end_row();
  }
  return csv.str();
}

Outcome criterion_5() {
  auto seeds = crit5_seeds();
  write_file_atomic(out_dir() / "criterion5.csv", criterion_5_csv(seeds));
  int full = 0;
  double mean_acc = 0.0, worst_dev = 0.0;
  for (const auto& s : seeds) {
    full += s.pass;
    mean_acc += s.accuracy;
    worst_dev = std::max(worst_dev, s.max_ov_dev);
  }
  mean_acc /= static_cast<double>(seeds.size());
  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "%d/10 seeds at accuracy 1.0 with invariants (need >= 9); mean "
                "accuracy %.4f, max OV deviation %.3f (target <= 0.2)",
                full, mean_acc, worst_dev);
  return {full >= 9, buf};
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion_6() {
  const std::size_t S = 8, R = 8, D = 4, d = 128, d_h = 32, m = 8192, T = 32;
  int stored = 0;
  double mean_acc = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FactDictionary dict = gen_dictionary(S, R, D, seed);
    EmbeddingTable emb = sample_sphere_table(dict.vocab_size(), d, seed + 30);
    auto [params, report] =
        construct_attention_mlp(dict, emb, d_h, m, 3, 3, 40.0, seed + 60);
    (void)report;
    Rng rng(seed + 90);
    double acc = eval_accuracy(params, dict, emb, T, 64, rng);
    stored += acc >= 0.99;
    mean_acc += acc;
  }
  mean_acc /= 10.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d/10 seeds at accuracy >= 0.99 (need >= 8); mean accuracy %.4f "
                "at p=k=3, m=8192",
                stored, mean_acc);
  return {stored >= 8, buf};
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion_7() {
  const std::vector<ShapeSpec> shapes = {
      {1.0, 4.0, 8}, {2.0, 2.0, 8}, {1.0, 2.0, 4}};
  const std::vector<std::size_t> d_grid{16, 24, 32};
  const std::vector<std::size_t> s_grid{2, 3, 4, 6, 8, 11, 16, 23, 32};
  TrainConfig tc;
  tc.steps = 1 << 12;
  tc.batch = 256;
  tc.eval_interval = 256;
  tc.eval_noise_fills = 8;
  std::vector<double> xs, ys;
  std::string cells;
  for (std::size_t si = 0; si < shapes.size(); ++si) {
    for (std::size_t d : d_grid) {
      TrainConfig cell_tc = tc;
      cell_tc.seed = 40000 + si * 1000 + d;
      FactCapacityResult res =
          fact_capacity_search(shapes[si], d, 8, s_grid, cell_tc, 32);
      auto hyper = shapes[si].instantiate(d);
      std::size_t max_sr = res.max_sr.value_or(0);
      if (max_sr > 0 && hyper) {
        xs.push_back(static_cast<double>(hyper->total_params()));
        ys.push_back(static_cast<double>(max_sr));
      }
      cells += " p=" + std::to_string(hyper ? hyper->total_params() : 0) +
               ":SR=" + std::to_string(max_sr);
      std::fprintf(stderr, "  criterion 7 cell done:%s\n", cells.c_str());
    }
  }
  if (xs.size() < 2) return {false, "insufficient stored cells:" + cells};
  double slope = loglog_slope(xs, ys);
  char buf[384];
  std::snprintf(buf, sizeof(buf), "pooled slope %.3f (window [0.75, 1.25]);%s", slope,
                cells.c_str());
  return {slope >= 0.75 && slope <= 1.25, buf};
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion_8() {
  const std::size_t d = 64, H = 8, T = 32;
  FactDictionary dict = gen_dictionary(32, 32, 8, 7);
  EmbeddingTable emb = sample_sphere_table(dict.vocab_size(), d, 8);
  TrainConfig tc;
  tc.steps = 1 << 12;
  tc.batch = 256;
  tc.eval_interval = 256;
  tc.seed = 9;
  std::vector<std::size_t> hdh{16, 64, 256};
  std::vector<std::size_t> ms{0, 64, 512};
  auto cells = tradeoff_sweep(dict, emb, d, H, hdh, ms, tc, T);
  auto lookup = [&](std::size_t h_dh, std::size_t m) {
    for (const auto& c : cells)
      if (c.h_dh == h_dh && c.m == m) return c.best_acc;
    return -1.0;
  };
  double attn_corner = lookup(256, 0);
  double mlp_corner = lookup(64, 512);
  double starved = lookup(16, 0);
  std::string grid;
  for (const auto& c : cells)
    grid += " (" + std::to_string(c.h_dh) + "," + std::to_string(c.m) + ")=" +
            CsvWriter::format_double(c.best_acc);
  bool pass = attn_corner >= 0.99 && mlp_corner >= 0.99 && starved < 0.9;
  char buf[384];
  std::snprintf(buf, sizeof(buf),
                "attention corner %.4f (>=0.99), MLP corner %.4f (>=0.99), starved "
                "cell %.4f (<0.9);%s",
                attn_corner, mlp_corner, starved, grid.c_str());
  return {pass, buf};
}

// ------------------------------------------------------------ criteria 9 & 10

struct Crit9Result {
  Outcome outcome;
  std::string csv;
};

Crit9Result criterion_9_impl() {
  const std::size_t S = 16, R = 4, D = 8, T = 32;
  const double alpha = 1e-5;
  FactDictionary dict = gen_dictionary(S, R, D, 0, AnswerAssignment::kBalanced);
  LinAttnParams params = init_balanced(dict, alpha);

  FlowOptions opts;
  opts.horizon = 9000.0;
  opts.step = 0.5;
  opts.record_dt = 2.5;
  Trajectory traj = integrate_flow(params, dict, T, opts);

  CsvWriter csv({"t", "loss", "rel_loss", "subj_loss", "max_bal_residual",
                 "max_subj_noise_weight"});
  for (const auto& pt : traj.points) {
    csv.field(pt.t).field(pt.loss).field(pt.rel_loss).field(pt.subj_loss);
    csv.field(pt.max_bal_drift).field(pt.max_subj_noise_weight);
    csv.end_row();
  }

  bool a_ok = std::abs(traj.points.front().loss - std::log(32.0)) < 1e-2;
  bool b_ok = false;
  double b_t = -1.0;
  double max_drift = 0.0;
  for (const auto& pt : traj.points) {
    max_drift = std::max(max_drift, pt.max_bal_drift);
    if (!b_ok && std::abs(pt.loss - std::log(8.0)) < 0.05 && pt.rel_loss < 0.05 &&
        pt.subj_loss > 0.5) {
      b_ok = true;
      b_t = pt.t;
    }
  }
  double final_loss = traj.points.back().loss;
  bool c_ok = final_loss < 0.01;
  bool d_ok = max_drift < 1e-6 && !traj.failed;

  // (e) exact vs Monte-Carlo gradients at three checkpoints along the flow
  bool e_ok = true;
  double e_worst = 0.0;
  LinAttnParams replay = init_balanced(dict, alpha);
  SrDistribution p_sr = SrDistribution::uniform(S, R);
  const double checkpoints[3] = {50.0, 200.0, 2000.0};
  double reached = 0.0;
  for (int c = 0; c < 3; ++c) {
    FlowOptions seg;
    seg.horizon = checkpoints[c] - reached;
    seg.step = 0.5;
    seg.record_dt = seg.horizon;
    integrate_flow(replay, dict, T, seg);
    reached = checkpoints[c];
    GradTables exact = population_grads_exact(replay, dict, T);
    GradTables se;
    Rng rng(777 + static_cast<std::uint64_t>(c));
    GradTables mc = population_grads_mc(replay, dict, p_sr, T, 1000000, rng, &se);
    for (std::size_t i = 0; i < exact.ov.size(); ++i) {
      double diff = std::abs(mc.ov.data()[i] - exact.ov.data()[i]);
      double tol = 4.0 * se.ov.data()[i] + 1e-12;
      e_worst = std::max(e_worst, diff / tol);
      if (diff > tol) e_ok = false;
    }
    for (std::size_t z = 0; z < exact.kq.size(); ++z) {
      double diff = std::abs(mc.kq[z] - exact.kq[z]);
      double tol = 4.0 * se.kq[z] + 1e-12;
      e_worst = std::max(e_worst, diff / tol);
      if (diff > tol) e_ok = false;
    }
  }

  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "(a) init loss %s; (b) plateau %s (t=%.1f); (c) final loss %.2e %s; "
                "(d) residual drift %.2e %s; (e) MC agreement %s (max |diff|/tol %.2f)",
                a_ok ? "ok" : "BAD", b_ok ? "hit" : "MISSED", b_t, final_loss,
                c_ok ? "ok" : "BAD", max_drift, d_ok ? "ok" : "BAD",
                e_ok ? "ok" : "BAD", e_worst);
  return {{a_ok && b_ok && c_ok && d_ok && e_ok, buf}, csv.str()};
}

Outcome criterion_9() {
  Crit9Result res = criterion_9_impl();
  write_file_atomic(out_dir() / "criterion9.csv", res.csv);
  return res.outcome;
}

Outcome criterion_10() {
  const std::size_t S = 64, R = 2, D = 2, T = 8;
  const double alpha = 1e-5;
  FactDictionary dict = gen_dictionary(S, R, D, 0, AnswerAssignment::kBalanced, 256);
  LinAttnParams params = init_balanced(dict, alpha);
  FlowOptions opts;
  opts.horizon = 150.0;
  opts.step = 0.5;
  opts.record_dt = 0.5;
  Trajectory traj = integrate_flow(params, dict, T, opts);
  const double cap = std::sqrt(alpha);
  bool reached = false, confined = true;
  double t_rel = -1.0, worst = 0.0;
  for (const auto& pt : traj.points) {
    if (pt.rel_loss < 0.05) {
      reached = true;
      t_rel = pt.t;
      break;
    }
    worst = std::max(worst, pt.max_subj_noise_weight);
    if (pt.max_subj_noise_weight > cap) confined = false;
  }
  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "relation-only loss < 0.05 first at t=%.1f; max subject/noise weight "
                "%.3g before that (cap sqrt(alpha) = %.3g)",
                t_rel, worst, cap);
  return {reached && confined, buf};
}

// --------------------------------------------------------------- criterion 11

Outcome criterion_11() {
  std::vector<double> uniform(16, 1.0 / 16.0);
  const double m = 8.0;
  bool zero_ok = lb_assoc_loss(16.0 * std::log(m), m, uniform) == 0.0;
  bool full_ok = std::abs(lb_assoc_loss(0.0, m, uniform) - std::log(m)) < 1e-12;

  std::vector<double> grid;
  for (double b = 100.0; b <= 10000.0; b *= 1.5) grid.push_back(b);
  double slope = lb_power_law_slope(grid, 2.0, 1000000);
  bool slope_ok = std::abs(slope - (1.0 - 2.0)) < 0.1;

  bool mono_ok = true;
  for (std::size_t s = 8; s <= 32 && mono_ok; s *= 2)
    for (std::size_t r = 4; r <= 16 && mono_ok; r *= 2)
      for (std::size_t dd = 2; dd <= 8 && mono_ok; dd *= 2) {
        double base = lb_factual_bits(s, r, dd, 4096, 0.5);
        mono_ok = lb_factual_bits(s + 1, r, dd, 4096, 0.5) > base &&
                  lb_factual_bits(s, r + 1, dd, 4096, 0.5) > base &&
                  lb_factual_bits(s, r, dd + 1, 4096, 0.5) > base;
      }
  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "B=NlogM zero: %s; B=0 gives logM: %s; power-law slope %.3f "
                "(target -1 +/- 0.1); monotonicity: %s",
                zero_ok ? "ok" : "BAD", full_ok ? "ok" : "BAD", slope,
                mono_ok ? "ok" : "BAD");
  return {zero_ok && full_ok && slope_ok && mono_ok, buf};
}

// --------------------------------------------------------------- criterion 12

Outcome criterion_12() {
  std::string c2a = criterion_2_csv(linear_instances());
  std::string c2b = criterion_2_csv(linear_instances());
  std::string c5a = criterion_5_csv(crit5_seeds());
  std::string c5b = criterion_5_csv(crit5_seeds());
  std::string c9a = criterion_9_impl().csv;
  std::string c9b = criterion_9_impl().csv;
  bool ok2 = c2a == c2b, ok5 = c5a == c5b, ok9 = c9a == c9b;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "byte-identical reruns: criterion2 %s, criterion5 %s, criterion9 %s",
                ok2 ? "yes" : "NO", ok5 ? "yes" : "NO", ok9 ? "yes" : "NO");
  return {ok2 && ok5 && ok9, buf};
}

const char* kNames[12] = {
    "transformer gradients vs central differences",
    "linear memory exact storage (d=64, N=256, 20 seeds)",
    "quantized linear memory (eps = 1/(16d))",
    "trained MLP memory capacity slope",
    "attention-only construction (S=R=16, D=4, d=128, d_h=32)",
    "attention+MLP construction (S=R=8, D=4, p=k=3, m=8192)",
    "trained transformer capacity slope (3 shapes x 3 widths)",
    "attention/MLP tradeoff grid corners",
    "gradient-flow three-stage dynamics (fig-5 preset)",
    "stage-1 confinement preset",
    "lower-bound evaluators",
    "determinism of criteria 2, 5, 9 outputs",
};

Outcome run_criterion(int id) {
  switch (id) {
    case 1: return criterion_1();
    case 2: return criterion_2();
    case 3: return criterion_3();
    case 4: return criterion_4();
    case 5: return criterion_5();
    case 6: return criterion_6();
    case 7: return criterion_7();
    case 8: return criterion_8();
    case 9: return criterion_9();
    case 10: return criterion_10();
    case 11: return criterion_11();
    case 12: return criterion_12();
    default: return {false, "unknown criterion"};
  }
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
      only = std::atoi(argv[++i]);
  }
  int failures = 0;
  for (int id = 1; id <= 12; ++id) {
    if (only != 0 && id != only) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome out = run_criterion(id);
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d [%s] %s — %s (%.1fs)\n", id, out.pass ? "PASS" : "FAIL",
                kNames[id - 1], out.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !out.pass;
  }
  return failures == 0 ? 0 : 1;
}
